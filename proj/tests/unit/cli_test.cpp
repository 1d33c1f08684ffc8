// Runs the gsvcm executable and inspects exit codes and files.

#include "gsvcm/gsvcm.h"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

#ifndef GSVCM_CLI
#error "GSVCM_CLI must name the command-line executable"
#endif

namespace {

struct Run {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gsvcm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("GSVCM_THREADS=1 \"") + GSVCM_CLI + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

int data_lines(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  int n = -1;
  while (std::getline(f, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST_CASE("fit on a 10-row Gaussian CSV") {
  const fs::path dir = scratch("fit10");
  std::ofstream csv(dir / "d.csv");
  csv << "u,y,x1,x2\n";
  for (int i = 0; i < 10; ++i)
    csv << (i + 0.5) / 10.0 << ',' << 1.0 + 0.3 * std::sin(3.0 * i) << ",1," << std::cos(5.0 * i) << '\n';
  csv.close();
  const Run r = run("fit " + (dir / "d.csv").string() + " --family gaussian --penalty scad -o " +
                        (dir / "out").string(),
                    dir);
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(fs::exists(dir / "out" / "gic_table.csv"));
  CHECK(fs::exists(dir / "out" / "curves.csv"));
  fs::remove_all(dir);
}

TEST_CASE("malformed CSV exits 2 and cites the line") {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "d.csv") << "u,y,x1\n0.1,1,1\n0.2,2,1\n1.5,1,1\n0.4,1,1\n";
  const Run r = run("fit --input " + (dir / "d.csv").string() + " --family gaussian -o " + (dir / "o").string(), dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(run("simulate --scenario ex77 -o " + (dir / "o").string(), dir).code == 2);
  CHECK(run("fit --bogus", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("dumped ex51 data fits exactly like the in-process run") {
  const fs::path dir = scratch("roundtrip");
  REQUIRE(run("simulate --scenario ex51 --seed 11 --dump-data " + (dir / "d.csv").string(), dir).code == 0);
  const Run r = run("fit " + (dir / "d.csv").string() + " --family poisson --penalty aglasso -o " +
                        (dir / "out").string(),
                    dir);
  INFO(r.err);
  REQUIRE(r.code == 0);

  gsvcm_dataset* data = nullptr;
  REQUIRE(gsvcm_simulate_dataset("ex51", 0, 0, nullptr, 11, &data) == GSVCM_OK);
  gsvcm_options* o = nullptr;
  gsvcm_options_create(&o);
  gsvcm_options_set_family(o, "poisson");
  gsvcm_options_set_penalty(o, "aglasso");
  gsvcm_options_set_threads(o, 1);
  gsvcm_fit* fit = nullptr;
  REQUIRE(gsvcm_fit_run(data, o, &fit) == GSVCM_OK);
  REQUIRE(gsvcm_fit_write(fit, (dir / "inproc").string().c_str(), 0) == GSVCM_OK);
  CHECK(slurp(dir / "out" / "report.json") == slurp(dir / "inproc" / "report.json"));
  CHECK(slurp(dir / "out" / "gic_table.csv") == slurp(dir / "inproc" / "gic_table.csv"));
  gsvcm_fit_free(fit);
  gsvcm_options_free(o);
  gsvcm_dataset_free(data);
  fs::remove_all(dir);
}

TEST_CASE("simulate: two replications, deterministic") {
  const fs::path dir = scratch("sim");
  const std::string common = "simulate --scenario ex51 --reps 2 --seed 7 --penalties aglasso -o ";
  REQUIRE(run(common + (dir / "a").string(), dir).code == 0);
  REQUIRE(run(common + (dir / "b").string(), dir).code == 0);
  std::ifstream t(dir / "a" / "table1.csv");
  std::string header, row;
  std::getline(t, header);
  std::getline(t, row);
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 10);
  CHECK(cells[3] == "2");
  double rates = 0.0;
  for (std::size_t i = 4; i < cells.size(); ++i) rates += std::stod(cells[i]);
  CHECK(std::abs(rates * 2.0 - 2.0) < 1e-9);
  for (const char* f : {"table1.csv", "table2.csv", "ree.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  fs::remove_all(dir);
}

TEST_CASE("predict from a constants-only report") {
  const fs::path dir = scratch("pred");
  std::ofstream(dir / "report.json") << R"({
  "family": "poisson", "bandwidth": 0.3,
  "penalty": {"kind": "scad", "lambda": 0.1, "lambda_star": 0.1, "kappa": 1, "a0": 3.7},
  "k1": 2, "k2": 0, "knots": [0.1, 0.5, 0.9],
  "coefficients": [{"index": 1, "verdict": "constant", "value": 0.6},
                   {"index": 2, "verdict": "constant", "value": -0.7}]
})";
  std::ofstream(dir / "rows.csv") << "u,x1,x2\n0.4,1.5,2\n";
  const Run r = run("predict --report " + (dir / "report.json").string() + " --input " + (dir / "rows.csv").string() +
                        " -o " + (dir / "o").string(),
                    dir);
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::ifstream p(dir / "o" / "predictions.csv");
  std::string header, line;
  std::getline(p, header);
  std::getline(p, line);
  CHECK(header == "row,u,prediction");
  const double value = std::stod(line.substr(line.rfind(',') + 1));
  CHECK(std::abs(value - std::exp(0.6 * 1.5 - 0.7 * 2.0)) < 1e-12);

  std::ofstream(dir / "far.csv") << "u,x1,x2\n0.4,1,1\n0.95,1,1\n";
  const Run bad = run("predict --report " + (dir / "report.json").string() + " --input " + (dir / "far.csv").string() +
                          " -o " + (dir / "o").string(),
                      dir);
  CHECK(bad.code == 3);
  CHECK(bad.err.find("row 2") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("rolling prediction boundaries") {
  const fs::path dir = scratch("rolling");
  const Run one = run("predict --synthetic 120 --train-size 119 --penalty aglasso -o " + (dir / "one").string(), dir);
  INFO(one.err);
  REQUIRE(one.code == 0);
  CHECK(data_lines(dir / "one" / "predictions.csv") == 1);

  const Run full = run("predict --synthetic 730 --train-size 700 --penalty aglasso -o " + (dir / "full").string(), dir);
  INFO(full.err);
  REQUIRE(full.code == 0);
  CHECK(data_lines(dir / "full" / "predictions.csv") == 30);
  const std::string summary = slurp(dir / "full" / "summary.json");
  CHECK(summary.find("mrpe_selected") != std::string::npos);
  CHECK(summary.find("nan") == std::string::npos);
  fs::remove_all(dir);
}
