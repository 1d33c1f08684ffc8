#include "gsvcm/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gsvcm {

namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void input_error(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorKind::Input, source + ": line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, const std::string& source, std::size_t line, std::string_view column) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    input_error(source, line, "column " + std::string(column) + " has non-numeric value '" + std::string(field) + "'");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
};

Table parse_table(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (t.header.empty()) {
      for (auto f : fields) t.header.push_back(lower(f));
      continue;
    }
    if (fields.size() != t.header.size())
      input_error(source, number, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], source, number, t.header[c]);
    t.rows.push_back(std::move(row));
    t.lines.push_back(number);
  }
  if (t.header.empty()) fail(ErrorKind::Input, source + ": empty file");
  return t;
}

void check_u(double u, const std::string& source, std::size_t line) {
  if (u < 0.0 || u > 1.0) input_error(source, line, "index value u = " + format_double(u) + " is outside [0, 1]");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  return out;
}

std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_list(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::Input, std::string("report field ") + what + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

FamilyKind parse_family(std::string_view name) {
  const std::string n = lower(name);
  if (n == "poisson") return FamilyKind::PoissonLog;
  if (n == "logistic" || n == "bernoulli" || n == "binomial") return FamilyKind::BernoulliLogit;
  if (n == "gaussian" || n == "normal") return FamilyKind::GaussianIdentity;
  fail(ErrorKind::Input, "unknown family '" + std::string(name) + "'");
}

PenaltyKind parse_penalty(std::string_view name) {
  const std::string n = lower(name);
  if (n == "scad") return PenaltyKind::GroupScad;
  if (n == "aglasso" || n == "agl") return PenaltyKind::AdaptiveGroupLasso;
  fail(ErrorKind::Input, "unknown penalty '" + std::string(name) + "'");
}

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  const Table t = parse_table(in, source);
  if (t.header.size() < 3 || t.header[0] != "u" || t.header[1] != "y")
    input_error(source, 1, "header must be u, y, x1..xd");
  if (t.rows.size() < 2) fail(ErrorKind::Input, source + ": need at least 2 data rows");
  const auto n = static_cast<Index>(t.rows.size());
  const auto d = static_cast<Index>(t.header.size()) - 2;
  Vector u(n), y(n);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    check_u(row[0], source, t.lines[static_cast<std::size_t>(i)]);
    u[i] = row[0];
    y[i] = row[1];
    for (Index j = 0; j < d; ++j) x(i, j) = row[static_cast<std::size_t>(j + 2)];
  }
  return Dataset(std::move(u), std::move(x), std::move(y));
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_dataset_csv(in, path);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "u,y";
  for (Index j = 0; j < data.d(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    out << format_double(data.u()[i]) << ',' << format_double(data.y()[i]);
    for (Index j = 0; j < data.d(); ++j) out << ',' << format_double(data.x()(i, j));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
}

NewRows parse_new_rows_csv(std::istream& in, const std::string& source) {
  const Table t = parse_table(in, source);
  if (t.header.size() < 2 || t.header[0] != "u") input_error(source, 1, "header must be u, [y,] x1..xd");
  if (t.rows.empty()) fail(ErrorKind::Input, source + ": no data rows");
  const auto it = std::find(t.header.begin() + 1, t.header.end(), "y");
  const bool has_y = it != t.header.end();
  const auto y_col = static_cast<std::size_t>(it - t.header.begin());
  const auto n = static_cast<Index>(t.rows.size());
  const auto d = static_cast<Index>(t.header.size()) - 1 - (has_y ? 1 : 0);
  if (d < 1) input_error(source, 1, "no covariate columns");
  NewRows out;
  out.u.resize(n);
  out.x.resize(n, d);
  if (has_y) out.y = Vector(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    check_u(row[0], source, t.lines[static_cast<std::size_t>(i)]);
    out.u[i] = row[0];
    Index j = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (has_y && c == y_col) {
        (*out.y)[i] = row[c];
        continue;
      }
      out.x(i, j++) = row[c];
    }
  }
  return out;
}

NewRows read_new_rows_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_new_rows_csv(in, path);
}

std::string report_to_json(const StructureReport& report, int indent) {
  json j;
  j["family"] = std::string(Family(report.family).name());
  j["bandwidth"] = report.bandwidth;
  j["penalty"] = {{"kind", std::string(report.penalty.name())},
                  {"lambda", report.penalty.lambda},
                  {"lambda_star", report.penalty.lambda_star},
                  {"kappa", report.penalty.kappa},
                  {"a0", report.penalty.a0}};
  j["k1"] = report.k1;
  j["k2"] = report.k2;
  j["knots"] = to_list(report.knots);
  json coefs = json::array();
  for (Index i = 0; i < report.d(); ++i) {
    const Verdict& v = report.verdicts[static_cast<std::size_t>(i)];
    json c = {{"index", i + 1}, {"verdict", std::string(verdict_name(v.kind))}};
    if (v.kind == VerdictKind::Constant) c["value"] = v.value;
    if (v.kind == VerdictKind::Varying) {
      c["alpha"] = to_list(v.alpha);
      c["beta"] = to_list(v.beta);
    }
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  return j.dump(indent);
}

StructureReport report_from_json(const std::string& text) {
  StructureReport r;
  try {
    const json j = json::parse(text);
    r.family = parse_family(j.at("family").get<std::string>());
    r.bandwidth = j.at("bandwidth").get<double>();
    const json& p = j.at("penalty");
    r.penalty.kind = parse_penalty(p.at("kind").get<std::string>());
    r.penalty.lambda = p.at("lambda").get<double>();
    r.penalty.lambda_star = p.at("lambda_star").get<double>();
    r.penalty.kappa = p.at("kappa").get<int>();
    r.penalty.a0 = p.at("a0").get<double>();
    r.knots = from_list(j.at("knots"), "knots");
    const Index n = r.knots.size();
    if (n < 2) fail(ErrorKind::Input, "report needs at least 2 knots");
    for (const json& c : j.at("coefficients")) {
      Verdict v;
      v.alpha = Vector::Zero(n);
      v.beta = Vector::Zero(n);
      const std::string kind = c.at("verdict").get<std::string>();
      if (kind == "zero") {
        v.kind = VerdictKind::Zero;
      } else if (kind == "constant") {
        v.kind = VerdictKind::Constant;
        v.value = c.at("value").get<double>();
        ++r.k1;
      } else if (kind == "varying") {
        v.kind = VerdictKind::Varying;
        v.alpha = from_list(c.at("alpha"), "alpha");
        v.beta = from_list(c.at("beta"), "beta");
        if (v.alpha.size() != n || v.beta.size() != n)
          fail(ErrorKind::Input, "curve length does not match the knots");
        ++r.k2;
      } else {
        fail(ErrorKind::Input, "unknown verdict '" + kind + "'");
      }
      r.verdicts.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Input, std::string("malformed report: ") + e.what());
  }
  if (r.verdicts.empty()) fail(ErrorKind::Input, "report has no coefficients");
  return r;
}

StructureReport read_report(const std::string& path) {
  auto in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

void write_report(const std::string& path, const StructureReport& report) {
  auto out = open_out(path);
  out << report_to_json(report) << '\n';
}

void write_gic_table(const std::string& path, const GicTable& table) {
  auto out = open_out(path);
  out << "lambda,lambda_star,gic,k1,k2,converged,selected\n";
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    const GicCell& c = table.cells[i];
    out << format_double(c.lambda) << ',' << format_double(c.lambda_star) << ','
        << (std::isfinite(c.gic) ? format_double(c.gic) : std::string("nan")) << ',' << c.k1 << ',' << c.k2 << ','
        << (c.converged ? 1 : 0) << ',' << (i == table.argmin ? 1 : 0) << '\n';
  }
}

void write_curves(const std::string& path, const StructureReport& report, int grid) {
  auto out = open_out(path);
  out << "j,u,alpha_hat,beta_hat\n";
  const Index n = report.knots.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return report.knots[a] < report.knots[b]; });
  const double lo = report.knots[order.front()];
  const double hi = report.knots[order.back()];

  for (Index j = 0; j < report.d(); ++j) {
    const Verdict& v = report.verdicts[static_cast<std::size_t>(j)];
    auto emit = [&](double u, double a, double b) {
      out << j + 1 << ',' << format_double(u) << ',' << format_double(a) << ',' << format_double(b) << '\n';
    };
    if (grid <= 0) {
      for (Index k : order) emit(report.knots[k], report.coefficient_at_knot(j, k), v.beta[k]);
      continue;
    }
    std::size_t pos = 0;
    for (int g = 0; g < grid; ++g) {
      const double u = grid == 1 ? lo : lo + (hi - lo) * g / (grid - 1);
      while (pos + 1 < order.size() && report.knots[order[pos + 1]] < u) ++pos;
      const Index a = order[pos];
      const Index b = order[std::min(pos + 1, order.size() - 1)];
      const double span = report.knots[b] - report.knots[a];
      const double t = span > 0.0 ? std::clamp((u - report.knots[a]) / span, 0.0, 1.0) : 0.0;
      const double ca = report.coefficient_at_knot(j, a);
      const double cb = report.coefficient_at_knot(j, b);
      emit(u, ca + t * (cb - ca), v.beta[a] + t * (v.beta[b] - v.beta[a]));
    }
  }
}

}  // namespace gsvcm
