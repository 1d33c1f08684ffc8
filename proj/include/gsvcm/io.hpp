#pragma once

// CSV input, CSV/JSON output. Errors carry the 1-based file line.

#include "gsvcm/structure.hpp"
#include "gsvcm/tuning.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace gsvcm {

FamilyKind parse_family(std::string_view name);
PenaltyKind parse_penalty(std::string_view name);

// Header u, y, x1..xd. u must lie in [0, 1].
Dataset parse_dataset_csv(std::istream& in, const std::string& source = "input");
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

// Rows for prediction: header u, x1..xd, optionally with a y column anywhere
// after u.
struct NewRows {
  Vector u;
  Matrix x;
  std::optional<Vector> y;
};

NewRows parse_new_rows_csv(std::istream& in, const std::string& source = "input");
NewRows read_new_rows_csv(const std::string& path);

std::string report_to_json(const StructureReport& report, int indent = 2);
StructureReport report_from_json(const std::string& text);
StructureReport read_report(const std::string& path);
void write_report(const std::string& path, const StructureReport& report);

// lambda, lambda_star, gic, k1, k2, converged, selected
void write_gic_table(const std::string& path, const GicTable& table);

// Long format j, u, alpha_hat, beta_hat over the knots (sorted by u), or over
// `grid` evenly spaced points by interpolation when grid > 0.
void write_curves(const std::string& path, const StructureReport& report, int grid = 0);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace gsvcm
