#pragma once

// End-to-end fit: bandwidth, BIC-tuned preliminary fit, surrogate, and
// GIC-tuned selection.

#include "gsvcm/preliminary.hpp"
#include "gsvcm/selector.hpp"
#include "gsvcm/structure.hpp"
#include "gsvcm/surrogate.hpp"
#include "gsvcm/tuning.hpp"

#include <optional>
#include <vector>

namespace gsvcm {

struct PipelineOptions {
  FamilyKind family = FamilyKind::GaussianIdentity;
  PenaltySpec penalty;
  std::optional<double> bandwidth;
  std::vector<double> preliminary_grid;   // empty: scaled default
  std::vector<double> preliminary_grid2;  // lambda2 values; empty ties lambda2 = lambda1
  LambdaGrid grid;                       // empty: default_grid
  GridOptions grid_options;
  SelectorConfig selector;               // penalty field is overwritten per cell
  PreliminaryOptions preliminary;
  unsigned threads = 1;
};

// Everything that does not depend on the second-stage penalty.
struct PreparedFit {
  double h = 0.0;
  PreliminaryTuning preliminary;
  QuadraticSurrogate surrogate;
};

PreparedFit prepare_fit(const Dataset& data, const PipelineOptions& options);

TuningResult select_structure(const Dataset& data, const PreparedFit& prepared, const PenaltySpec& penalty,
                              const PipelineOptions& options);

struct PipelineResult {
  PreparedFit prepared;
  TuningResult tuning;
};

PipelineResult fit_pipeline(const Dataset& data, const PipelineOptions& options);

}  // namespace gsvcm
