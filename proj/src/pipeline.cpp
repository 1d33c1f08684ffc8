#include "gsvcm/pipeline.hpp"

namespace gsvcm {

PreparedFit prepare_fit(const Dataset& data, const PipelineOptions& options) {
  const Family family(options.family);
  for (Index i = 0; i < data.n(); ++i)
    if (!family.valid_response(data.y()[i]))
      fail(ErrorKind::Input, "response on row " + std::to_string(i + 1) + " is not valid for the " +
                                 std::string(family.name()) + " family");
  PreparedFit out;
  out.h = options.bandwidth ? *options.bandwidth : default_bandwidth(data.n(), data.d());
  const Kernel kernel(out.h);
  const auto grid1 = options.preliminary_grid.empty() ? default_preliminary_grid(data, family, kernel)
                                                      : options.preliminary_grid;
  out.preliminary = select_preliminary_tuning(data, family, kernel, grid1, options.preliminary_grid2, options.threads, options.preliminary);
  out.surrogate = build_surrogate(data, family, kernel, out.preliminary.best, options.threads);
  return out;
}

TuningResult select_structure(const Dataset& data, const PreparedFit& prepared, const PenaltySpec& penalty,
                              const PipelineOptions& options) {
  const Family family(options.family);
  const LambdaGrid grid = options.grid.empty()
                              ? default_grid(prepared.surrogate, prepared.preliminary.best, penalty, options.grid_options)
                              : options.grid;
  SelectorConfig config = options.selector;
  config.penalty = penalty;
  return select_tuning(data, family, prepared.surrogate, prepared.preliminary.best, penalty, grid, config,
                       options.threads);
}

PipelineResult fit_pipeline(const Dataset& data, const PipelineOptions& options) {
  PipelineResult out;
  out.prepared = prepare_fit(data, options);
  out.tuning = select_structure(data, out.prepared, options.penalty, options);
  return out;
}

}  // namespace gsvcm
