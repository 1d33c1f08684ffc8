#include "gsvcm/penalties.hpp"

#include <algorithm>
#include <cmath>

namespace gsvcm {

double deviation(const Eigen::Ref<const Vector>& values) {
  if (values.size() == 0) fail(ErrorKind::InvalidArgument, "deviation of an empty vector");
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum());
}

double scad_derivative(double z, double lambda, double a0) {
  if (lambda == 0.0) return 0.0;
  if (z <= lambda) return lambda;
  return std::max(a0 * lambda - z, 0.0) / (a0 - 1.0);
}

namespace {

double adaptive(double lambda, double norm, int kappa) {
  if (lambda == 0.0) return 0.0;
  if (norm < kNormCutoff) return kPinned;
  return lambda * std::pow(norm, -kappa);
}

}  // namespace

GroupWeights compute_weights(const PenaltySpec& spec, const Matrix& alpha_ref, double h) {
  spec.validate();
  if (!alpha_ref.allFinite()) fail(ErrorKind::InvalidArgument, "reference coefficients are not finite");
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const Index d = alpha_ref.cols();
  GroupWeights w;
  w.tau1.resize(d);
  w.tau2.resize(d);
  w.frozen = spec.kind == PenaltyKind::AdaptiveGroupLasso;
  for (Index j = 0; j < d; ++j) {
    const double norm = alpha_ref.col(j).norm();
    const double dev = deviation(alpha_ref.col(j));
    if (spec.kind == PenaltyKind::AdaptiveGroupLasso) {
      w.tau1[j] = adaptive(spec.lambda, norm, spec.kappa);
      w.tau2[j] = adaptive(spec.lambda_star, dev, spec.kappa);
    } else {
      w.tau1[j] = scad_derivative(norm, spec.lambda, spec.a0);
      w.tau2[j] = scad_derivative(dev, spec.lambda_star, spec.a0);
    }
  }
  return w;
}

}  // namespace gsvcm
