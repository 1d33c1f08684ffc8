#include "gsvcm/core.hpp"

#include <cmath>

namespace gsvcm {

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

Dataset::Dataset(Vector u, Matrix x, Vector y) : u_(std::move(u)), x_(std::move(x)), y_(std::move(y)) {
  if (u_.size() < 2) fail(ErrorKind::InvalidArgument, "dataset needs at least 2 observations");
  if (x_.cols() < 1) fail(ErrorKind::InvalidArgument, "dataset needs at least one covariate");
  if (x_.rows() != u_.size() || y_.size() != u_.size())
    fail(ErrorKind::InvalidArgument, "u, x and y have inconsistent row counts");
  for (Index i = 0; i < u_.size(); ++i) {
    if (!std::isfinite(u_[i]) || u_[i] < 0.0 || u_[i] > 1.0)
      fail(ErrorKind::InvalidArgument, "index value u[" + std::to_string(i) + "] outside [0,1]");
    if (!std::isfinite(y_[i]))
      fail(ErrorKind::InvalidArgument, "non-finite response y[" + std::to_string(i) + "]");
  }
  if (!x_.allFinite()) fail(ErrorKind::InvalidArgument, "covariate matrix has non-finite entries");
}

Dataset Dataset::subset_rows(const std::vector<Index>& rows) const {
  const auto m = static_cast<Index>(rows.size());
  Vector u(m), y(m);
  Matrix x(m, d());
  for (Index r = 0; r < m; ++r) {
    u[r] = u_[rows[r]];
    y[r] = y_[rows[r]];
    x.row(r) = x_.row(rows[r]);
  }
  return Dataset(std::move(u), std::move(x), std::move(y));
}

Dataset Dataset::first_rows(Index count) const {
  if (count < 2 || count > n()) fail(ErrorKind::InvalidArgument, "row count out of range");
  return Dataset(u_.head(count), x_.topRows(count), y_.head(count));
}

std::string_view Family::name() const noexcept {
  switch (kind_) {
    case FamilyKind::PoissonLog: return "poisson";
    case FamilyKind::BernoulliLogit: return "logistic";
    case FamilyKind::GaussianIdentity: return "gaussian";
  }
  return "unknown";
}

bool Family::valid_response(double y) const noexcept {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case FamilyKind::PoissonLog: return y >= 0.0 && y == std::floor(y);
    case FamilyKind::BernoulliLogit: return y == 0.0 || y == 1.0;
    case FamilyKind::GaussianIdentity: return true;
  }
  return false;
}

namespace {
double clamp_predictor(double s) noexcept {
  return std::fmin(std::fmax(s, -kPredictorBound), kPredictorBound);
}
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}  // namespace

double Family::link(double mean) const {
  switch (kind_) {
    case FamilyKind::PoissonLog:
      if (!(mean > 0.0)) fail(ErrorKind::InvalidArgument, "Poisson mean must be positive");
      return std::log(mean);
    case FamilyKind::BernoulliLogit:
      if (!(mean > 0.0 && mean < 1.0)) fail(ErrorKind::InvalidArgument, "Bernoulli mean must lie in (0,1)");
      return std::log(mean / (1.0 - mean));
    case FamilyKind::GaussianIdentity:
      return mean;
  }
  return mean;
}

double Family::inverse_link(double s) const noexcept {
  switch (kind_) {
    case FamilyKind::PoissonLog: return std::exp(clamp_predictor(s));
    case FamilyKind::BernoulliLogit: return 1.0 / (1.0 + std::exp(-clamp_predictor(s)));
    case FamilyKind::GaussianIdentity: return s;
  }
  return s;
}

double Family::loglik(double mean, double y) const noexcept {
  switch (kind_) {
    case FamilyKind::PoissonLog:
      return y * std::log(mean) - mean - std::lgamma(y + 1.0);
    case FamilyKind::BernoulliLogit:
      return y > 0.5 ? std::log(mean) : std::log1p(-mean);
    case FamilyKind::GaussianIdentity:
      return -0.5 * (y - mean) * (y - mean) - kHalfLog2Pi;
  }
  return 0.0;
}

double Family::loglik_at(double s, double y) const noexcept {
  switch (kind_) {
    case FamilyKind::PoissonLog: {
      const double c = clamp_predictor(s);
      return y * c - std::exp(c) - std::lgamma(y + 1.0);
    }
    case FamilyKind::BernoulliLogit: {
      // y s - log(1 + e^s), evaluated stably
      const double c = clamp_predictor(s);
      const double softplus = c > 0.0 ? c + std::log1p(std::exp(-c)) : std::log1p(std::exp(c));
      return y * c - softplus;
    }
    case FamilyKind::GaussianIdentity:
      return -0.5 * (y - s) * (y - s) - kHalfLog2Pi;
  }
  return 0.0;
}

void Family::derivatives(double s, double y, double& q1, double& q2) const noexcept {
  switch (kind_) {
    case FamilyKind::PoissonLog: {
      const double mu = std::exp(clamp_predictor(s));
      q1 = y - mu;
      q2 = -mu;
      return;
    }
    case FamilyKind::BernoulliLogit: {
      const double p = 1.0 / (1.0 + std::exp(-clamp_predictor(s)));
      q1 = y - p;
      q2 = -p * (1.0 - p);
      return;
    }
    case FamilyKind::GaussianIdentity:
      q1 = y - s;
      q2 = -1.0;
      return;
  }
}

FamilyValue family_eval(const Family& family, double s, double y) {
  if (!std::isfinite(s)) fail(ErrorKind::InvalidArgument, "non-finite linear predictor");
  if (!family.valid_response(y))
    fail(ErrorKind::InvalidArgument,
         "response " + std::to_string(y) + " outside the range of the " + std::string(family.name()) + " family");
  FamilyValue v{};
  v.loglik = family.loglik_at(s, y);
  family.derivatives(s, y, v.q1, v.q2);
  return v;
}

Kernel::Kernel(double bandwidth, KernelKind kind) : kind_(kind), h_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    fail(ErrorKind::InvalidArgument, "bandwidth must be positive and finite");
}

double kernel_weight(double t, double h) {
  if (!std::isfinite(t)) fail(ErrorKind::InvalidArgument, "kernel argument must be finite");
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::InvalidArgument, "bandwidth must be positive and finite");
  return Kernel::profile(t / h) / h;
}

Vector CoefficientField::stack() const {
  const Index nd = n() * d();
  Vector theta(2 * nd);
  for (Index j = 0; j < d(); ++j) {
    theta.segment(j * n(), n()) = alpha.col(j);
    theta.segment(nd + j * n(), n()) = h * beta.col(j);
  }
  return theta;
}

CoefficientField CoefficientField::unstack(const Vector& theta, Index n, Index d, double h) {
  if (theta.size() != 2 * n * d) fail(ErrorKind::InvalidArgument, "theta has wrong length");
  CoefficientField f{Matrix(n, d), Matrix(n, d), h};
  const Index nd = n * d;
  for (Index j = 0; j < d; ++j) {
    f.alpha.col(j) = theta.segment(j * n, n);
    f.beta.col(j) = theta.segment(nd + j * n, n) / h;
  }
  return f;
}

PenaltySpec PenaltySpec::adaptive_group_lasso(double lambda, double lambda_star, int kappa) {
  PenaltySpec p{PenaltyKind::AdaptiveGroupLasso, lambda, lambda_star, kappa, 3.7};
  p.validate();
  return p;
}

PenaltySpec PenaltySpec::group_scad(double lambda, double lambda_star, double a0) {
  PenaltySpec p{PenaltyKind::GroupScad, lambda, lambda_star, 1, a0};
  p.validate();
  return p;
}

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !(lambda_star >= 0.0) || !std::isfinite(lambda) || !std::isfinite(lambda_star))
    fail(ErrorKind::InvalidArgument, "penalty tuning parameters must be finite and nonnegative");
  if (kind == PenaltyKind::AdaptiveGroupLasso && kappa < 1)
    fail(ErrorKind::InvalidArgument, "kappa must be a positive integer");
  if (kind == PenaltyKind::GroupScad && !(a0 > 2.0))
    fail(ErrorKind::InvalidArgument, "SCAD a0 must exceed 2");
}

std::string_view PenaltySpec::name() const noexcept {
  return kind == PenaltyKind::GroupScad ? "scad" : "aglasso";
}

}  // namespace gsvcm
