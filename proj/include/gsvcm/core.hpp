#pragma once

// Domain types shared by every stage of the GSVCM selection pipeline.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsvcm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  InvalidArgument,
  Input,
  Numeric,
  OutOfDomain,
  UndefinedMetric,
  TuningFailure,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

// Sample {(U_i, X_i, y_i)}. Validated on construction and immutable after.
class Dataset {
 public:
  Dataset(Vector u, Matrix x, Vector y);

  const Vector& u() const noexcept { return u_; }
  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  Index n() const noexcept { return u_.size(); }
  Index d() const noexcept { return x_.cols(); }

  // Rows selected by `rows`, in that order.
  Dataset subset_rows(const std::vector<Index>& rows) const;
  Dataset first_rows(Index count) const;

 private:
  Vector u_;
  Matrix x_;
  Vector y_;
};

enum class FamilyKind { PoissonLog, BernoulliLogit, GaussianIdentity };

struct FamilyValue {
  double loglik;
  double q1;
  double q2;
};

// Linear predictors are clamped to [-kPredictorBound, kPredictorBound]
// before any exponential.
inline constexpr double kPredictorBound = 35.0;

// Exponential family with canonical link. The Gaussian member uses unit
// dispersion.
class Family {
 public:
  explicit Family(FamilyKind kind) : kind_(kind) {}

  FamilyKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;

  bool valid_response(double y) const noexcept;
  double link(double mean) const;
  double inverse_link(double s) const noexcept;
  // l(m, y) evaluated at the mean m.
  double loglik(double mean, double y) const noexcept;
  // l(g^-1(s), y) without the response check.
  double loglik_at(double s, double y) const noexcept;
  // q1 and q2 without the response check (hot loops).
  void derivatives(double s, double y, double& q1, double& q2) const noexcept;

 private:
  FamilyKind kind_;
};

// Log-density and its first two derivatives in the linear predictor.
FamilyValue family_eval(const Family& family, double s, double y);

enum class KernelKind { Epanechnikov };

class Kernel {
 public:
  explicit Kernel(double bandwidth, KernelKind kind = KernelKind::Epanechnikov);

  KernelKind kind() const noexcept { return kind_; }
  double bandwidth() const noexcept { return h_; }
  // K(t), unscaled.
  static double profile(double t) noexcept {
    const double r = 1.0 - t * t;
    return r > 0.0 ? 0.75 * r : 0.0;
  }
  // K_h(t) = K(t / h) / h.
  double weight(double t) const noexcept { return profile(t / h_) / h_; }

 private:
  KernelKind kind_;
  double h_;
};

// K_h(t) for the Epanechnikov kernel; rejects non-finite t and h <= 0.
double kernel_weight(double t, double h);

// alpha(k, j) ~ a_j(U_k); beta(k, j) ~ a_j'(U_k).
struct CoefficientField {
  Matrix alpha;
  Matrix beta;
  double h = 1.0;

  Index n() const noexcept { return alpha.rows(); }
  Index d() const noexcept { return alpha.cols(); }

  // theta = (alpha_1', ..., alpha_d', h beta_1', ..., h beta_d')'.
  Vector stack() const;
  static CoefficientField unstack(const Vector& theta, Index n, Index d, double h);
};

enum class PenaltyKind { AdaptiveGroupLasso, GroupScad };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::GroupScad;
  double lambda = 0.0;       // lambda_3 or lambda_4
  double lambda_star = 0.0;  // lambda_3* or lambda_4*
  int kappa = 1;
  double a0 = 3.7;

  static PenaltySpec adaptive_group_lasso(double lambda, double lambda_star, int kappa = 1);
  static PenaltySpec group_scad(double lambda, double lambda_star, double a0 = 3.7);

  PenaltySpec with_lambdas(double l, double ls) const {
    PenaltySpec p = *this;
    p.lambda = l;
    p.lambda_star = ls;
    return p;
  }
  void validate() const;
  std::string_view name() const noexcept;
};

}  // namespace gsvcm
