#pragma once

// Kernel-weighted local log-likelihood at a fitting point and its first two
// derivatives in the local coefficients v = (a, h b).

#include "gsvcm/core.hpp"

#include <vector>

namespace gsvcm {

// Observations inside the kernel support of one fitting point. Rows outside
// the support carry zero weight and are omitted.
struct LocalDesign {
  double center = 0.0;
  double h = 1.0;
  Index n = 0;                // full sample size (the 1/n normaliser)
  std::vector<Index> rows;    // observations with positive weight
  Vector weights;             // K_h(U_i - center) for each row
  Vector offsets;             // (U_i - center) / h for each row
  Matrix z;                   // row r = (X_i', offsets[r] X_i')

  static LocalDesign at(const Dataset& data, const Kernel& kernel, double center);
  static LocalDesign at_point(const Dataset& data, const Kernel& kernel, Index k) {
    return at(data, kernel, data.u()[k]);
  }

  Index size() const noexcept { return static_cast<Index>(rows.size()); }
  Index params() const noexcept { return z.cols(); }
  // Weight vector over all n observations.
  Vector full_weights() const;
};

// Log-likelihood, score and negated Hessian evaluated together.
struct LocalExpansion {
  double loglik = 0.0;
  Vector score;
  Matrix neg_hessian;
};

// v = (a, h b), length 2d.
double local_loglik(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v);
Vector local_score(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v);
Matrix local_hessian(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v);
LocalExpansion local_expand(const Dataset& data, const Family& family, const LocalDesign& design,
                            const Vector& v);

// Same quantities addressed by fitting point index and unscaled (a_k, b_k).
double local_loglik(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                    const Vector& a, const Vector& b);
Vector local_score(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                   const Vector& a, const Vector& b);
Matrix local_hessian(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                     const Vector& a, const Vector& b);

// (a, h b) packed into one vector.
Vector pack_local(const Vector& a, const Vector& b, double h);

}  // namespace gsvcm
