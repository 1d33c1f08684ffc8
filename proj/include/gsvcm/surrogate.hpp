#pragma once

// Stacked quadratic surrogate of the local log-likelihood around the
// preliminary fit, written as the least-squares form 0.5 |eta - H theta|^2.
//
// Parameters are carried in two orders. The per-point order lists
// (a_1', h b_1', ..., a_n', h b_n'); the group order is
// theta = (alpha_1', ..., alpha_d', h beta_1', ..., h beta_d'). Inside the
// library theta is held as an n x 2d matrix whose column g is group g, which
// is exactly the group-ordered vector viewed column-major.
//
// H is never formed. It is block diagonal in the per-point order with blocks
// C_k (upper triangular, C_k' C_k = -L''_k + jitter_k I), so every product
// with a group column H_g decomposes over fitting points and H_g' H_g is
// diagonal.

#include "gsvcm/core.hpp"
#include "gsvcm/preliminary.hpp"

#include <vector>

namespace gsvcm {

// Index map realising the transformation matrix T.
struct Transform {
  Index n = 0;
  Index d = 0;
  std::vector<Index> to_group;  // per-point position -> group-order position

  Vector to_group_order(const Vector& per_point) const;
  Vector to_point_order(const Vector& grouped) const;
};

Transform build_transform(Index n, Index d);

struct QuadraticSurrogate {
  Index n = 0;
  Index d = 0;
  double h = 1.0;
  std::vector<Matrix> factor;     // C_k
  std::vector<Matrix> curvature;  // C_k' C_k
  Matrix score;                   // 2d x n, column k = L'_k at the expansion point
  Matrix expansion;               // n x 2d, theta-tilde in matrix form
  Matrix eta;                     // 2d x n, column k = eta block of point k
  Matrix diagonal;                // n x 2d, entry (k, g) = C_k' C_k (g, g)
  Vector jitter;                  // per point, absolute amount added to the diagonal
  Transform transform;
  double offset = 0.0;            // 0.5 |eta - H theta_tilde|^2

  Index groups() const noexcept { return 2 * d; }

  // 0.5 |eta - H theta|^2 with theta in matrix form.
  double loss(const Matrix& theta) const;
  // H' (eta - H theta) in matrix form.
  Matrix gradient(const Matrix& theta) const;
  // H theta in per-point order.
  Vector apply(const Matrix& theta) const;
  // eta in per-point order.
  Vector eta_vector() const;
  // Dense H, rows in per-point order, columns in group order. Small n d only.
  Matrix dense_h() const;

  Matrix to_matrix(const Vector& theta) const;
  Vector to_vector(const Matrix& theta) const;
};

QuadraticSurrogate build_surrogate(const Dataset& data, const Family& family, const Kernel& kernel,
                                   const PreliminaryFit& pre, unsigned threads = 1);

// Same construction from an explicit expansion field.
QuadraticSurrogate build_surrogate(const Dataset& data, const Family& family, const Kernel& kernel,
                                   const CoefficientField& expansion, unsigned threads = 1);

}  // namespace gsvcm
