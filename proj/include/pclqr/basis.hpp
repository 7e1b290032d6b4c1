#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>

namespace pclqr {

/// Orthonormal Legendre basis on an interval (lo, hi) under the uniform
/// probability measure: phi_0 == 1 and E[phi_i phi_j] = delta_ij.
struct LegendreBasis {
  int order = 0;  // highest polynomial degree N; basis vector has N+1 entries
  double lo = -1.0;
  double hi = 1.0;
};

/// Nodes and weights on (lo, hi). Weights sum to one, so weighted sums
/// realize expectations under Uniform(lo, hi).
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

LegendreBasis make_basis(int order, std::pair<double, double> interval);

/// m-node Gauss-Legendre rule mapped affinely onto the interval.
/// Exact for polynomials of degree <= 2m-1 against Uniform(lo, hi).
QuadratureRule gauss_rule(int num_nodes, std::pair<double, double> interval);

/// phi_N(xi) = [phi_0(xi), ..., phi_N(xi)]^T via the three-term recurrence.
/// Evaluation outside the interval is permitted.
Eigen::VectorXd eval_basis(const LegendreBasis& basis, double xi);

/// Matrix-valued function of the scalar parameter. Must be safe to call
/// concurrently (kernels evaluate it in parallel over quadrature nodes).
using MatrixFn = std::function<Eigen::MatrixXd(double)>;

/// E[phi_N(xi) phi_N(xi)^T (x) M(xi)] under the rule's discrete measure.
/// Block (i, j) of the result equals E[phi_i phi_j M(xi)]. Requires at
/// least N+1 nodes. Parallel over block pairs; each block accumulates its
/// quadrature sum in fixed node order, so results are independent of the
/// thread count and identical to the serial reference.
Eigen::MatrixXd project_outer_kron(const LegendreBasis& basis,
                                   const QuadratureRule& rule,
                                   const MatrixFn& fn);

/// Serial reference for project_outer_kron (same arithmetic order).
Eigen::MatrixXd project_outer_kron_serial(const LegendreBasis& basis,
                                          const QuadratureRule& rule,
                                          const MatrixFn& fn);

}  // namespace pclqr
