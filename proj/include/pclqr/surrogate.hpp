#pragma once

#include <Eigen/Dense>

#include "pclqr/basis.hpp"
#include "pclqr/linalg.hpp"
#include "pclqr/system.hpp"

namespace pclqr {

/// Deterministic lifted stand-in for the stochastic plant: block matrices
/// A_lift = E[phi phi^T (x) A(xi)], B_lift = E[phi phi^T (x) B(xi)], and the
/// selector [I; 0; ...; 0] injecting the physical initial state.
struct SurrogateModel {
  Eigen::MatrixXd A_lift;  // (N+1)n_x square
  Eigen::MatrixXd B_lift;  // (N+1)n_x by (N+1)n_u
  int order = 0;
  int n_x = 0;
  int n_u = 0;

  int lifted_dim() const { return (order + 1) * n_x; }
  Eigen::MatrixXd selector() const;  // (N+1)n_x by n_x
};

SurrogateModel build_surrogate(const ParametricSystem& sys, int order,
                               const QuadratureRule& rule);

/// Picks the default quadrature rule for the system: N + ceil(d/2) + 2 nodes
/// when the polynomial degree d is declared; otherwise 2N+16 nodes with a
/// doubling self-check on the lifted matrices.
SurrogateModel build_surrogate(const ParametricSystem& sys, int order);

int default_quadrature_order(const ParametricSystem& sys, int order);

/// A_lift - B_lift (I (x) K), computed blockwise.
Eigen::MatrixXd closed_loop(const SurrogateModel& model,
                            const Eigen::MatrixXd& K);

struct CostEvaluation {
  double cost = 0.0;        // Tr(P_lift selector selector^T)
  Eigen::MatrixXd P_lift;   // solution of the transposed lifted Lyapunov eq.
  Eigen::MatrixXd Y_lift;   // solution of the plain lifted Lyapunov eq.
  Eigen::MatrixXd gradient; // n_u by n_x
  double hurwitz_margin = 0.0;  // spectral abscissa of the lifted closed loop
};

/// Cost, Lyapunov solutions, and gradient of the surrogate LQR cost at K.
/// Throws NotHurwitzError when the lifted closed loop is not admissible.
CostEvaluation evaluate(const SurrogateModel& model, const Eigen::MatrixXd& K,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Action of the Hessian of the surrogate cost on a direction E.
double hessian_action(const SurrogateModel& model, const Eigen::MatrixXd& K,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                      const Eigen::MatrixXd& E);

/// Sum of the diagonal blocks of a block matrix with blocks of the
/// given shape.
Eigen::MatrixXd block_trace(const Eigen::MatrixXd& M, int block_rows,
                            int block_cols);

}  // namespace pclqr
