#include "pclqr/surrogate.hpp"

#include <cmath>
#include <stdexcept>

namespace pclqr {

namespace {

void check_gain_shape(const SurrogateModel& model, const Eigen::MatrixXd& K) {
  if (K.rows() != model.n_u || K.cols() != model.n_x) {
    throw std::invalid_argument("gain must be n_u x n_x (" +
                                std::to_string(model.n_u) + " x " +
                                std::to_string(model.n_x) + ")");
  }
  if (!K.allFinite()) {
    throw std::invalid_argument("gain has non-finite entries");
  }
}

void check_weights(const SurrogateModel& model, const Eigen::MatrixXd& Q,
                   const Eigen::MatrixXd& R) {
  if (Q.rows() != model.n_x || Q.cols() != model.n_x) {
    throw std::invalid_argument("Q must be n_x x n_x");
  }
  if (R.rows() != model.n_u || R.cols() != model.n_u) {
    throw std::invalid_argument("R must be n_u x n_u");
  }
}

// I_{N+1} (x) W, for square W.
Eigen::MatrixXd kron_identity_diag(int blocks, const Eigen::MatrixXd& W) {
  const Eigen::Index n = W.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(blocks * n, blocks * n);
  for (int i = 0; i < blocks; ++i) out.block(i * n, i * n, n, n) = W;
  return out;
}

struct LiftedSolves {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Y;
};

LiftedSolves solve_lifted(const SurrogateModel& model,
                          const SchurLyapunovSolver& solver,
                          const Eigen::MatrixXd& K, const Eigen::MatrixXd& Q,
                          const Eigen::MatrixXd& R) {
  const int blocks = model.order + 1;
  Eigen::MatrixXd W = Q + K.transpose() * R * K;
  W = 0.5 * (W + W.transpose());
  const Eigen::MatrixXd forcing_p = kron_identity_diag(blocks, W);
  Eigen::MatrixXd forcing_y =
      Eigen::MatrixXd::Zero(model.lifted_dim(), model.lifted_dim());
  forcing_y.topLeftCorner(model.n_x, model.n_x) =
      Eigen::MatrixXd::Identity(model.n_x, model.n_x);

  LiftedSolves out;
  out.P = solver.solve(forcing_p, LyapunovSide::kTransposed).P;
  out.Y = solver.solve(forcing_y, LyapunovSide::kPlain).P;
  return out;
}

}  // namespace

Eigen::MatrixXd SurrogateModel::selector() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(lifted_dim(), n_x);
  s.topLeftCorner(n_x, n_x) = Eigen::MatrixXd::Identity(n_x, n_x);
  return s;
}

SurrogateModel build_surrogate(const ParametricSystem& sys, int order,
                               const QuadratureRule& rule) {
  const LegendreBasis basis = make_basis(order, sys.interval);
  SurrogateModel model;
  model.order = order;
  model.n_x = sys.n_x;
  model.n_u = sys.n_u;
  model.A_lift = project_outer_kron(basis, rule, sys.A);
  model.B_lift = project_outer_kron(basis, rule, sys.B);
  if (model.A_lift.rows() != (order + 1) * sys.n_x ||
      model.B_lift.cols() != (order + 1) * sys.n_u) {
    throw std::invalid_argument(
        "system matrices do not match the declared dimensions");
  }
  return model;
}

int default_quadrature_order(const ParametricSystem& sys, int order) {
  if (sys.declared_degree) {
    const int d = *sys.declared_degree;
    return order + (d + 1) / 2 + 2;
  }
  return 2 * order + 16;
}

SurrogateModel build_surrogate(const ParametricSystem& sys, int order) {
  const int m = default_quadrature_order(sys, order);
  SurrogateModel model = build_surrogate(sys, order, gauss_rule(m, sys.interval));
  if (!sys.declared_degree) {
    // Non-polynomial entries: doubling self-check on the lifted matrices.
    const SurrogateModel check =
        build_surrogate(sys, order, gauss_rule(2 * m, sys.interval));
    const double da =
        (model.A_lift - check.A_lift).norm() / (1.0 + check.A_lift.norm());
    const double db =
        (model.B_lift - check.B_lift).norm() / (1.0 + check.B_lift.norm());
    if (da > 1e-10 || db > 1e-10) {
      throw std::runtime_error(
          "quadrature self-check failed: lifted matrices changed by " +
          std::to_string(std::max(da, db)) +
          " when doubling the rule; supply an explicit rule");
    }
  }
  return model;
}

Eigen::MatrixXd closed_loop(const SurrogateModel& model,
                            const Eigen::MatrixXd& K) {
  check_gain_shape(model, K);
  const int blocks = model.order + 1;
  Eigen::MatrixXd Ac = model.A_lift;
  for (int i = 0; i < blocks; ++i) {
    for (int j = 0; j < blocks; ++j) {
      Ac.block(i * model.n_x, j * model.n_x, model.n_x, model.n_x).noalias() -=
          model.B_lift.block(i * model.n_x, j * model.n_u, model.n_x,
                             model.n_u) *
          K;
    }
  }
  return Ac;
}

Eigen::MatrixXd block_trace(const Eigen::MatrixXd& M, int block_rows,
                            int block_cols) {
  if (block_rows <= 0 || block_cols <= 0 || M.rows() % block_rows != 0 ||
      M.cols() % block_cols != 0 ||
      M.rows() / block_rows != M.cols() / block_cols) {
    throw std::invalid_argument("matrix does not tile into the given blocks");
  }
  const Eigen::Index nb = M.rows() / block_rows;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block_rows, block_cols);
  for (Eigen::Index i = 0; i < nb; ++i) {
    out += M.block(i * block_rows, i * block_cols, block_rows, block_cols);
  }
  return out;
}

CostEvaluation evaluate(const SurrogateModel& model, const Eigen::MatrixXd& K,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  check_gain_shape(model, K);
  check_weights(model, Q, R);

  const Eigen::MatrixXd Ac = closed_loop(model, K);
  const SchurLyapunovSolver solver(Ac);
  if (!solver.hurwitz()) {
    throw NotHurwitzError(
        "gain is not admissible for the surrogate: lifted closed-loop "
        "spectral abscissa = " +
            std::to_string(solver.abscissa()),
        solver.abscissa());
  }

  const LiftedSolves sol = solve_lifted(model, solver, K, Q, R);

  CostEvaluation eval;
  eval.P_lift = sol.P;
  eval.Y_lift = sol.Y;
  eval.hurwitz_margin = solver.abscissa();
  eval.cost = sol.P.topLeftCorner(model.n_x, model.n_x).trace();

  // grad = 2 [ RK sum_i [Y]_ii - sum_{i,j} [H]_ij [Y]_ji ], H = B^T P.
  const Eigen::MatrixXd y_diag = block_trace(sol.Y, model.n_x, model.n_x);
  const Eigen::MatrixXd H = model.B_lift.transpose() * sol.P;
  const Eigen::MatrixXd HY = block_trace(H * sol.Y, model.n_u, model.n_x);
  eval.gradient = 2.0 * (R * K * y_diag - HY);
  return eval;
}

double hessian_action(const SurrogateModel& model, const Eigen::MatrixXd& K,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                      const Eigen::MatrixXd& E) {
  check_gain_shape(model, K);
  check_weights(model, Q, R);
  if (E.rows() != model.n_u || E.cols() != model.n_x) {
    throw std::invalid_argument("direction must be n_u x n_x");
  }

  const Eigen::MatrixXd Ac = closed_loop(model, K);
  const SchurLyapunovSolver solver(Ac);
  if (!solver.hurwitz()) {
    throw NotHurwitzError(
        "gain is not admissible for the surrogate: lifted closed-loop "
        "spectral abscissa = " +
            std::to_string(solver.abscissa()),
        solver.abscissa());
  }
  const LiftedSolves sol = solve_lifted(model, solver, K, Q, R);

  const int blocks = model.order + 1;
  // E_N = I (x) RK - B^T P, and the lifted direction I (x) E.
  Eigen::MatrixXd e_lift = -(model.B_lift.transpose() * sol.P);
  const Eigen::MatrixXd RK = R * K;
  for (int i = 0; i < blocks; ++i) {
    e_lift.block(i * model.n_u, i * model.n_x, model.n_u, model.n_x) += RK;
  }
  Eigen::MatrixXd dir_lift =
      Eigen::MatrixXd::Zero(blocks * model.n_u, blocks * model.n_x);
  for (int i = 0; i < blocks; ++i) {
    dir_lift.block(i * model.n_u, i * model.n_x, model.n_u, model.n_x) = E;
  }

  const Eigen::MatrixXd cross = dir_lift.transpose() * e_lift;
  const Eigen::MatrixXd forcing = cross + cross.transpose();
  const Eigen::MatrixXd P_prime =
      solver.solve(forcing, LyapunovSide::kTransposed).P;

  const Eigen::MatrixXd y_diag = block_trace(sol.Y, model.n_x, model.n_x);
  const double term1 = 2.0 * (E.transpose() * R * E * y_diag).trace();
  const Eigen::MatrixXd BPY = block_trace(
      model.B_lift.transpose() * P_prime * sol.Y, model.n_u, model.n_x);
  const double term2 = 4.0 * (E.transpose() * BPY).trace();
  return term1 - term2;
}

}  // namespace pclqr
