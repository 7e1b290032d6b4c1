#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "pclqr/surrogate.hpp"
#include "pclqr/system.hpp"

namespace pclqr {

struct PointCost {
  double trace_cost = 0.0;
  Eigen::MatrixXd P;  // per-parameter Lyapunov solution
};

/// Closed-loop LQR cost Tr(P(K, xi)) at one fixed parameter value.
/// Throws NotHurwitzError when the closed loop is unstable at xi.
PointCost cost_at_xi(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     double xi);

struct TrueCostResult {
  double value = 0.0;        // grid_order-node Gauss-Legendre estimate
  double check_value = 0.0;  // 2*grid_order-node estimate
  double rel_change = 0.0;
  bool self_check_ok = false;  // rel_change <= 1e-8
};

/// Parameter-grid expectation of the per-parameter cost; the independent
/// oracle for the surrogate cost.
TrueCostResult true_cost(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         int grid_order);

/// Seeded Monte Carlo cross-check of true_cost; converges like 1/sqrt(samples)
/// and exists only to sanity-check the deterministic quadrature.
double true_cost_mc(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                    int samples, std::uint64_t seed);

struct AdmissibilitySweep {
  std::vector<double> abscissas;  // one per grid node
  bool admissible = false;        // Hurwitz at every node
  double worst_abscissa = 0.0;
};

AdmissibilitySweep admissibility_sweep(const ParametricSystem& sys,
                                       const Eigen::MatrixXd& K,
                                       const std::vector<double>& grid);

struct ConvergenceStudy {
  std::vector<int> orders;
  std::vector<double> surrogate_costs;  // NaN when K inadmissible at that N
  std::vector<bool> admissible;
  double reference_cost = 0.0;  // 64-node grid estimate
  std::vector<double> abs_errors;
};

/// Surrogate cost against the grid oracle over a range of expansion orders.
ConvergenceStudy convergence_study(const ParametricSystem& sys,
                                   const Eigen::MatrixXd& K,
                                   const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& R,
                                   const std::vector<int>& orders);

struct GradientCheck {
  double max_rel_error = 0.0;
  int entries_checked = 0;
  std::vector<std::pair<int, int>> skipped;  // entries leaving the admissible set
};

/// Central finite differences of the surrogate cost against the analytic
/// gradient; relative error per entry is |fd - g| / max(1, |g|).
GradientCheck gradient_check(const SurrogateModel& model,
                             const Eigen::MatrixXd& K, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, double h);

/// Uniform grid with `count` nodes spanning the system's interval.
std::vector<double> uniform_grid(const ParametricSystem& sys, int count);

}  // namespace pclqr
