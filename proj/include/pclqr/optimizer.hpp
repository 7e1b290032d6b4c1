#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pclqr/surrogate.hpp"
#include "pclqr/system.hpp"

namespace pclqr {

enum class LineSearch { kFixed, kArmijo };

struct OptimizerConfig {
  double step = 1e-2;       // eta
  double grad_tol = 1e-3;   // stop when ||grad||_F <= grad_tol
  int max_iters = 50000;
  LineSearch line_search = LineSearch::kFixed;
  double armijo_c = 1e-4;       // sufficient-decrease constant, in (0,1)
  double armijo_shrink = 0.5;   // backtracking factor, in (0,1)
  int record_every = 1;

  void validate() const;
};

enum class Termination { kConverged, kMaxIters, kStepRejected };

const char* to_string(Termination t);

struct OptimizationReport {
  struct Iterate {
    int iter = 0;
    double cost = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;      // step taken from this iterate (0 for the last)
    double abscissa = 0.0;  // lifted closed-loop spectral abscissa
  };

  std::vector<Iterate> iterates;
  Eigen::MatrixXd final_gain;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  Termination termination = Termination::kMaxIters;
  int total_iterations = 0;
  double wall_time_seconds = 0.0;
  std::string diagnostics;  // populated on step rejection
};

/// Nominal initial gain: Kleinman-Newton LQR at the interval midpoint,
/// seeded by K = c B^T for c in {1, 10, 100, 1000}, then by a shifted-Gramian
/// seed when no sweep value stabilizes.
Eigen::MatrixXd initial_gain(const ParametricSystem& sys,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R);

/// As above, and verifies the gain stabilizes the lifted closed loop of the
/// given surrogate. Throws NotHurwitzError otherwise.
Eigen::MatrixXd initial_gain(const ParametricSystem& sys,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R,
                             const SurrogateModel& model);

/// Gradient descent K <- K - eta grad on the surrogate cost. Fixed mode
/// terminates with kStepRejected when a candidate is inadmissible or
/// increases the cost; Armijo mode backtracks instead. Throws
/// NotHurwitzError when K0 is inadmissible.
OptimizationReport optimize(const SurrogateModel& model,
                            const Eigen::MatrixXd& K0,
                            const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& R,
                            const OptimizerConfig& cfg);

}  // namespace pclqr
