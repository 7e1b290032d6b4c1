#include "pclqr/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pclqr/linalg.hpp"

namespace pclqr {

namespace {

constexpr double kDivergenceFactor = 1e6;

Eigen::MatrixXd stabilizing_seed(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B) {
  // Sweep K = c B^T first.
  for (const double c : {1.0, 10.0, 100.0, 1000.0}) {
    const Eigen::MatrixXd K = c * B.transpose();
    if (is_hurwitz(A - B * K).hurwitz) return K;
  }
  // Shifted-Gramian seed: (A + beta I) W + W (A + beta I)^T = 2 B B^T with
  // beta above the spectral radius makes K = B^T W^{-1} stabilizing for
  // any controllable pair.
  const double beta = A.norm() + 1.0;
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd shifted =
      -(A + beta * Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd W =
      solve_lyapunov(shifted, 2.0 * B * B.transpose(), LyapunovSide::kPlain).P;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(W);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error(
        "no stabilizing seed gain found: the nominal pair looks "
        "uncontrollable; supply an explicit initial gain");
  }
  const Eigen::MatrixXd K = ldlt.solve(B).transpose();
  if (!is_hurwitz(A - B * K).hurwitz) {
    throw std::runtime_error(
        "no stabilizing seed gain found for the nominal pair; supply an "
        "explicit initial gain");
  }
  return K;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(grad_tol > 0.0)) {
    throw std::invalid_argument("gradient tolerance must be positive");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (record_every < 1) {
    throw std::invalid_argument("record_every must be positive");
  }
  if (line_search == LineSearch::kArmijo) {
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
      throw std::invalid_argument("armijo_c must lie in (0, 1)");
    }
    if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
      throw std::invalid_argument("armijo_shrink must lie in (0, 1)");
    }
  }
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kMaxIters:
      return "max_iters";
    case Termination::kStepRejected:
      return "step_rejected";
  }
  return "unknown";
}

Eigen::MatrixXd initial_gain(const ParametricSystem& sys,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R) {
  const double xi_bar = sys.midpoint();
  const Eigen::MatrixXd A0 = sys.A(xi_bar);
  const Eigen::MatrixXd B0 = sys.B(xi_bar);
  if (B0.norm() == 0.0) {
    throw std::invalid_argument(
        "B(xi_bar) is zero; the nominal pair is unstabilizable");
  }
  const Eigen::MatrixXd seed = stabilizing_seed(A0, B0);
  return kleinman_care(A0, B0, Q, R, seed).gain;
}

Eigen::MatrixXd initial_gain(const ParametricSystem& sys,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R,
                             const SurrogateModel& model) {
  const Eigen::MatrixXd K0 = initial_gain(sys, Q, R);
  const SpectralInfo info = is_hurwitz(closed_loop(model, K0));
  if (!info.hurwitz) {
    throw NotHurwitzError(
        "nominal gain does not stabilize the order-" +
            std::to_string(model.order) +
            " surrogate (abscissa = " + std::to_string(info.abscissa) +
            "); supply an explicit initial gain",
        info.abscissa);
  }
  return K0;
}

OptimizationReport optimize(const SurrogateModel& model,
                            const Eigen::MatrixXd& K0,
                            const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& R,
                            const OptimizerConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  OptimizationReport report;
  Eigen::MatrixXd K = K0;
  CostEvaluation eval = evaluate(model, K, Q, R);  // throws if inadmissible
  const double initial_cost = eval.cost;

  auto record = [&](int iter, double grad_norm, double step_taken) {
    report.iterates.push_back({iter, eval.cost, grad_norm, step_taken,
                               eval.hurwitz_margin});
  };
  auto finish = [&](int iter, double grad_norm, Termination why) {
    if (report.iterates.empty() || report.iterates.back().iter != iter) {
      record(iter, grad_norm, 0.0);
    }
    report.final_gain = K;
    report.final_cost = eval.cost;
    report.final_grad_norm = grad_norm;
    report.termination = why;
    report.total_iterations = iter;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return report;
  };

  for (int k = 0; k < cfg.max_iters; ++k) {
    const double grad_norm = eval.gradient.norm();
    if (grad_norm <= cfg.grad_tol) {
      return finish(k, grad_norm, Termination::kConverged);
    }
    if (eval.cost > kDivergenceFactor * initial_cost) {
      report.diagnostics = "cost exceeded 1e6 x initial cost";
      return finish(k, grad_norm, Termination::kStepRejected);
    }

    double step = cfg.step;
    Eigen::MatrixXd K_next;
    CostEvaluation eval_next;
    if (cfg.line_search == LineSearch::kFixed) {
      K_next = K - step * eval.gradient;
      try {
        eval_next = evaluate(model, K_next, Q, R);
      } catch (const NotHurwitzError& e) {
        report.diagnostics =
            "fixed-step candidate left the admissible set (abscissa = " +
            std::to_string(e.abscissa()) + ")";
        return finish(k, grad_norm, Termination::kStepRejected);
      }
      // Increases below the rounding noise of the cost itself do not count
      // as cost-increasing; strict rejection would otherwise fire spuriously
      // when per-step decrements shrink under one ulp.
      const double noise_band = 32.0 *
                                std::numeric_limits<double>::epsilon() *
                                (1.0 + std::abs(eval.cost));
      if (eval_next.cost > eval.cost + noise_band) {
        report.diagnostics = "fixed-step candidate increased the cost from " +
                             std::to_string(eval.cost) + " to " +
                             std::to_string(eval_next.cost);
        return finish(k, grad_norm, Termination::kStepRejected);
      }
    } else {
      bool accepted = false;
      while (step > 1e-20) {
        K_next = K - step * eval.gradient;
        bool admissible = true;
        try {
          eval_next = evaluate(model, K_next, Q, R);
        } catch (const NotHurwitzError&) {
          admissible = false;
        }
        if (admissible &&
            eval_next.cost <=
                eval.cost - cfg.armijo_c * step * grad_norm * grad_norm) {
          accepted = true;
          break;
        }
        step *= cfg.armijo_shrink;
      }
      if (!accepted) {
        report.diagnostics = "line search failed to find an acceptable step";
        return finish(k, grad_norm, Termination::kStepRejected);
      }
    }

    if (k % cfg.record_every == 0) {
      record(k, grad_norm, step);
    }
    K = std::move(K_next);
    eval = std::move(eval_next);
  }
  return finish(cfg.max_iters, eval.gradient.norm(), Termination::kMaxIters);
}

}  // namespace pclqr
