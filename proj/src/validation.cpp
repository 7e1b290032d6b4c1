#include "pclqr/validation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pclqr/linalg.hpp"

namespace pclqr {

namespace {

double quadrature_cost(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       int grid_order) {
  const QuadratureRule rule = gauss_rule(grid_order, sys.interval);
  const int m = static_cast<int>(rule.nodes.size());
  std::vector<double> traces(m, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < m; ++q) {
    try {
      traces[q] = cost_at_xi(sys, K, Q, R, rule.nodes(q)).trace_cost;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  // Fixed-order reduction keeps the result independent of the thread count.
  double total = 0.0;
  for (int q = 0; q < m; ++q) total += rule.weights(q) * traces[q];
  return total;
}

}  // namespace

PointCost cost_at_xi(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     double xi) {
  const Eigen::MatrixXd Acl = sys.closed_loop_at(xi, K);
  const SchurLyapunovSolver solver(Acl);
  if (!solver.hurwitz()) {
    throw NotHurwitzError("closed loop is not Hurwitz at xi = " +
                              std::to_string(xi) + " (abscissa = " +
                              std::to_string(solver.abscissa()) + ")",
                          solver.abscissa());
  }
  Eigen::MatrixXd W = Q + K.transpose() * R * K;
  W = 0.5 * (W + W.transpose());
  PointCost out;
  out.P = solver.solve(W, LyapunovSide::kTransposed).P;
  out.trace_cost = out.P.trace();
  return out;
}

TrueCostResult true_cost(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         int grid_order) {
  if (grid_order < 1) {
    throw std::invalid_argument("grid order must be positive");
  }
  TrueCostResult result;
  result.value = quadrature_cost(sys, K, Q, R, grid_order);
  result.check_value = quadrature_cost(sys, K, Q, R, 2 * grid_order);
  result.rel_change = std::abs(result.value - result.check_value) /
                      (1.0 + std::abs(result.check_value));
  result.self_check_ok = result.rel_change <= 1e-8;
  return result;
}

double true_cost_mc(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                    int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(sys.interval.first,
                                              sys.interval.second);
  std::vector<double> draws(samples);
  for (int i = 0; i < samples; ++i) draws[i] = dist(rng);

  std::vector<double> traces(samples, 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < samples; ++i) {
    try {
      traces[i] = cost_at_xi(sys, K, Q, R, draws[i]).trace_cost;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  double total = 0.0;
  for (int i = 0; i < samples; ++i) total += traces[i];
  return total / samples;
}

AdmissibilitySweep admissibility_sweep(const ParametricSystem& sys,
                                       const Eigen::MatrixXd& K,
                                       const std::vector<double>& grid) {
  AdmissibilitySweep sweep;
  const int m = static_cast<int>(grid.size());
  sweep.abscissas.assign(m, 0.0);
#pragma omp parallel for schedule(static)
  for (int q = 0; q < m; ++q) {
    sweep.abscissas[q] = is_hurwitz(sys.closed_loop_at(grid[q], K)).abscissa;
  }
  sweep.worst_abscissa = -std::numeric_limits<double>::infinity();
  for (double a : sweep.abscissas) {
    sweep.worst_abscissa = std::max(sweep.worst_abscissa, a);
  }
  sweep.admissible = sweep.worst_abscissa < -kHurwitzMargin;
  return sweep;
}

ConvergenceStudy convergence_study(const ParametricSystem& sys,
                                   const Eigen::MatrixXd& K,
                                   const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& R,
                                   const std::vector<int>& orders) {
  ConvergenceStudy study;
  study.orders = orders;
  study.reference_cost = true_cost(sys, K, Q, R, 64).value;
  for (int order : orders) {
    const SurrogateModel model = build_surrogate(sys, order);
    try {
      const CostEvaluation eval = evaluate(model, K, Q, R);
      study.surrogate_costs.push_back(eval.cost);
      study.admissible.push_back(true);
      study.abs_errors.push_back(std::abs(study.reference_cost - eval.cost));
    } catch (const NotHurwitzError&) {
      study.surrogate_costs.push_back(
          std::numeric_limits<double>::quiet_NaN());
      study.admissible.push_back(false);
      study.abs_errors.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return study;
}

GradientCheck gradient_check(const SurrogateModel& model,
                             const Eigen::MatrixXd& K, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const CostEvaluation base = evaluate(model, K, Q, R);

  const int entries = model.n_u * model.n_x;
  std::vector<double> rel_errors(entries, 0.0);
  std::vector<char> skipped(entries, 0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < entries; ++e) {
    const int r = e / model.n_x;
    const int c = e % model.n_x;
    Eigen::MatrixXd Kp = K, Km = K;
    Kp(r, c) += h;
    Km(r, c) -= h;
    try {
      const double jp = evaluate(model, Kp, Q, R).cost;
      const double jm = evaluate(model, Km, Q, R).cost;
      const double fd = (jp - jm) / (2.0 * h);
      const double g = base.gradient(r, c);
      rel_errors[e] = std::abs(fd - g) / std::max(1.0, std::abs(g));
    } catch (const NotHurwitzError&) {
      skipped[e] = 1;
    }
  }

  GradientCheck check;
  for (int e = 0; e < entries; ++e) {
    if (skipped[e]) {
      check.skipped.emplace_back(e / model.n_x, e % model.n_x);
    } else {
      check.max_rel_error = std::max(check.max_rel_error, rel_errors[e]);
      ++check.entries_checked;
    }
  }
  return check;
}

std::vector<double> uniform_grid(const ParametricSystem& sys, int count) {
  if (count < 2) throw std::invalid_argument("grid needs at least two nodes");
  std::vector<double> grid(count);
  const double lo = sys.interval.first, hi = sys.interval.second;
  for (int i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return grid;
}

}  // namespace pclqr
