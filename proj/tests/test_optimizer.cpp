#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pclqr/optimizer.hpp"
#include "pclqr/presets.hpp"
#include "pclqr/validation.hpp"
#include "test_support.hpp"

using namespace pclqr;

namespace {

ParametricSystem scalar_system() {
  PolynomialMatrix a, b;
  a.coeffs = {Eigen::MatrixXd::Constant(1, 1, -1.0)};
  b.coeffs = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
  return make_polynomial_system(a, b, {-1.0, 1.0});
}

const Eigen::MatrixXd kOne = Eigen::MatrixXd::Identity(1, 1);

}  // namespace

TEST_CASE("initial_gain solves the nominal scalar problem") {
  const Eigen::MatrixXd k0 = initial_gain(scalar_system(), kOne, kOne);
  CHECK(k0(0, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-10));
}

TEST_CASE("initial_gain stabilizes the lifted 2-state example up to order 8") {
  const Preset preset = illustrative_preset();
  const ParametricSystem sys = preset.system();
  for (int order : {1, 3, 5, 8}) {
    const SurrogateModel model = build_surrogate(sys, order);
    const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
    CHECK(is_hurwitz(closed_loop(model, k0)).hurwitz);
  }
}

TEST_CASE("initial_gain covers the velocity-feedback-resistant chain") {
  // The mass-spring chain's rigid-body mode defeats the c B^T sweep, so the
  // shifted-Gramian seed has to kick in.
  const Preset preset = mass_spring_preset();
  const ParametricSystem sys = preset.system();
  const SurrogateModel model = build_surrogate(sys, 5);
  const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
  CHECK(is_hurwitz(closed_loop(model, k0)).hurwitz);
}

TEST_CASE("initial_gain rejects an unstabilizable pair") {
  PolynomialMatrix a, b;
  a.coeffs = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
  b.coeffs = {Eigen::MatrixXd::Zero(1, 1)};
  const ParametricSystem sys = make_polynomial_system(a, b, {-1.0, 1.0});
  CHECK_THROWS_AS(initial_gain(sys, kOne, kOne), std::invalid_argument);
}

TEST_CASE("optimize converges to the scalar Riccati optimum") {
  const ParametricSystem sys = scalar_system();
  const SurrogateModel model = build_surrogate(sys, 2);
  OptimizerConfig cfg;
  cfg.step = 0.1;
  cfg.grad_tol = 1e-8;
  cfg.max_iters = 20000;
  const OptimizationReport report =
      optimize(model, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, cfg);
  CHECK(report.termination == Termination::kConverged);
  CHECK(report.final_gain(0, 0) ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-7));
  CHECK(report.final_cost ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-9));
  CHECK(report.final_grad_norm <= 1e-8);

  // Accepted steps never increase the cost beyond rounding noise.
  for (std::size_t i = 1; i < report.iterates.size(); ++i) {
    CHECK(report.iterates[i].cost <=
          report.iterates[i - 1].cost + 1e-13 * (1.0 + report.iterates[i].cost));
    CHECK(report.iterates[i].abscissa < 0.0);
  }
}

TEST_CASE("zero gradient at K0 returns immediately") {
  const SurrogateModel model = build_surrogate(scalar_system(), 1);
  OptimizerConfig cfg;
  cfg.grad_tol = 1e-6;
  const OptimizationReport report = optimize(
      model, Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0) - 1.0), kOne,
      kOne, cfg);
  CHECK(report.termination == Termination::kConverged);
  CHECK(report.total_iterations == 0);
}

TEST_CASE("inadmissible K0 throws") {
  const SurrogateModel model = build_surrogate(scalar_system(), 1);
  OptimizerConfig cfg;
  CHECK_THROWS_AS(
      optimize(model, Eigen::MatrixXd::Constant(1, 1, -5.0), kOne, kOne, cfg),
      NotHurwitzError);
}

TEST_CASE("fixed mode rejects a destabilizing step without shrinking") {
  const SurrogateModel model = build_surrogate(scalar_system(), 1);
  OptimizerConfig cfg;
  cfg.step = 50.0;  // overshoots into the unstable half line
  cfg.grad_tol = 1e-12;
  const OptimizationReport report =
      optimize(model, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, cfg);
  CHECK(report.termination == Termination::kStepRejected);
  CHECK_FALSE(report.diagnostics.empty());
  // The final gain stays at the last admissible iterate.
  CHECK(report.final_gain(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("armijo mode shrinks through the same overshoot and converges") {
  const SurrogateModel model = build_surrogate(scalar_system(), 1);
  OptimizerConfig cfg;
  cfg.step = 50.0;
  cfg.grad_tol = 1e-8;
  cfg.line_search = LineSearch::kArmijo;
  cfg.max_iters = 5000;
  const OptimizationReport report =
      optimize(model, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, cfg);
  CHECK(report.termination == Termination::kConverged);
  CHECK(report.final_gain(0, 0) ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-6));
  for (std::size_t i = 1; i < report.iterates.size(); ++i) {
    CHECK(report.iterates[i].cost <= report.iterates[i - 1].cost);
  }
}

TEST_CASE("max_iters termination is reported") {
  const SurrogateModel model = build_surrogate(scalar_system(), 1);
  OptimizerConfig cfg;
  cfg.step = 1e-4;
  cfg.grad_tol = 1e-12;
  cfg.max_iters = 3;
  const OptimizationReport report =
      optimize(model, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, cfg);
  CHECK(report.termination == Termination::kMaxIters);
  CHECK(report.total_iterations == 3);
}

TEST_CASE("config validation") {
  OptimizerConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.grad_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.line_search = LineSearch::kArmijo;
  cfg.armijo_c = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("stationarity and local positivity at a converged gain") {
  const Preset preset = illustrative_preset();
  const ParametricSystem sys = preset.system();
  const SurrogateModel model = build_surrogate(sys, 3);
  OptimizerConfig cfg = preset.optimizer;
  cfg.grad_tol = 1e-4;
  const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
  const OptimizationReport report =
      optimize(model, k0, preset.Q, preset.R, cfg);
  REQUIRE(report.termination == Termination::kConverged);
  CHECK(report.final_grad_norm <= 1e-4);

  // Finite differences agree with the (near-zero) gradient here too.
  const GradientCheck gc =
      gradient_check(model, report.final_gain, preset.Q, preset.R,
                     1e-6 * (1.0 + report.final_gain.norm()));
  CHECK(gc.max_rel_error <= 1e-4);

  auto rng = testsup::make_rng(73);
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd e = testsup::random_matrix(rng, 2, 2);
    e /= e.norm();
    CHECK(hessian_action(model, report.final_gain, preset.Q, preset.R, e) >=
          -1e-6);
  }
}
