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

Eigen::MatrixXd published_gain() {
  Eigen::MatrixXd kp(2, 2);
  kp << 1.25, -0.10, -0.82, 1.97;
  return kp;
}

}  // namespace

TEST_CASE("cost_at_xi on the parameter-free plant") {
  const ParametricSystem sys = scalar_system();
  for (double xi : {-0.9, 0.0, 0.7}) {
    const PointCost pc =
        cost_at_xi(sys, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, xi);
    CHECK(pc.trace_cost == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cost_at_xi(sys, Eigen::MatrixXd::Constant(1, 1, -3.0), kOne,
                             kOne, 0.0),
                  NotHurwitzError);
}

TEST_CASE("true_cost has a closed-form oracle on dx = xi x + u") {
  PolynomialMatrix a, b;
  a.coeffs = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 1.0)};
  b.coeffs = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
  const ParametricSystem sys = make_polynomial_system(a, b, {-1.0, 0.0});
  // K = 2: integrand 5 / (2 (2 - xi)); the exact mean is (5/2) ln(3/2).
  const TrueCostResult res =
      true_cost(sys, Eigen::MatrixXd::Constant(1, 1, 2.0), kOne, kOne, 32);
  CHECK(res.value == doctest::Approx(2.5 * std::log(1.5)).epsilon(1e-10));
  CHECK(res.self_check_ok);
}

TEST_CASE("true_cost of a deterministic system equals the nominal cost") {
  const ParametricSystem sys = scalar_system();
  const TrueCostResult res =
      true_cost(sys, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, 8);
  CHECK(res.value == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("seeded Monte Carlo cross-checks the quadrature oracle") {
  const Preset preset = illustrative_preset();
  const ParametricSystem sys = preset.system();
  const TrueCostResult quad =
      true_cost(sys, published_gain(), preset.Q, preset.R, 32);
  const double mc =
      true_cost_mc(sys, published_gain(), preset.Q, preset.R, 20000, 42);
  CHECK(std::abs(mc - quad.value) <= 0.05);
  // Fixed seed means a fixed estimate.
  CHECK(mc == true_cost_mc(sys, published_gain(), preset.Q, preset.R, 20000, 42));
}

TEST_CASE("admissibility_sweep on the 2-state example") {
  const Preset preset = illustrative_preset();
  const ParametricSystem sys = preset.system();
  const std::vector<double> grid = uniform_grid(sys, 101);

  const AdmissibilitySweep open =
      admissibility_sweep(sys, Eigen::MatrixXd::Zero(2, 2), grid);
  CHECK_FALSE(open.admissible);
  CHECK(open.worst_abscissa > 0.0);

  const AdmissibilitySweep closed =
      admissibility_sweep(sys, published_gain(), grid);
  CHECK(closed.admissible);

  const AdmissibilitySweep stable = admissibility_sweep(
      scalar_system(), Eigen::MatrixXd::Zero(1, 1), uniform_grid(scalar_system(), 21));
  CHECK(stable.admissible);
}

TEST_CASE("convergence_study on deterministic and polynomial plants") {
  SUBCASE("deterministic collapse") {
    const ConvergenceStudy study =
        convergence_study(scalar_system(), Eigen::MatrixXd::Identity(1, 1),
                          kOne, kOne, {0, 1, 2, 3, 4});
    for (double err : study.abs_errors) CHECK(err <= 1e-10);
  }

  SUBCASE("2-state example decays geometrically to the order-8 floor") {
    // The grid oracle puts the truncation error near 3.7e-3 at N=3,
    // 2.9e-4 at N=5, and 3.7e-6 at N=8; the decay is monotone.
    const Preset preset = illustrative_preset();
    const ConvergenceStudy study =
        convergence_study(preset.system(), published_gain(), preset.Q,
                          preset.R, {1, 2, 3, 4, 5, 8});
    REQUIRE(study.orders.size() == 6);
    for (std::size_t i = 0; i < study.orders.size(); ++i) {
      CHECK(study.admissible[i]);
      if (i > 0) {
        CHECK(study.abs_errors[i] <= study.abs_errors[i - 1] + 1e-10);
      }
    }
    CHECK(study.abs_errors[2] <= 5e-3);   // N = 3
    CHECK(study.abs_errors[4] <= 5e-4);   // N = 5
    CHECK(study.abs_errors[5] <= 1e-6 * study.reference_cost);  // N = 8
  }
}

TEST_CASE("gradient_check against the analytic scalar gradient") {
  const SurrogateModel model = build_surrogate(scalar_system(), 2);
  const GradientCheck gc = gradient_check(
      model, Eigen::MatrixXd::Identity(1, 1), kOne, kOne, 1e-6);
  CHECK(gc.entries_checked == 1);
  CHECK(gc.max_rel_error <= 1e-6);
}

TEST_CASE("gradient_check on the 2-state example at order 5") {
  const Preset preset = illustrative_preset();
  const SurrogateModel model = build_surrogate(preset.system(), 5);
  auto rng = testsup::make_rng(79);
  int done = 0;
  while (done < 5) {
    const Eigen::MatrixXd k =
        published_gain() + 0.3 * testsup::random_matrix(rng, 2, 2);
    if (!is_hurwitz(closed_loop(model, k)).hurwitz) continue;
    ++done;
    const GradientCheck gc =
        gradient_check(model, k, preset.Q, preset.R, 1e-6);
    CHECK(gc.entries_checked == 4);
    CHECK(gc.max_rel_error <= 1e-5);
  }
}

TEST_CASE("oracle equivalence at order 8 on both example plants") {
  {
    const Preset preset = illustrative_preset();
    const ParametricSystem sys = preset.system();
    const SurrogateModel model = build_surrogate(sys, 8);
    const CostEvaluation eval =
        evaluate(model, published_gain(), preset.Q, preset.R);
    const TrueCostResult oracle =
        true_cost(sys, published_gain(), preset.Q, preset.R, 64);
    CHECK(std::abs(oracle.value - eval.cost) <=
          std::max(1e-6, 1e-4 * oracle.value));
  }
  {
    const Preset preset = mass_spring_preset();
    const ParametricSystem sys = preset.system();
    const SurrogateModel model = build_surrogate(sys, 8);
    const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
    const CostEvaluation eval = evaluate(model, k0, preset.Q, preset.R);
    const TrueCostResult oracle = true_cost(sys, k0, preset.Q, preset.R, 64);
    CHECK(std::abs(oracle.value - eval.cost) <=
          std::max(1e-6, 1e-4 * oracle.value));
  }
}

TEST_CASE("Cauchy-Schwarz bound under the quadrature measure") {
  auto rng = testsup::make_rng(83);
  const LegendreBasis basis = make_basis(0, {-1.0, 1.0});
  const QuadratureRule rule = gauss_rule(16, {-1.0, 1.0});
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3, q = 1 + (trial / 3) % 3, m = 1 + trial % 4;
    const Eigen::MatrixXd x0 = testsup::random_matrix(rng, n, m);
    const Eigen::MatrixXd x1 = testsup::random_matrix(rng, n, m);
    const Eigen::MatrixXd y0 = testsup::random_matrix(rng, q, m);
    const Eigen::MatrixXd y1 = testsup::random_matrix(rng, q, m);
    auto xf = [&](double xi) { return Eigen::MatrixXd(x0 + xi * x1); };
    auto yf = [&](double xi) { return Eigen::MatrixXd(y0 + xi * y1); };

    // E[.] with phi_0 = 1 reduces project_outer_kron to the plain mean.
    auto mean = [&](const MatrixFn& fn) {
      return project_outer_kron(basis, rule, fn);
    };
    const Eigen::MatrixXd exy =
        mean([&](double xi) { return Eigen::MatrixXd(xf(xi) * yf(xi).transpose()); });
    const Eigen::MatrixXd exx =
        mean([&](double xi) { return Eigen::MatrixXd(xf(xi) * xf(xi).transpose()); });
    const Eigen::MatrixXd eyy =
        mean([&](double xi) { return Eigen::MatrixXd(yf(xi) * yf(xi).transpose()); });
    CHECK(spectral_norm(exy) <=
          std::sqrt(spectral_norm(exx)) * std::sqrt(spectral_norm(eyy)) +
              1e-10);
  }
}

TEST_CASE("grid-mean cost sits near the surrogate cost at a converged gain") {
  const Preset preset = illustrative_preset();
  const ParametricSystem sys = preset.system();
  const SurrogateModel model = build_surrogate(sys, 5);
  const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
  const OptimizationReport report =
      optimize(model, k0, preset.Q, preset.R, preset.optimizer);
  REQUIRE(report.termination == Termination::kConverged);

  const std::vector<double> grid = uniform_grid(sys, 21);
  double mean = 0.0;
  for (double xi : grid) {
    const PointCost pc =
        cost_at_xi(sys, report.final_gain, preset.Q, preset.R, xi);
    CHECK(std::isfinite(pc.trace_cost));
    mean += pc.trace_cost;
  }
  mean /= static_cast<double>(grid.size());
  CHECK(std::abs(mean - report.final_cost) <= 0.02 * report.final_cost);
}

TEST_CASE("grid-mean cost matches the lifted cost on the mass-spring gain") {
  const Preset preset = mass_spring_preset();
  const ParametricSystem sys = preset.system();
  const SurrogateModel model = build_surrogate(sys, 5);
  Eigen::MatrixXd kp(1, 8);
  kp << 2.55, -1.50, 0.91, -0.07, 2.72, 1.70, 1.52, 1.66;
  const CostEvaluation eval = evaluate(model, kp, preset.Q, preset.R);

  const std::vector<double> grid = uniform_grid(sys, 21);
  double mean = 0.0;
  for (double xi : grid) {
    const PointCost pc = cost_at_xi(sys, kp, preset.Q, preset.R, xi);
    CHECK(std::isfinite(pc.trace_cost));
    mean += pc.trace_cost;
  }
  mean /= static_cast<double>(grid.size());
  CHECK(std::abs(mean - eval.cost) <= 0.02 * eval.cost);
}
