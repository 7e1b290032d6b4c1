// Wall-time comparison of the OpenMP kernels against their serial
// references: lifted-matrix assembly and parameter-grid sweeps.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pclqr/optimizer.hpp"
#include "pclqr/presets.hpp"
#include "pclqr/validation.hpp"

using namespace pclqr;

namespace {

template <typename Fn>
double time_median_ms(Fn&& fn, int reps = 5) {
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

void row(const char* kernel, double serial_ms, double parallel_ms,
         double max_diff) {
  std::printf("%-40s %10.2f %10.2f %8.2fx %10.2e\n", kernel, serial_ms,
              parallel_ms, serial_ms / parallel_ms, max_diff);
}

// Coupled-oscillator chain, stiffness polynomial in the parameter; heavier
// per-node work than the compiled-in presets.
ParametricSystem chain_system(int masses) {
  const int n = 2 * masses;
  Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(masses, masses);
  for (int i = 0; i < masses; ++i) {
    stiffness(i, i) = (i == 0 || i == masses - 1) ? -1.0 : -2.0;
    if (i > 0) stiffness(i, i - 1) = 1.0;
    if (i + 1 < masses) stiffness(i, i + 1) = 1.0;
  }
  PolynomialMatrix a, b;
  a.coeffs.assign(3, Eigen::MatrixXd::Zero(n, n));
  a.coeffs[0].topRightCorner(masses, masses) =
      Eigen::MatrixXd::Identity(masses, masses);
  a.coeffs[0].bottomLeftCorner(masses, masses) = stiffness;
  a.coeffs[0].bottomRightCorner(masses, masses) -=
      0.05 * Eigen::MatrixXd::Identity(masses, masses);
  a.coeffs[1].bottomLeftCorner(masses, masses) = 0.3 * stiffness;
  a.coeffs[2].bottomLeftCorner(masses, masses) = 0.1 * stiffness;
  b.coeffs = {Eigen::MatrixXd::Zero(n, 1)};
  b.coeffs[0](masses, 0) = 1.0;
  return make_polynomial_system(a, b, {-1.0, 1.0});
}

std::vector<double> serial_sweep(const ParametricSystem& sys,
                                 const Eigen::MatrixXd& k,
                                 const std::vector<double>& grid) {
  std::vector<double> abscissas(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) {
    abscissas[q] = is_hurwitz(sys.closed_loop_at(grid[q], k)).abscissa;
  }
  return abscissas;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (compiled without OpenMP)\n");
#endif
  std::printf("%-40s %10s %10s %9s %10s\n", "kernel", "serial ms", "omp ms",
              "speedup", "max diff");

  const ParametricSystem chain = chain_system(12);  // 24 states

  for (int order : {8, 16, 24}) {
    const QuadratureRule rule =
        gauss_rule(default_quadrature_order(chain, order), chain.interval);
    const LegendreBasis basis = make_basis(order, chain.interval);
    Eigen::MatrixXd par, ser;
    const double t_ser = time_median_ms(
        [&] { ser = project_outer_kron_serial(basis, rule, chain.A); });
    const double t_par = time_median_ms(
        [&] { par = project_outer_kron(basis, rule, chain.A); });
    char label[64];
    std::snprintf(label, sizeof(label), "lifted assembly (N=%d, dim=%d)",
                  order, (order + 1) * chain.n_x);
    row(label, t_ser, t_par, (par - ser).cwiseAbs().maxCoeff());
  }

  {
    // Velocity damping on every mass keeps the sweep gain admissible.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(1, chain.n_x);
    k(0, chain.n_x / 2) = 2.0;
    for (int nodes : {201, 801}) {
      const std::vector<double> grid = uniform_grid(chain, nodes);
      AdmissibilitySweep par;
      std::vector<double> ser;
      const double t_ser = time_median_ms([&] { ser = serial_sweep(chain, k, grid); });
      const double t_par =
          time_median_ms([&] { par = admissibility_sweep(chain, k, grid); });
      double diff = 0.0;
      for (std::size_t q = 0; q < grid.size(); ++q) {
        diff = std::max(diff, std::abs(par.abscissas[q] - ser[q]));
      }
      char label[64];
      std::snprintf(label, sizeof(label), "admissibility sweep (%d nodes)",
                    nodes);
      row(label, t_ser, t_par, diff);
    }
  }

  {
    const Preset preset = mass_spring_preset();
    const ParametricSystem sys = preset.system();
    const SurrogateModel model = build_surrogate(sys, 5);
    const Eigen::MatrixXd k0 = initial_gain(sys, preset.Q, preset.R, model);
    const double h = 1e-6 * (1.0 + k0.norm());
    // Serial twin: the same central differences, one entry at a time.
    double max_rel = 0.0;
    const double t_ser = time_median_ms([&] {
      const CostEvaluation base = evaluate(model, k0, preset.Q, preset.R);
      max_rel = 0.0;
      for (int e = 0; e < model.n_u * model.n_x; ++e) {
        Eigen::MatrixXd kp = k0, km = k0;
        kp(e / model.n_x, e % model.n_x) += h;
        km(e / model.n_x, e % model.n_x) -= h;
        const double fd = (evaluate(model, kp, preset.Q, preset.R).cost -
                           evaluate(model, km, preset.Q, preset.R).cost) /
                          (2.0 * h);
        const double g = base.gradient(e / model.n_x, e % model.n_x);
        max_rel = std::max(max_rel,
                           std::abs(fd - g) / std::max(1.0, std::abs(g)));
      }
    });
    GradientCheck gc;
    const double t_par = time_median_ms(
        [&] { gc = gradient_check(model, k0, preset.Q, preset.R, h); });
    row("gradient finite-difference check", t_ser, t_par,
        std::abs(gc.max_rel_error - max_rel));
  }
  return 0;
}
