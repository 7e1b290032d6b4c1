#include "pclqr/presets.hpp"

namespace pclqr {

ParametricSystem Preset::system() const {
  return make_polynomial_system(A_poly, B_poly, interval);
}

Preset illustrative_preset() {
  Preset p;
  p.name = "illustrative";
  p.interval = {-1.0, 1.0};

  Eigen::MatrixXd a0(2, 2), a3(2, 2);
  a0 << 0.2, -0.4, 0.1, 0.5;
  a3 << 0.3, 0.0, 0.0, 0.0;
  p.A_poly.coeffs = {a0, Eigen::MatrixXd::Zero(2, 2),
                     Eigen::MatrixXd::Zero(2, 2), a3};

  Eigen::MatrixXd b0(2, 2);
  b0 << 0.5, 0.1, 0.2, 1.0;
  p.B_poly.coeffs = {b0};

  p.Q = Eigen::MatrixXd::Identity(2, 2);
  p.R = Eigen::MatrixXd::Identity(2, 2);
  p.pce_order = 5;
  p.optimizer.step = 1e-2;
  p.optimizer.grad_tol = 1e-3;
  p.optimizer.max_iters = 50000;
  return p;
}

Preset mass_spring_preset() {
  Preset p;
  p.name = "mass-spring";
  p.interval = {-1.0, 1.0};

  // Four unit masses in a free-free chain; positions then velocities.
  Eigen::MatrixXd stiffness(4, 4);
  stiffness << -1.0, 1.0, 0.0, 0.0,  //
      1.0, -2.0, 1.0, 0.0,           //
      0.0, 1.0, -2.0, 1.0,           //
      0.0, 0.0, 1.0, -1.0;

  // kappa(xi) = (xi/5 + 1)^4, expanded in ascending powers of xi.
  const double kappa[5] = {1.0, 4.0 / 5.0, 6.0 / 25.0, 4.0 / 125.0,
                           1.0 / 625.0};

  p.A_poly.coeffs.resize(5, Eigen::MatrixXd::Zero(8, 8));
  p.A_poly.coeffs[0].topRightCorner(4, 4) = Eigen::MatrixXd::Identity(4, 4);
  for (int k = 0; k < 5; ++k) {
    p.A_poly.coeffs[k].bottomLeftCorner(4, 4) = kappa[k] * stiffness;
  }

  Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(8, 1);
  b0(4, 0) = 1.0;  // force on the first mass
  p.B_poly.coeffs = {b0};

  p.Q = Eigen::MatrixXd::Identity(8, 8);
  p.R = Eigen::MatrixXd::Identity(1, 1);
  p.pce_order = 5;
  p.optimizer.step = 1e-2;
  p.optimizer.grad_tol = 1e-3;
  p.optimizer.max_iters = 50000;
  return p;
}

std::optional<Preset> find_preset(std::string_view name) {
  if (name == "illustrative") return illustrative_preset();
  if (name == "mass-spring" || name == "mass_spring") {
    return mass_spring_preset();
  }
  return std::nullopt;
}

}  // namespace pclqr
