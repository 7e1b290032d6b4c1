#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

#include "pclqr/optimizer.hpp"
#include "pclqr/system.hpp"

namespace pclqr {

/// Compiled-in example problems with their reference settings.
struct Preset {
  std::string name;
  PolynomialMatrix A_poly;
  PolynomialMatrix B_poly;
  std::pair<double, double> interval{-1.0, 1.0};
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  int pce_order = 5;
  OptimizerConfig optimizer;

  ParametricSystem system() const;
};

/// 2-state, 2-input plant with a cubic parameter entry on A(1,1).
Preset illustrative_preset();

/// Four unit masses in a chain, uncertain stiffness kappa(xi) = (xi/5 + 1)^4,
/// force actuation on the first mass.
Preset mass_spring_preset();

std::optional<Preset> find_preset(std::string_view name);

}  // namespace pclqr
