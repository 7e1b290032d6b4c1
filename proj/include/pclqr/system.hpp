#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "pclqr/basis.hpp"

namespace pclqr {

/// M(xi) = sum_k coeffs[k] * xi^k, all coefficient matrices of one shape.
struct PolynomialMatrix {
  std::vector<Eigen::MatrixXd> coeffs;

  Eigen::MatrixXd eval(double xi) const;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  Eigen::Index rows() const { return coeffs.at(0).rows(); }
  Eigen::Index cols() const { return coeffs.at(0).cols(); }
};

/// Linear plant dx = A(xi) x + B(xi) u with a scalar random parameter xi
/// distributed uniformly on the interval.
struct ParametricSystem {
  MatrixFn A;
  MatrixFn B;
  std::pair<double, double> interval{-1.0, 1.0};
  std::optional<int> declared_degree;  // polynomial degree of entries, if known
  int n_x = 0;
  int n_u = 0;

  double midpoint() const { return 0.5 * (interval.first + interval.second); }
  Eigen::MatrixXd closed_loop_at(double xi, const Eigen::MatrixXd& K) const;
};

ParametricSystem make_polynomial_system(PolynomialMatrix A, PolynomialMatrix B,
                                        std::pair<double, double> interval);

}  // namespace pclqr
