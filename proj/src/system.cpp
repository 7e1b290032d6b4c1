#include "pclqr/system.hpp"

#include <memory>
#include <stdexcept>
#include <utility>

namespace pclqr {

Eigen::MatrixXd PolynomialMatrix::eval(double xi) const {
  if (coeffs.empty()) {
    throw std::invalid_argument("polynomial matrix has no coefficients");
  }
  Eigen::MatrixXd out = coeffs.back();
  for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) {
    out = xi * out + *it;
  }
  return out;
}

Eigen::MatrixXd ParametricSystem::closed_loop_at(
    double xi, const Eigen::MatrixXd& K) const {
  return A(xi) - B(xi) * K;
}

ParametricSystem make_polynomial_system(PolynomialMatrix A, PolynomialMatrix B,
                                        std::pair<double, double> interval) {
  if (A.coeffs.empty() || B.coeffs.empty()) {
    throw std::invalid_argument("system matrices need at least one coefficient");
  }
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("A(xi) must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("B(xi) row count must match A(xi)");
  }
  for (const auto& c : A.coeffs) {
    if (c.rows() != A.rows() || c.cols() != A.cols() || !c.allFinite()) {
      throw std::invalid_argument("inconsistent or non-finite A coefficients");
    }
  }
  for (const auto& c : B.coeffs) {
    if (c.rows() != B.rows() || c.cols() != B.cols() || !c.allFinite()) {
      throw std::invalid_argument("inconsistent or non-finite B coefficients");
    }
  }
  if (!(interval.first < interval.second)) {
    throw std::invalid_argument("invalid parameter interval");
  }

  ParametricSystem sys;
  sys.n_x = static_cast<int>(A.rows());
  sys.n_u = static_cast<int>(B.cols());
  sys.interval = interval;
  sys.declared_degree = std::max(A.degree(), B.degree());
  auto a_poly = std::make_shared<PolynomialMatrix>(std::move(A));
  auto b_poly = std::make_shared<PolynomialMatrix>(std::move(B));
  sys.A = [a_poly](double xi) { return a_poly->eval(xi); };
  sys.B = [b_poly](double xi) { return b_poly->eval(xi); };
  return sys;
}

}  // namespace pclqr
