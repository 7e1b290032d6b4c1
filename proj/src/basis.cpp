#include "pclqr/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pclqr {

namespace {

void check_interval(std::pair<double, double> interval) {
  if (!(interval.first < interval.second)) {
    throw std::invalid_argument("invalid parameter interval: lower bound " +
                                std::to_string(interval.first) +
                                " must be < upper bound " +
                                std::to_string(interval.second));
  }
}

// Accumulates E[phi_i phi_j M] for one block, in fixed node order.
void accumulate_block(Eigen::Ref<Eigen::MatrixXd> block,
                      const Eigen::MatrixXd& phi_at_nodes,
                      const Eigen::VectorXd& weights,
                      const std::vector<Eigen::MatrixXd>& values, int i,
                      int j) {
  const int m = static_cast<int>(weights.size());
  for (int q = 0; q < m; ++q) {
    block.noalias() +=
        (weights(q) * phi_at_nodes(q, i) * phi_at_nodes(q, j)) * values[q];
  }
}

Eigen::MatrixXd project_impl(const LegendreBasis& basis,
                             const QuadratureRule& rule, const MatrixFn& fn,
                             bool parallel) {
  const int m = static_cast<int>(rule.nodes.size());
  const int nb = basis.order + 1;
  if (m < nb) {
    throw std::invalid_argument(
        "quadrature rule has " + std::to_string(m) + " nodes; at least " +
        std::to_string(nb) + " are required for basis order " +
        std::to_string(basis.order));
  }

  std::vector<Eigen::MatrixXd> values(m);
#pragma omp parallel for schedule(static) if (parallel)
  for (int q = 0; q < m; ++q) {
    values[q] = fn(rule.nodes(q));
  }

  const Eigen::Index r = values[0].rows();
  const Eigen::Index c = values[0].cols();
  for (int q = 0; q < m; ++q) {
    if (values[q].rows() != r || values[q].cols() != c) {
      throw std::invalid_argument(
          "matrix function changed shape across quadrature nodes");
    }
  }

  Eigen::MatrixXd phi_at_nodes(m, nb);
  for (int q = 0; q < m; ++q) {
    phi_at_nodes.row(q) = eval_basis(basis, rule.nodes(q)).transpose();
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nb * r, nb * c);
  // Parallel over block columns: threads own disjoint contiguous column
  // ranges of the column-major result, and each block still accumulates its
  // quadrature sum in fixed node order.
#pragma omp parallel for schedule(static) if (parallel)
  for (int j = 0; j < nb; ++j) {
    for (int i = 0; i < nb; ++i) {
      accumulate_block(out.block(i * r, j * c, r, c), phi_at_nodes,
                       rule.weights, values, i, j);
    }
  }
  return out;
}

}  // namespace

LegendreBasis make_basis(int order, std::pair<double, double> interval) {
  if (order < 0) {
    throw std::invalid_argument("basis order must be nonnegative");
  }
  check_interval(interval);
  return LegendreBasis{order, interval.first, interval.second};
}

QuadratureRule gauss_rule(int num_nodes, std::pair<double, double> interval) {
  if (num_nodes < 1) {
    throw std::invalid_argument("quadrature rule needs at least one node");
  }
  check_interval(interval);

  // Golub-Welsch on the Legendre Jacobi matrix; weights come out normalized
  // to the probability measure.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  for (int k = 1; k < num_nodes; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);

  QuadratureRule rule;
  rule.nodes.resize(num_nodes);
  rule.weights.resize(num_nodes);
  const double half_width = 0.5 * (interval.second - interval.first);
  const double mid = 0.5 * (interval.first + interval.second);
  for (int q = 0; q < num_nodes; ++q) {
    rule.nodes(q) = mid + half_width * es.eigenvalues()(q);
    const double v0 = es.eigenvectors()(0, q);
    rule.weights(q) = v0 * v0;
  }
  return rule;
}

Eigen::VectorXd eval_basis(const LegendreBasis& basis, double xi) {
  const int n = basis.order;
  // Map onto the canonical interval, then run the Legendre recurrence.
  const double t = (2.0 * xi - basis.lo - basis.hi) / (basis.hi - basis.lo);
  Eigen::VectorXd phi(n + 1);
  double p_prev = 1.0;
  phi(0) = 1.0;
  if (n == 0) return phi;
  double p_curr = t;
  phi(1) = std::sqrt(3.0) * p_curr;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * t * p_curr - k * p_prev) / (k + 1.0);
    p_prev = p_curr;
    p_curr = p_next;
    phi(k + 1) = std::sqrt(2.0 * (k + 1.0) + 1.0) * p_curr;
  }
  return phi;
}

Eigen::MatrixXd project_outer_kron(const LegendreBasis& basis,
                                   const QuadratureRule& rule,
                                   const MatrixFn& fn) {
  return project_impl(basis, rule, fn, true);
}

Eigen::MatrixXd project_outer_kron_serial(const LegendreBasis& basis,
                                          const QuadratureRule& rule,
                                          const MatrixFn& fn) {
  return project_impl(basis, rule, fn, false);
}

}  // namespace pclqr
