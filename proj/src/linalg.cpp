#include "pclqr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace pclqr {

namespace {

void check_square_finite(const Eigen::MatrixXd& A, const char* name) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square");
  }
  if (!A.allFinite()) {
    throw std::invalid_argument(std::string(name) + " has non-finite entries");
  }
}

void check_symmetric(const Eigen::MatrixXd& Q, const char* name) {
  const double asym = (Q - Q.transpose()).norm();
  if (asym > 1e-8 * (1.0 + Q.norm())) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
}

// Eigenvalues of the quasi-triangular Schur factor, block by block.
std::vector<std::complex<double>> schur_eigenvalues(const Eigen::MatrixXd& T) {
  std::vector<std::complex<double>> eigs;
  const Eigen::Index n = T.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1);
      const double c = T(i + 1, i), d = T(i + 1, i + 1);
      const double re = 0.5 * (a + d);
      const double disc = 0.25 * (a - d) * (a - d) + b * c;
      if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        eigs.emplace_back(re, im);
        eigs.emplace_back(re, -im);
      } else {
        // Eigen normally standardizes 2x2 blocks to complex pairs;
        // handle a real pair anyway.
        const double s = std::sqrt(disc);
        eigs.emplace_back(re + s, 0.0);
        eigs.emplace_back(re - s, 0.0);
      }
      i += 2;
    } else {
      eigs.emplace_back(T(i, i), 0.0);
      i += 1;
    }
  }
  return eigs;
}

std::vector<int> schur_partition(const Eigen::MatrixXd& T) {
  std::vector<int> starts;
  const Eigen::Index n = T.rows();
  Eigen::Index i = 0;
  while (i < n) {
    starts.push_back(static_cast<int>(i));
    i += (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
  }
  starts.push_back(static_cast<int>(n));
  return starts;
}

// Solves T11^T X + X T22 = C (sizes <= 2) by vectorization.
Eigen::MatrixXd small_sylvester(const Eigen::MatrixXd& T11,
                                const Eigen::MatrixXd& T22,
                                const Eigen::MatrixXd& C) {
  const Eigen::Index p = C.rows(), s = C.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p * s, p * s);
  // vec(T11^T X) = (I_s (x) T11^T) vec(X); vec(X T22) = (T22^T (x) I_p) vec(X)
  for (Eigen::Index k = 0; k < s; ++k) {
    M.block(k * p, k * p, p, p) += T11.transpose();
  }
  for (Eigen::Index k = 0; k < s; ++k) {
    for (Eigen::Index l = 0; l < s; ++l) {
      M.block(k * p, l * p, p, p).diagonal().array() += T22(l, k);
    }
  }
  Eigen::VectorXd rhs(p * s);
  for (Eigen::Index l = 0; l < s; ++l) rhs.segment(l * p, p) = C.col(l);
  Eigen::VectorXd x = Eigen::FullPivLU<Eigen::MatrixXd>(M).solve(rhs);
  Eigen::MatrixXd X(p, s);
  for (Eigen::Index l = 0; l < s; ++l) X.col(l) = x.segment(l * p, p);
  return X;
}

// Bartels-Stewart substitution in Schur coordinates.
// kTransposed: T^T X + X T + C = 0; kPlain: T X + X T^T + C = 0.
Eigen::MatrixXd bartels_stewart(const Eigen::MatrixXd& T,
                                const std::vector<int>& starts,
                                const Eigen::MatrixXd& C, LyapunovSide side) {
  const int nb = static_cast<int>(starts.size()) - 1;
  const Eigen::Index n = T.rows();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);

  auto blk = [&](const Eigen::MatrixXd& M, int I, int J) {
    return M.block(starts[I], starts[J], starts[I + 1] - starts[I],
                   starts[J + 1] - starts[J]);
  };

  if (side == LyapunovSide::kTransposed) {
    for (int J = 0; J < nb; ++J) {
      for (int I = 0; I < nb; ++I) {
        Eigen::MatrixXd rhs = -blk(C, I, J);
        if (I > 0) {
          rhs.noalias() -= T.block(0, starts[I], starts[I],
                                   starts[I + 1] - starts[I])
                               .transpose() *
                           X.block(0, starts[J], starts[I],
                                   starts[J + 1] - starts[J]);
        }
        if (J > 0) {
          rhs.noalias() -= X.block(starts[I], 0, starts[I + 1] - starts[I],
                                   starts[J]) *
                           T.block(0, starts[J], starts[J],
                                   starts[J + 1] - starts[J]);
        }
        X.block(starts[I], starts[J], starts[I + 1] - starts[I],
                starts[J + 1] - starts[J]) =
            small_sylvester(blk(T, I, I), blk(T, J, J), rhs);
      }
    }
  } else {
    for (int J = nb - 1; J >= 0; --J) {
      for (int I = nb - 1; I >= 0; --I) {
        Eigen::MatrixXd rhs = -blk(C, I, J);
        const int after_I = starts[I + 1];
        const int after_J = starts[J + 1];
        if (after_I < n) {
          rhs.noalias() -= T.block(starts[I], after_I,
                                   starts[I + 1] - starts[I], n - after_I) *
                           X.block(after_I, starts[J], n - after_I,
                                   starts[J + 1] - starts[J]);
        }
        if (after_J < n) {
          rhs.noalias() -= X.block(starts[I], after_J,
                                   starts[I + 1] - starts[I], n - after_J) *
                           T.block(starts[J], after_J,
                                   starts[J + 1] - starts[J], n - after_J)
                               .transpose();
        }
        // T X + X T^T: block equation T_II Z + Z T_JJ^T = rhs, i.e. the
        // transposed-side kernel applied to T_II^T and T_JJ^T.
        X.block(starts[I], starts[J], starts[I + 1] - starts[I],
                starts[J + 1] - starts[J]) =
            small_sylvester(blk(T, I, I).transpose(), blk(T, J, J).transpose(),
                            rhs);
      }
    }
  }
  return X;
}

Eigen::MatrixXd lyapunov_residual(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Q,
                                  LyapunovSide side) {
  if (side == LyapunovSide::kTransposed) {
    return A.transpose() * X + X * A + Q;
  }
  return A * X + X * A.transpose() + Q;
}

}  // namespace

SpectralInfo is_hurwitz(const Eigen::MatrixXd& A, double margin) {
  check_square_finite(A, "A");
  SchurLyapunovSolver solver(A);
  return SpectralInfo{solver.hurwitz(margin), solver.abscissa()};
}

SchurLyapunovSolver::SchurLyapunovSolver(const Eigen::MatrixXd& A) : A_(A) {
  check_square_finite(A, "A");
  Eigen::RealSchur<Eigen::MatrixXd> schur(A);
  if (schur.info() != Eigen::Success) {
    throw std::runtime_error("real Schur decomposition failed to converge");
  }
  T_ = schur.matrixT();
  U_ = schur.matrixU();
  block_starts_ = schur_partition(T_);

  const auto eigs = schur_eigenvalues(T_);
  abscissa_ = -std::numeric_limits<double>::infinity();
  for (const auto& e : eigs) abscissa_ = std::max(abscissa_, e.real());
  sep_estimate_ = std::numeric_limits<double>::infinity();
  for (const auto& ei : eigs) {
    for (const auto& ej : eigs) {
      sep_estimate_ = std::min(sep_estimate_, std::abs(ei + ej));
    }
  }
}

LyapunovSolution SchurLyapunovSolver::solve(const Eigen::MatrixXd& Q,
                                            LyapunovSide side) const {
  if (Q.rows() != A_.rows() || Q.cols() != A_.cols()) {
    throw std::invalid_argument("forcing term shape does not match A");
  }
  check_symmetric(Q, "Q");
  if (!hurwitz()) {
    throw NotHurwitzError(
        "Lyapunov solve requires a Hurwitz matrix; spectral abscissa = " +
            std::to_string(abscissa_),
        abscissa_);
  }

  auto substitute = [&](const Eigen::MatrixXd& rhs) {
    const Eigen::MatrixXd C = U_.transpose() * rhs * U_;
    const Eigen::MatrixXd Xt = bartels_stewart(T_, block_starts_, C, side);
    Eigen::MatrixXd X = U_ * Xt * U_.transpose();
    return Eigen::MatrixXd(0.5 * (X + X.transpose()));
  };

  LyapunovSolution sol;
  sol.P = substitute(Q);
  Eigen::MatrixXd res = lyapunov_residual(A_, sol.P, Q, side);
  sol.residual_norm = res.norm();
  const double tol = 1e-8 * (1.0 + Q.norm());
  if (sol.residual_norm > tol) {
    sol.P += substitute(res);
    sol.P = 0.5 * (sol.P + sol.P.transpose());
    res = lyapunov_residual(A_, sol.P, Q, side);
    sol.residual_norm = res.norm();
    sol.refined = true;
  }
  const double cond_estimate =
      (A_.norm() + 1.0) / std::max(sep_estimate_, 1e-300);
  if (cond_estimate > 1e12) {
    sol.warning = "ill-conditioned Lyapunov solve: eigenvalue-pair "
                  "separation estimate " +
                  std::to_string(sep_estimate_);
  }
  return sol;
}

LyapunovSolution solve_lyapunov(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Q, LyapunovSide side) {
  check_square_finite(A, "A");
  return SchurLyapunovSolver(A).solve(Q, side);
}

Eigen::MatrixXd solve_lyapunov_kron(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q,
                                    LyapunovSide side) {
  check_square_finite(A, "A");
  check_symmetric(Q, "Q");
  const Eigen::Index n = A.rows();
  if (n > 64) {
    throw std::invalid_argument(
        "vectorized reference solve is limited to n <= 64");
  }
  const Eigen::MatrixXd& M =
      side == LyapunovSide::kTransposed ? A : Eigen::MatrixXd(A.transpose());
  // kTransposed: vec(A^T P + P A) = (I (x) A^T + A^T (x) I) vec(P).
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    big.block(k * n, k * n, n, n) += M.transpose();
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      big.block(k * n, l * n, n, n).diagonal().array() += M(l, k);
    }
  }
  Eigen::VectorXd rhs(n * n);
  for (Eigen::Index l = 0; l < n; ++l) rhs.segment(l * n, n) = -Q.col(l);
  const Eigen::VectorXd x = big.partialPivLu().solve(rhs);
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index l = 0; l < n; ++l) P.col(l) = x.segment(l * n, n);
  return 0.5 * (P + P.transpose());
}

CareResult kleinman_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& K0) {
  check_square_finite(A, "A");
  const Eigen::Index n = A.rows(), m = B.cols();
  if (B.rows() != n) throw std::invalid_argument("B row count must match A");
  if (K0.rows() != m || K0.cols() != n) {
    throw std::invalid_argument("K0 must be n_u x n_x");
  }
  if (B.norm() == 0.0) {
    throw std::invalid_argument("B is zero; no input reaches the state");
  }
  check_symmetric(Q, "Q");
  check_symmetric(R, "R");
  Eigen::LLT<Eigen::MatrixXd> r_llt(R);
  if (r_llt.info() != Eigen::Success) {
    throw std::invalid_argument("R must be positive definite");
  }
  Eigen::LLT<Eigen::MatrixXd> q_llt(Q);
  if (q_llt.info() != Eigen::Success) {
    throw std::invalid_argument("Q must be positive definite");
  }

  {
    const SpectralInfo s0 = is_hurwitz(A - B * K0);
    if (!s0.hurwitz) {
      throw NotHurwitzError("kleinman_care: K0 is not stabilizing; abscissa = " +
                                std::to_string(s0.abscissa),
                            s0.abscissa);
    }
  }

  CareResult result;
  Eigen::MatrixXd K = K0;
  Eigen::MatrixXd P;
  constexpr int kMaxIters = 100;
  for (int it = 0; it < kMaxIters; ++it) {
    const Eigen::MatrixXd Acl = A - B * K;
    Eigen::MatrixXd W = Q + K.transpose() * R * K;
    W = 0.5 * (W + W.transpose());
    SchurLyapunovSolver solver(Acl);
    if (!solver.hurwitz()) {
      throw NotHurwitzError(
          "kleinman_care: iterate lost stabilizability (numerical failure)",
          solver.abscissa());
    }
    P = solver.solve(W, LyapunovSide::kTransposed).P;
    const Eigen::MatrixXd K_next = r_llt.solve(B.transpose() * P);
    const double delta = (K_next - K).norm();
    K = K_next;
    result.iterations = it + 1;
    if (delta <= 1e-10) break;
  }

  const Eigen::MatrixXd riccati = A.transpose() * P + P * A -
                                  P * B * r_llt.solve(B.transpose() * P) + Q;
  result.riccati_residual = riccati.norm();
  if (result.riccati_residual > 1e-8 * (1.0 + Q.norm())) {
    throw std::runtime_error(
        "kleinman_care: Newton iteration did not reach the Riccati "
        "residual tolerance (residual = " +
        std::to_string(result.riccati_residual) + ")");
  }
  result.gain = K;
  result.P = P;
  return result;
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

}  // namespace pclqr
