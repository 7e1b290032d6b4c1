#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace pclqr {

inline constexpr double kHurwitzMargin = 1e-9;

/// Thrown when an operation requires a Hurwitz matrix (equivalently, an
/// admissible feedback gain) and the spectral abscissa is not below the
/// stability margin.
class NotHurwitzError : public std::runtime_error {
 public:
  NotHurwitzError(const std::string& what, double abscissa)
      : std::runtime_error(what), abscissa_(abscissa) {}
  double abscissa() const { return abscissa_; }

 private:
  double abscissa_;
};

struct SpectralInfo {
  bool hurwitz = false;
  double abscissa = 0.0;  // max real part of the spectrum
};

/// True iff every eigenvalue has real part < -margin. Throws
/// std::invalid_argument on non-finite entries.
SpectralInfo is_hurwitz(const Eigen::MatrixXd& A,
                        double margin = kHurwitzMargin);

enum class LyapunovSide {
  kTransposed,  // A^T P + P A + Q = 0
  kPlain,       // A Y + Y A^T + Q = 0
};

struct LyapunovSolution {
  Eigen::MatrixXd P;
  double residual_norm = 0.0;  // Frobenius norm of the equation residual
  bool refined = false;        // one step of iterative refinement was applied
  std::optional<std::string> warning;  // set when the solve looks ill-conditioned
};

/// Factors A once (real Schur) and solves Lyapunov equations of either side
/// against the factorization. Immutable after construction.
class SchurLyapunovSolver {
 public:
  explicit SchurLyapunovSolver(const Eigen::MatrixXd& A);

  double abscissa() const { return abscissa_; }
  bool hurwitz(double margin = kHurwitzMargin) const {
    return abscissa_ < -margin;
  }

  /// Solves the requested equation with symmetric forcing Q. Throws
  /// NotHurwitzError unless hurwitz().
  LyapunovSolution solve(const Eigen::MatrixXd& Q, LyapunovSide side) const;

 private:
  Eigen::MatrixXd A_;
  Eigen::MatrixXd U_;  // A = U T U^T
  Eigen::MatrixXd T_;
  std::vector<int> block_starts_;  // quasi-triangular 1x1/2x2 partition
  double abscissa_ = 0.0;
  double sep_estimate_ = 0.0;  // min |lambda_i + lambda_j|, singularity proxy
};

/// Bartels-Stewart dense Lyapunov solve. Q must be symmetric, A Hurwitz.
LyapunovSolution solve_lyapunov(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Q, LyapunovSide side);

/// Kronecker-vectorization reference solve, O(n^6); limited to n <= 64.
Eigen::MatrixXd solve_lyapunov_kron(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q,
                                    LyapunovSide side);

struct CareResult {
  Eigen::MatrixXd gain;  // K* = R^{-1} B^T P*
  Eigen::MatrixXd P;     // stabilizing Riccati solution
  int iterations = 0;
  double riccati_residual = 0.0;
};

/// Kleinman-Newton iteration for the continuous algebraic Riccati equation,
/// started from a stabilizing gain K0. Q, R positive definite.
CareResult kleinman_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& K0);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& M);

}  // namespace pclqr
