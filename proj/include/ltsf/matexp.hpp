#pragma once

#include <utility>

#include "ltsf/numkit.hpp"

namespace ltsf {

/// Structure imposed on the latent dynamics matrix A.
enum class MatrixClass { full, skew_only, diag_only, skew_plus_diag };

MatrixClass matrix_class_from_string(const std::string& s);
std::string to_string(MatrixClass mc);

/// Parametrised dynamics matrix A = K - K^T + diag(d).
///
/// skew_params fills the strictly lower triangle of K in row-major order:
/// (1,0), (2,0), (2,1), (3,0), ... For the full class, dense_params holds all
/// of A in row-major order and the skew/diag vectors are unused.
struct SkewDiagGenerator {
  int dim = 0;
  MatrixClass matrix_class = MatrixClass::skew_plus_diag;
  Vector skew_params;
  Vector diag_params;
  Vector dense_params;

  static SkewDiagGenerator zeros(int dim, MatrixClass mc);

  Eigen::Index param_count() const;
  /// Flat parameter order: skew (row-major lower triangle), then diag;
  /// dense row-major for the full class.
  Vector params() const;
  void set_params(const Vector& p);

  Matrix materialize() const;
  /// Pullback of a loss gradient with respect to A onto the flat parameters.
  Vector pullback(const Matrix& grad_A) const;
};

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant and a single 1-norm threshold.
Matrix expm(const Matrix& A);

/// (expm(A), Frechet derivative L(A, E)), both extracted from
/// expm([[A, E], [0, A]]).
std::pair<Matrix, Matrix> expm_frechet(const Matrix& A, const Matrix& E);

/// Fundamental solution X(t) of x'(t) = A x(t - delay) with X = I on
/// [-delay, 0]. Piecewise polynomial: for t in [(n-1) delay, n delay),
///   X(t) = sum_{k=0..n} A^k (t - (k-1) delay)^k / k!
/// Requires delay > 0 and t >= -delay.
Matrix delayed_expm(const Matrix& A, double delay, double t);

/// Gradient of <upstream, delayed_expm(A, delay, t)> with respect to A.
Matrix delayed_expm_grad(const Matrix& A, double delay, double t,
                         const Matrix& upstream);

}  // namespace ltsf
