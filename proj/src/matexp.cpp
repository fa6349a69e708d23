#include "ltsf/matexp.hpp"

#include <cmath>
#include <vector>

namespace ltsf {

MatrixClass matrix_class_from_string(const std::string& s) {
  if (s == "full") return MatrixClass::full;
  if (s == "skew_only") return MatrixClass::skew_only;
  if (s == "diag_only") return MatrixClass::diag_only;
  if (s == "skew_plus_diag") return MatrixClass::skew_plus_diag;
  throw DomainError("unknown matrix class: " + s);
}

std::string to_string(MatrixClass mc) {
  switch (mc) {
    case MatrixClass::full: return "full";
    case MatrixClass::skew_only: return "skew_only";
    case MatrixClass::diag_only: return "diag_only";
    case MatrixClass::skew_plus_diag: return "skew_plus_diag";
  }
  throw DomainError("unknown matrix class");
}

namespace {

bool has_skew(MatrixClass mc) {
  return mc == MatrixClass::skew_only || mc == MatrixClass::skew_plus_diag;
}

bool has_diag(MatrixClass mc) {
  return mc == MatrixClass::diag_only || mc == MatrixClass::skew_plus_diag;
}

}  // namespace

SkewDiagGenerator SkewDiagGenerator::zeros(int dim, MatrixClass mc) {
  if (dim <= 0) throw DomainError("SkewDiagGenerator: dim must be positive");
  SkewDiagGenerator g;
  g.dim = dim;
  g.matrix_class = mc;
  if (mc == MatrixClass::full) {
    g.dense_params = Vector::Zero(Eigen::Index(dim) * dim);
  } else {
    if (has_skew(mc)) g.skew_params = Vector::Zero(Eigen::Index(dim) * (dim - 1) / 2);
    if (has_diag(mc)) g.diag_params = Vector::Zero(dim);
  }
  return g;
}

Eigen::Index SkewDiagGenerator::param_count() const {
  return skew_params.size() + diag_params.size() + dense_params.size();
}

Vector SkewDiagGenerator::params() const {
  Vector p(param_count());
  Eigen::Index at = 0;
  p.segment(at, skew_params.size()) = skew_params;
  at += skew_params.size();
  p.segment(at, diag_params.size()) = diag_params;
  at += diag_params.size();
  p.segment(at, dense_params.size()) = dense_params;
  return p;
}

void SkewDiagGenerator::set_params(const Vector& p) {
  if (p.size() != param_count())
    throw DomainError("SkewDiagGenerator::set_params: size mismatch");
  Eigen::Index at = 0;
  skew_params = p.segment(at, skew_params.size());
  at += skew_params.size();
  diag_params = p.segment(at, diag_params.size());
  at += diag_params.size();
  dense_params = p.segment(at, dense_params.size());
}

Matrix SkewDiagGenerator::materialize() const {
  Matrix A = Matrix::Zero(dim, dim);
  if (matrix_class == MatrixClass::full) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) A(i, j) = dense_params[Eigen::Index(i) * dim + j];
    return A;
  }
  if (has_skew(matrix_class)) {
    Eigen::Index at = 0;
    for (int i = 1; i < dim; ++i)
      for (int j = 0; j < i; ++j) {
        const double k = skew_params[at++];
        A(i, j) += k;
        A(j, i) -= k;
      }
  }
  if (has_diag(matrix_class))
    for (int i = 0; i < dim; ++i) A(i, i) += diag_params[i];
  return A;
}

Vector SkewDiagGenerator::pullback(const Matrix& grad_A) const {
  if (grad_A.rows() != dim || grad_A.cols() != dim)
    throw DomainError("SkewDiagGenerator::pullback: shape mismatch");
  Vector g(param_count());
  if (matrix_class == MatrixClass::full) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g[Eigen::Index(i) * dim + j] = grad_A(i, j);
    return g;
  }
  Eigen::Index at = 0;
  if (has_skew(matrix_class))
    for (int i = 1; i < dim; ++i)
      for (int j = 0; j < i; ++j) g[at++] = grad_A(i, j) - grad_A(j, i);
  if (has_diag(matrix_class))
    for (int i = 0; i < dim; ++i) g[at++] = grad_A(i, i);
  return g;
}

namespace {

// Degree-13 Pade coefficients for the matrix exponential.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix expm(const Matrix& A) {
  if (A.rows() != A.cols()) throw DomainError("expm: matrix must be square");
  const Eigen::Index n = A.rows();
  if (!A.allFinite()) throw NumericalError("expm: non-finite input");

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13)
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Matrix As = A * std::ldexp(1.0, -squarings);

  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = As * As;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U =
      As * (A6 * (kPade13[13] * A6 + kPade13[11] * A4 + kPade13[9] * A2) +
            kPade13[7] * A6 + kPade13[5] * A4 + kPade13[3] * A2 +
            kPade13[1] * I);
  const Matrix V =
      A6 * (kPade13[12] * A6 + kPade13[10] * A4 + kPade13[8] * A2) +
      kPade13[6] * A6 + kPade13[4] * A4 + kPade13[2] * A2 + kPade13[0] * I;

  Matrix F = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) F = F * F;
  return F;
}

std::pair<Matrix, Matrix> expm_frechet(const Matrix& A, const Matrix& E) {
  if (A.rows() != A.cols() || E.rows() != E.cols() || A.rows() != E.rows())
    throw DomainError("expm_frechet: shape mismatch");
  const Eigen::Index n = A.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = A;
  block.topRightCorner(n, n) = E;
  block.bottomRightCorner(n, n) = A;
  const Matrix F = expm(block);
  return {F.topLeftCorner(n, n), F.topRightCorner(n, n)};
}

Matrix delayed_expm(const Matrix& A, double delay, double t) {
  if (A.rows() != A.cols())
    throw DomainError("delayed_expm: matrix must be square");
  if (!(delay > 0.0)) throw DomainError("delayed_expm: delay must be > 0");
  if (t < -delay) throw DomainError("delayed_expm: t < -delay");
  const Eigen::Index dim = A.rows();

  const long n = static_cast<long>(std::floor(t / delay)) + 1;
  Matrix X = Matrix::Identity(dim, dim);
  Matrix P = Matrix::Identity(dim, dim);
  double kfact = 1.0;
  for (long k = 1; k <= n; ++k) {
    P = P * A;
    kfact *= static_cast<double>(k);
    const double base = t - static_cast<double>(k - 1) * delay;
    X += P * (std::pow(base, static_cast<double>(k)) / kfact);
  }
  return X;
}

Matrix delayed_expm_grad(const Matrix& A, double delay, double t,
                         const Matrix& upstream) {
  if (A.rows() != A.cols())
    throw DomainError("delayed_expm_grad: matrix must be square");
  if (upstream.rows() != A.rows() || upstream.cols() != A.cols())
    throw DomainError("delayed_expm_grad: upstream shape mismatch");
  if (!(delay > 0.0)) throw DomainError("delayed_expm_grad: delay must be > 0");
  if (t < -delay) throw DomainError("delayed_expm_grad: t < -delay");
  const Eigen::Index dim = A.rows();

  const long n = static_cast<long>(std::floor(t / delay)) + 1;
  Matrix grad = Matrix::Zero(dim, dim);
  if (n < 1) return grad;

  // Powers A^0 .. A^(n-1).
  std::vector<Matrix> pow(static_cast<std::size_t>(n));
  pow[0] = Matrix::Identity(dim, dim);
  for (long k = 1; k < n; ++k) pow[k] = pow[k - 1] * A;

  // d<U, A^k>/dA = sum_{j=0..k-1} (A^j)^T U (A^{k-1-j})^T
  double kfact = 1.0;
  for (long k = 1; k <= n; ++k) {
    kfact *= static_cast<double>(k);
    const double base = t - static_cast<double>(k - 1) * delay;
    const double coef = std::pow(base, static_cast<double>(k)) / kfact;
    if (coef == 0.0) continue;
    for (long j = 0; j < k; ++j)
      grad += coef * (pow[j].transpose() * upstream * pow[k - 1 - j].transpose());
  }
  return grad;
}

}  // namespace ltsf
