#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ltsf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error taxonomy. The CLI maps these onto process exit codes
// (usage = 1, data = 2, numerical = 3), library code just throws.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit generator (splitmix64).
///
/// State update and output mix, bit-exact on every platform:
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Rng(0).next() == 0xE220A8397B1DCDAF.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// The splitmix64 output mix applied to x (no state update).
std::uint64_t splitmix64_mix(std::uint64_t x);

/// Derived stream key: splitmix64_mix(key + 0x9E3779B97F4A7C15 * (index + 1)).
/// Used for per-trajectory substreams; nest calls for further levels
/// (e.g. mix64(mix64(seed, trajectory), attempt)).
std::uint64_t mix64(std::uint64_t key, std::uint64_t index);

/// Uniform draw on [lo, hi) from the top 53 bits of one next() call:
/// u = (next() >> 11) * 2^-53, result lo + u * (hi - lo).
/// Requires lo <= hi; lo == hi returns lo.
double rng_uniform(Rng& rng, double lo, double hi);

/// Box-Muller evaluation z = sqrt(-2 ln u1) * cos(2 pi u2), u1 in (0, 1].
double box_muller(double u1, double u2);

/// Standard normal draw. Consumes exactly two uniforms, in order u1 then u2,
/// with u1 clamped to at least 2^-53 before the log.
double rng_normal(Rng& rng);

/// Discrete Fourier transform plan for a fixed length.
/// Power-of-two lengths use an iterative radix-2 transform; other lengths go
/// through Bluestein's chirp-z reduction to a power-of-two convolution.
/// Plans are immutable after construction and safe to share across threads.
class Fft {
 public:
  explicit Fft(Eigen::Index n);

  Eigen::Index size() const { return n_; }

  /// X_k = sum_j x_j exp(-2 pi i j k / n), unscaled.
  ComplexVector forward(const ComplexVector& x) const;
  /// x_j = (1/n) sum_k X_k exp(+2 pi i j k / n).
  ComplexVector inverse(const ComplexVector& x) const;

 private:
  void pow2_transform(std::complex<double>* a, bool inverse) const;

  Eigen::Index n_;
  Eigen::Index m_ = 0;  // pow2 working length (== n_ when n_ is a power of two)
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // m_/2 forward roots
  ComplexVector chirp_;                        // Bluestein only
  ComplexVector filter_spectrum_;              // Bluestein only
};

ComplexVector dft(const ComplexVector& x);
ComplexVector idft(const ComplexVector& x);

/// Ridge least squares: solves (X^T X + lambda I) W = X^T Y by Cholesky.
/// X is n x p, Y is n x q, result p x q. lambda must be >= 0; a singular
/// system (lambda = 0 and rank-deficient X) raises NumericalError.
Matrix ridge_solve(const Matrix& X, const Matrix& Y, double lambda);

}  // namespace ltsf
