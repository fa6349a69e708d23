#include "ltsf/numkit.hpp"

#include <cmath>
#include <numbers>

namespace ltsf {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t Rng::next() {
  state_ += kGolden;
  return splitmix64_mix(state_);
}

std::uint64_t mix64(std::uint64_t key, std::uint64_t index) {
  return splitmix64_mix(key + kGolden * (index + 1));
}

double rng_uniform(Rng& rng, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("rng_uniform: lo > hi");
  const double u = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

double box_muller(double u1, double u2) {
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double rng_normal(Rng& rng) {
  double u1 = rng_uniform(rng, 0.0, 1.0);
  const double u2 = rng_uniform(rng, 0.0, 1.0);
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  return box_muller(u1, u2);
}

Fft::Fft(Eigen::Index n) : n_(n) {
  if (n <= 0) throw DomainError("Fft: length must be positive");
  const bool pow2 = (n & (n - 1)) == 0;
  m_ = pow2 ? n : [&] {
    Eigen::Index m = 1;
    while (m < 2 * n - 1) m <<= 1;
    return m;
  }();

  bitrev_.assign(static_cast<std::size_t>(m_), 0);
  for (Eigen::Index i = 1; i < m_; ++i)
    bitrev_[i] = (bitrev_[i >> 1] >> 1) | ((i & 1) ? m_ >> 1 : 0);

  twiddle_.resize(static_cast<std::size_t>(m_ / 2));
  for (Eigen::Index k = 0; k < m_ / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(m_);
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }

  if (!pow2) {
    // chirp_[t] = exp(-pi i t^2 / n); t^2 taken mod 2n keeps the argument small.
    chirp_.resize(n_);
    for (Eigen::Index t = 0; t < n_; ++t) {
      const std::uint64_t tt =
          (static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(t)) %
          static_cast<std::uint64_t>(2 * n_);
      const double a =
          -std::numbers::pi * static_cast<double>(tt) / static_cast<double>(n_);
      chirp_[t] = {std::cos(a), std::sin(a)};
    }
    ComplexVector b = ComplexVector::Zero(m_);
    b[0] = std::conj(chirp_[0]);
    for (Eigen::Index t = 1; t < n_; ++t)
      b[t] = b[m_ - t] = std::conj(chirp_[t]);
    pow2_transform(b.data(), false);
    filter_spectrum_ = std::move(b);
  }
}

void Fft::pow2_transform(std::complex<double>* a, bool inverse) const {
  const Eigen::Index m = m_;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = static_cast<Eigen::Index>(bitrev_[i]);
    if (i < j) std::swap(a[i], a[j]);
  }
  for (Eigen::Index len = 2; len <= m; len <<= 1) {
    const Eigen::Index stride = m / len;
    for (Eigen::Index start = 0; start < m; start += len) {
      for (Eigen::Index k = 0; k < len / 2; ++k) {
        std::complex<double> w = twiddle_[static_cast<std::size_t>(k * stride)];
        if (inverse) w = std::conj(w);
        const std::complex<double> u = a[start + k];
        const std::complex<double> v = a[start + k + len / 2] * w;
        a[start + k] = u + v;
        a[start + k + len / 2] = u - v;
      }
    }
  }
  if (inverse)
    for (Eigen::Index i = 0; i < m; ++i) a[i] /= static_cast<double>(m);
}

ComplexVector Fft::forward(const ComplexVector& x) const {
  if (x.size() != n_) throw DomainError("Fft::forward: length mismatch");
  if (n_ == m_) {
    ComplexVector out = x;
    pow2_transform(out.data(), false);
    return out;
  }
  // Bluestein: X_k = chirp_k * (a (*) b)_k with a_j = x_j chirp_j,
  // b_t = conj(chirp_t) extended symmetrically to a cyclic filter.
  ComplexVector a = ComplexVector::Zero(m_);
  for (Eigen::Index j = 0; j < n_; ++j) a[j] = x[j] * chirp_[j];
  pow2_transform(a.data(), false);
  a.array() *= filter_spectrum_.array();
  pow2_transform(a.data(), true);
  ComplexVector out(n_);
  for (Eigen::Index k = 0; k < n_; ++k) out[k] = a[k] * chirp_[k];
  return out;
}

ComplexVector Fft::inverse(const ComplexVector& x) const {
  ComplexVector out = forward(x.conjugate()).conjugate();
  out /= static_cast<double>(n_);
  return out;
}

ComplexVector dft(const ComplexVector& x) { return Fft(x.size()).forward(x); }

ComplexVector idft(const ComplexVector& x) { return Fft(x.size()).inverse(x); }

Matrix ridge_solve(const Matrix& X, const Matrix& Y, double lambda) {
  if (X.rows() != Y.rows())
    throw DomainError("ridge_solve: X and Y row counts differ");
  if (!(lambda >= 0.0)) throw DomainError("ridge_solve: lambda must be >= 0");
  Matrix gram = X.transpose() * X;
  gram.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "ridge_solve: normal equations are not positive definite "
        "(rank-deficient design with lambda = 0)");
  return llt.solve(X.transpose() * Y);
}

}  // namespace ltsf
