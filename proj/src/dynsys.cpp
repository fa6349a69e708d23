#include "ltsf/dynsys.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace ltsf {

namespace {

double get_override(const GeneratorSpec& spec, const char* key, double fallback) {
  const auto it = spec.overrides.find(key);
  return it == spec.overrides.end() ? fallback : it->second;
}

void check_overrides(const GeneratorSpec& spec,
                     std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.overrides) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw DomainError("unknown override '" + key + "' for system " +
                        spec.system);
  }
}

TrajectorySet make_set(const GeneratorSpec& spec, int len, int dim, double dt) {
  if (spec.n_train < 0 || spec.n_test < 0 || spec.n_train + spec.n_test == 0)
    throw DomainError("generator: need a positive trajectory count");
  if (len <= 0) throw DomainError("generator: traj_len must be positive");
  TrajectorySet out;
  out.system = spec.system;
  out.seed = spec.seed;
  out.dt = dt;
  out.count = spec.n_train + spec.n_test;
  out.len = len;
  out.dim = dim;
  out.values.assign(std::size_t(out.count) * len * dim, 0.0);
  return out;
}

/// Runs fn(i) for i in [0, total), sliced across up to `workers` threads.
/// Each index writes only its own output slice, so the result is identical
/// for every worker count. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(int total, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, total));
  if (workers == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = cursor.fetch_add(1); i < total && !failed.load();
           i = cursor.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void check_finite(const double* data, std::size_t count,
                  const std::string& system, int trajectory) {
  for (std::size_t i = 0; i < count; ++i)
    if (!std::isfinite(data[i]))
      throw NumericalError(system + ": non-finite value in trajectory " +
                           std::to_string(trajectory));
}

int resolve_len(const GeneratorSpec& spec, int fallback) {
  return spec.traj_len > 0 ? spec.traj_len : fallback;
}

}  // namespace

SystemInfo system_info(const std::string& system) {
  if (system == "sinewave") return {1, 2000};
  if (system == "mackey_glass") return {1, 2000};
  if (system == "lorenz") return {3, 2000};
  if (system == "lotka_volterra") return {2, 2000};
  if (system == "ks") return {100, 1000};
  if (system == "cahn_hilliard") return {256, 1000};
  throw DomainError("unknown system: " + system);
}

TrajectorySet gen_sinewave(const GeneratorSpec& spec) {
  check_overrides(spec, {"freq1", "freq2", "phase_lo", "phase_hi"});
  const double w1 = get_override(spec, "freq1", 0.2);
  const double w2 = get_override(spec, "freq2", 0.3);
  const double plo = get_override(spec, "phase_lo", 0.0);
  const double phi = get_override(spec, "phase_hi", 1.0);
  const int len = resolve_len(spec, 2000);
  TrajectorySet out = make_set(spec, len, 1, 1.0);
  parallel_for(out.count, spec.workers, [&](int i) {
    Rng rng(mix64(spec.seed, std::uint64_t(i)));
    const double phase = rng_uniform(rng, plo, phi);
    auto traj = out.trajectory(i);
    for (int j = 0; j < len; ++j)
      traj(j, 0) = std::sin(w1 * j + phase) + std::sin(w2 * j + phase);
  });
  return out;
}

double mackey_glass_step(double y, double ytau, double dt) {
  const double y2 = ytau * ytau;
  const double y4 = y2 * y2;
  const double y8 = y4 * y4;
  const double pow10 = y8 * y2;
  return y + dt * (0.2 * ytau / (1.0 + pow10) - 0.1 * y);
}

TrajectorySet gen_mackey_glass(const GeneratorSpec& spec) {
  check_overrides(spec, {"tau", "dt", "hist_lo", "hist_hi"});
  const double tau = get_override(spec, "tau", 25.0);
  const double dt = get_override(spec, "dt", 0.1);
  const double hlo = get_override(spec, "hist_lo", 1.19);
  const double hhi = get_override(spec, "hist_hi", 1.21);
  const int hist_len = static_cast<int>(std::lround(tau / dt));
  if (hist_len <= 0) throw DomainError("mackey_glass: tau/dt must be >= 1");
  const int len = resolve_len(spec, 2000);
  TrajectorySet out = make_set(spec, len, 1, dt);
  parallel_for(out.count, spec.workers, [&](int i) {
    Rng rng(mix64(spec.seed, std::uint64_t(i)));
    // Ring of the last hist_len values; ring[head] is y(t - tau).
    std::vector<double> ring(hist_len);
    for (int k = 0; k < hist_len; ++k) ring[k] = rng_uniform(rng, hlo, hhi);
    double y = ring[hist_len - 1];
    auto traj = out.trajectory(i);
    traj(0, 0) = y;
    int head = 0;
    for (int t = 1; t < len; ++t) {
      const double ytau = ring[head];
      ring[head] = y;
      head = (head + 1) % hist_len;
      y = mackey_glass_step(y, ytau, dt);
      traj(t, 0) = y;
    }
    check_finite(traj.data(), std::size_t(len), spec.system, i);
  });
  return out;
}

Vector lorenz_rhs(const Vector& x, double sigma, double rho, double beta) {
  Vector d(3);
  d[0] = sigma * (x[1] - x[0]);
  d[1] = x[0] * (rho - x[2]) - x[1];
  d[2] = x[0] * x[1] - beta * x[2];
  return d;
}

TrajectorySet gen_lorenz(const GeneratorSpec& spec) {
  check_overrides(spec, {"sigma", "rho", "beta", "dt", "ic_std"});
  const double sigma = get_override(spec, "sigma", 10.0);
  const double rho = get_override(spec, "rho", 28.0);
  const double beta = get_override(spec, "beta", 8.0 / 3.0);
  const double dt = get_override(spec, "dt", 0.01);
  const double ic_std = get_override(spec, "ic_std", 0.001);
  const int len = resolve_len(spec, 2000);
  TrajectorySet out = make_set(spec, len, 3, dt);
  parallel_for(out.count, spec.workers, [&](int i) {
    Rng rng(mix64(spec.seed, std::uint64_t(i)));
    Vector x(3);
    x << 0.0, -0.01, 9.0;
    for (int d = 0; d < 3; ++d) x[d] += ic_std * rng_normal(rng);
    auto traj = out.trajectory(i);
    const auto rhs = [&](const Vector& v) { return lorenz_rhs(v, sigma, rho, beta); };
    for (int t = 0; t < len; ++t) {
      traj.row(t) = x.transpose();
      x = euler_step(rhs, x, dt);
    }
    check_finite(traj.data(), std::size_t(len) * 3, spec.system, i);
  });
  return out;
}

Vector lotka_volterra_rhs(const Vector& x, double alpha, double beta,
                          double delta, double gamma) {
  Vector d(2);
  d[0] = alpha * x[0] - beta * x[0] * x[1];
  d[1] = delta * x[0] * x[1] - gamma * x[1];
  return d;
}

TrajectorySet gen_lotka_volterra(const GeneratorSpec& spec) {
  check_overrides(spec, {"alpha", "beta", "delta", "gamma", "dt", "noise_amp",
                         "x_lo", "x_hi", "y_lo", "y_hi"});
  const double alpha = get_override(spec, "alpha", 1.0);
  const double beta = get_override(spec, "beta", 0.1);
  const double delta = get_override(spec, "delta", 0.02);
  const double gamma = get_override(spec, "gamma", 0.5);
  const double dt = get_override(spec, "dt", 0.01);
  const double amp = get_override(spec, "noise_amp", 0.002);
  const double xlo = get_override(spec, "x_lo", 50.0);
  const double xhi = get_override(spec, "x_hi", 150.0);
  const double ylo = get_override(spec, "y_lo", 10.0);
  const double yhi = get_override(spec, "y_hi", 30.0);
  const int len = resolve_len(spec, 2000);
  TrajectorySet out = make_set(spec, len, 2, dt);
  std::atomic<long> regenerated{0};
  parallel_for(out.count, spec.workers, [&](int i) {
    constexpr int kMaxAttempts = 100;
    auto traj = out.trajectory(i);
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts)
        throw NumericalError("lotka_volterra: trajectory " + std::to_string(i) +
                             " kept underflowing");
      Rng rng(mix64(mix64(spec.seed, std::uint64_t(i)), std::uint64_t(attempt)));
      Vector x(2);
      x[0] = rng_uniform(rng, xlo, xhi);
      x[1] = rng_uniform(rng, ylo, yhi);
      bool ok = true;
      for (int t = 0; t < len; ++t) {
        if (!(x[0] > 0.0) || !(x[1] > 0.0) || !x.allFinite()) {
          ok = false;
          break;
        }
        traj.row(t) = x.transpose();
        const double a = spec.noise_enabled
                             ? rng_uniform(rng, alpha - amp, alpha + amp)
                             : alpha;
        x = euler_step(
            [&](const Vector& v) {
              return lotka_volterra_rhs(v, a, beta, delta, gamma);
            },
            x, dt);
      }
      if (ok) break;
      regenerated.fetch_add(1);
    }
  });
  out.regenerated = regenerated.load();
  return out;
}

namespace {

ComplexVector to_complex(const Vector& x) {
  ComplexVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = {x[i], 0.0};
  return out;
}

}  // namespace

RowMajorMatrix ks_simulate(const Vector& u0, int frames, int save_every,
                           double dt, double domain) {
  const Eigen::Index n = u0.size();
  if (n < 4) throw DomainError("ks_simulate: grid too small");
  if (frames <= 0 || save_every <= 0 || !(dt > 0.0) || !(domain > 0.0))
    throw DomainError("ks_simulate: bad arguments");
  const Fft plan(n);

  ComplexVector ik(n);
  Vector lin(n);
  Vector mask(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    long ms = m < (n + 1) / 2 ? long(m) : long(m) - long(n);
    const double k = 2.0 * std::numbers::pi * double(ms) / domain;
    const bool nyquist = (n % 2 == 0) && m == n / 2;
    ik[m] = {0.0, nyquist ? 0.0 : k};
    const double k2 = k * k;
    lin[m] = k2 - k2 * k2;
    mask[m] = 3 * std::abs(ms) <= n ? 1.0 : 0.0;
  }

  const auto rhs = [&](const ComplexVector& uh) {
    ComplexVector v = uh.cwiseProduct(ik);
    for (Eigen::Index m = 0; m < n; ++m) v[m] *= mask[m];
    const ComplexVector ux = plan.inverse(v);
    ComplexVector sq(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      const double r = ux[m].real();
      sq[m] = {r * r, 0.0};
    }
    ComplexVector q = plan.forward(sq);
    ComplexVector out(n);
    for (Eigen::Index m = 0; m < n; ++m)
      out[m] = lin[m] * uh[m] - 0.5 * mask[m] * q[m];
    return out;
  };

  RowMajorMatrix result(frames, n);
  result.row(0) = u0.transpose();
  ComplexVector uh = plan.forward(to_complex(u0));
  for (int f = 1; f < frames; ++f) {
    for (int s = 0; s < save_every; ++s) {
      const ComplexVector k1 = rhs(uh);
      const ComplexVector k2 = rhs(uh + 0.5 * dt * k1);
      const ComplexVector k3 = rhs(uh + 0.5 * dt * k2);
      const ComplexVector k4 = rhs(uh + dt * k3);
      uh += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const ComplexVector u = plan.inverse(uh);
    for (Eigen::Index m = 0; m < n; ++m) result(f, m) = u[m].real();
    if (!result.row(f).allFinite())
      throw NumericalError("ks: non-finite field at frame " + std::to_string(f));
  }
  return result;
}

TrajectorySet gen_ks(const GeneratorSpec& spec) {
  check_overrides(spec, {"dt", "domain", "save_every", "grid"});
  const double dt = get_override(spec, "dt", 0.01);
  const double domain = get_override(spec, "domain", 200.0);
  const int save_every = int(get_override(spec, "save_every", 20.0));
  const int grid = int(get_override(spec, "grid", 100.0));
  const int len = resolve_len(spec, 1000);
  TrajectorySet out = make_set(spec, len, grid, dt * save_every);
  parallel_for(out.count, spec.workers, [&](int i) {
    Rng rng(mix64(spec.seed, std::uint64_t(i)));
    // Weighted sin/cos of x pi / {32, 16, 8, 4}; draw order sin, cos per scale.
    Vector u0 = Vector::Zero(grid);
    for (double denom : {32.0, 16.0, 8.0, 4.0}) {
      const double ws = rng_uniform(rng, -1.0, 1.0);
      const double wc = rng_uniform(rng, -1.0, 1.0);
      for (int g = 0; g < grid; ++g) {
        const double x = domain * double(g) / double(grid);
        const double y = x * std::numbers::pi / denom;
        u0[g] += ws * std::sin(y) + wc * std::cos(y);
      }
    }
    out.trajectory(i) = ks_simulate(u0, len, save_every, dt, domain);
  });
  return out;
}

namespace {

using ComplexGrid = Eigen::Matrix<std::complex<double>, Eigen::Dynamic,
                                  Eigen::Dynamic, Eigen::RowMajor>;

ComplexGrid fft2(const Fft& plan, const ComplexGrid& in, bool inverse) {
  const Eigen::Index n = in.rows();
  ComplexGrid out(n, n);
  ComplexVector buf(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    buf = in.row(r).transpose();
    out.row(r) = (inverse ? plan.inverse(buf) : plan.forward(buf)).transpose();
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    buf = out.col(c);
    out.col(c) = inverse ? plan.inverse(buf) : plan.forward(buf);
  }
  return out;
}

}  // namespace

RowMajorMatrix ch_simulate(const RowMajorMatrix& c0, int frames, double dt,
                           double kappa) {
  const Eigen::Index side = c0.rows();
  if (side != c0.cols() || side < 4)
    throw DomainError("ch_simulate: field must be square");
  if (frames <= 0 || !(dt > 0.0) || !(kappa > 0.0))
    throw DomainError("ch_simulate: bad arguments");
  const Fft plan(side);

  Vector ksq(side);
  for (Eigen::Index m = 0; m < side; ++m) {
    const long ms = m < (side + 1) / 2 ? long(m) : long(m) - long(side);
    const double k = 2.0 * std::numbers::pi * double(ms);
    ksq[m] = k * k;
  }
  RowMajorMatrix k2(side, side), denom(side, side);
  for (Eigen::Index a = 0; a < side; ++a)
    for (Eigen::Index b = 0; b < side; ++b) {
      k2(a, b) = ksq[a] + ksq[b];
      denom(a, b) = 1.0 - dt * k2(a, b) + dt * kappa * k2(a, b) * k2(a, b);
    }

  RowMajorMatrix result(frames, side * side);
  for (Eigen::Index a = 0; a < side; ++a)
    for (Eigen::Index b = 0; b < side; ++b) result(0, a * side + b) = c0(a, b);

  RowMajorMatrix c = c0;
  ComplexGrid chat = fft2(plan, c.cast<std::complex<double>>(), false);
  for (int f = 1; f < frames; ++f) {
    const RowMajorMatrix cubed = c.array().cube().matrix();
    const ComplexGrid fhat = fft2(plan, cubed.cast<std::complex<double>>(), false);
    for (Eigen::Index a = 0; a < side; ++a)
      for (Eigen::Index b = 0; b < side; ++b)
        chat(a, b) = (chat(a, b) - dt * k2(a, b) * fhat(a, b)) / denom(a, b);
    const ComplexGrid back = fft2(plan, chat, true);
    c = back.real();
    for (Eigen::Index a = 0; a < side; ++a)
      for (Eigen::Index b = 0; b < side; ++b) result(f, a * side + b) = c(a, b);
    if (!c.allFinite())
      throw NumericalError("cahn_hilliard: non-finite field at frame " +
                           std::to_string(f));
  }
  return result;
}

TrajectorySet gen_cahn_hilliard(const GeneratorSpec& spec) {
  check_overrides(spec, {"dt", "kappa", "side", "subsample", "ic_amp"});
  const double dt = get_override(spec, "dt", 5e-6);
  const double kappa = get_override(spec, "kappa", 1e-4);
  const int side = int(get_override(spec, "side", 64.0));
  const int sub = int(get_override(spec, "subsample", 4.0));
  const double amp = get_override(spec, "ic_amp", 0.05);
  if (side % sub != 0) throw DomainError("cahn_hilliard: side % subsample != 0");
  const int osub = side / sub;
  const int len = resolve_len(spec, 1000);
  TrajectorySet out = make_set(spec, len, osub * osub, dt);
  parallel_for(out.count, spec.workers, [&](int i) {
    Rng rng(mix64(spec.seed, std::uint64_t(i)));
    RowMajorMatrix c0(side, side);
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) c0(a, b) = rng_uniform(rng, -amp, amp);
    const RowMajorMatrix frames = ch_simulate(c0, len, dt, kappa);
    auto traj = out.trajectory(i);
    for (int f = 0; f < len; ++f)
      for (int a = 0; a < osub; ++a)
        for (int b = 0; b < osub; ++b)
          traj(f, a * osub + b) = frames(f, (a * sub) * side + b * sub);
  });
  return out;
}

TrajectorySet generate(const GeneratorSpec& spec) {
  if (spec.system == "sinewave") return gen_sinewave(spec);
  if (spec.system == "mackey_glass") return gen_mackey_glass(spec);
  if (spec.system == "lorenz") return gen_lorenz(spec);
  if (spec.system == "lotka_volterra") return gen_lotka_volterra(spec);
  if (spec.system == "ks") return gen_ks(spec);
  if (spec.system == "cahn_hilliard") return gen_cahn_hilliard(spec);
  throw DomainError("unknown system: " + spec.system);
}

}  // namespace ltsf
