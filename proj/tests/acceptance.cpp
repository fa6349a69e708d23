// Acceptance harness: prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails. Tolerances are pinned in each check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ltsf/bench.hpp"
#include "ltsf/dynsys.hpp"

using namespace ltsf;

namespace {

int failures = 0;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void run(const char* name, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.ok = false;
    r.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("[%s] %s (%.1fs) %s\n", r.ok ? "PASS" : "FAIL", name, secs,
              r.detail.c_str());
  std::fflush(stdout);
  if (!r.ok) ++failures;
}

TrajectorySet random_set(int count, int len, int dim, std::uint64_t seed) {
  TrajectorySet set;
  set.count = count;
  set.len = len;
  set.dim = dim;
  set.values.resize(std::size_t(count) * len * dim);
  Rng rng(seed);
  for (auto& v : set.values) v = rng_normal(rng);
  return set;
}

double fd_gradient_error(LatentLinearODEModel& model, const TrajectorySet& data,
                         const std::vector<int>& indices, int horizon) {
  Vector grad;
  model.loss_and_grad(data, indices, horizon, grad);
  const Vector base = model.params();
  Vector fd(grad.size());
  Vector probe = base;
  Vector unused;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(base[i]));
    probe[i] = base[i] + h;
    model.set_params(probe);
    const double up = model.loss_and_grad(data, indices, horizon, unused);
    probe[i] = base[i] - h;
    model.set_params(probe);
    const double down = model.loss_and_grad(data, indices, horizon, unused);
    probe[i] = base[i];
    fd[i] = (up - down) / (2.0 * h);
  }
  model.set_params(base);
  return (fd - grad).cwiseAbs().maxCoeff() /
         std::max(1.0, grad.cwiseAbs().maxCoeff());
}

Matrix delayed_euler_oracle(const Matrix& A, double d, double t, double dt) {
  const int steps = int(std::lround(t / dt));
  const int lag = int(std::lround(d / dt));
  const int n = int(A.rows());
  std::vector<Matrix> hist(steps + 1);
  hist[0] = Matrix::Identity(n, n);
  for (int i = 0; i < steps; ++i) {
    const Matrix& delayed = i - lag < 0 ? hist[0] : hist[i - lag];
    hist[i + 1] = hist[i] + dt * (A * delayed);
  }
  return hist[steps];
}

Outcome c1_param_counts() {
  const bool ok = nlinear_param_count(96, 1000 - 96, 17) == 25095944 &&
                  nlinear_param_count(96, 2000 - 96, 3) == 1650768 &&
                  nlinear_param_count(96, 1440 - 96, 1) == 130368;
  return {ok, "counts 25095944 / 1650768 / 130368"};
}

Outcome c2_sinewave() {
  GeneratorSpec spec;
  spec.system = "sinewave";
  spec.seed = 20;
  spec.n_train = 1000;
  spec.n_test = 200;
  const TrajectorySet all = generate(spec);
  DatasetContainer c = make_container("sinewave", all, spec.n_train);
  if (c.test.len != 2000) return {false, "expected trajectory length 2000"};
  normalize_container(c);
  const FittedModel fitted =
      fit_model("nlinear", {{"lambda", "1e-6"}}, c, 96, 0);
  const double scaled = fitted.mse * 100.0;
  return {scaled < 0.05, "nlinear L=96 test mse x100 = " + fmt(scaled) +
                             " (need < 0.05)"};
}

Outcome c3_linear_recovery() {
  // ground-truth 4-D skew+diag system, spectral norm 0.45 <= 0.5
  Rng rng(41);
  Matrix K = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) K(i, j) = rng_uniform(rng, -1.0, 1.0);
  Vector diag(4);
  for (int i = 0; i < 4; ++i) diag[i] = rng_uniform(rng, -0.02, 0.0);
  Matrix A = K - K.transpose();
  A += diag.asDiagonal().toDenseMatrix();
  Eigen::JacobiSVD<Matrix> svd(A);
  A *= 0.45 / svd.singularValues()(0);
  const Matrix M = expm(A);

  const int len = 80;
  auto fill = [&](int count, std::uint64_t salt) {
    TrajectorySet set;
    set.count = count;
    set.len = len;
    set.dim = 4;
    set.values.resize(std::size_t(count) * len * 4);
    for (int i = 0; i < count; ++i) {
      Rng traj_rng(mix64(salt, std::uint64_t(i)));
      Vector h(4);
      for (int k = 0; k < 4; ++k) h[k] = rng_normal(traj_rng);
      for (int t = 0; t < len; ++t) {
        for (int k = 0; k < 4; ++k)
          set.values[(std::size_t(i) * len + t) * 4 + k] = h[k];
        h = M * h;
      }
    }
    return set;
  };
  const TrajectorySet train_set = fill(500, 1);
  const TrajectorySet test_set = fill(200, 2);

  LinodeConfig cfg;
  cfg.state_dim = 4;
  cfg.lookback = 16;
  cfg.horizon = 64;
  cfg.latent_dim = 4;
  cfg.matrix_class = MatrixClass::skew_plus_diag;
  cfg.encoder_kind = MapKind::affine;
  cfg.decoder_kind = MapKind::affine;
  auto model = LatentLinearODEModel::init(cfg, 7);

  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 32;
  tc.lr = 1e-2;
  tc.seed = 3;
  const TrainResult result = train(model, train_set, test_set, tc);
  return {result.best_mse < 1e-4,
          "best test mse = " + fmt(result.best_mse) + " at epoch " +
              std::to_string(result.best_epoch) + " (need < 1e-4)"};
}

Outcome c4_gradients() {
  const TrajectorySet data2 = random_set(4, 9, 2, 301);
  double worst = 0.0;
  auto probe = [&](int latent, MapKind enc, std::vector<int> enc_h,
                   MapKind dec, std::vector<int> dec_h, MatrixClass mc,
                   std::optional<double> delay, std::uint64_t seed) {
    LinodeConfig cfg;
    cfg.state_dim = 2;
    cfg.lookback = 4;
    cfg.horizon = 3;
    cfg.latent_dim = latent;
    cfg.matrix_class = mc;
    cfg.encoder_kind = enc;
    cfg.encoder_hidden = std::move(enc_h);
    cfg.decoder_kind = dec;
    cfg.decoder_hidden = std::move(dec_h);
    cfg.delay = delay;
    auto model = LatentLinearODEModel::init(cfg, seed);
    worst = std::max(worst, fd_gradient_error(model, data2, {0, 1, 2, 3}, 3));
  };
  probe(3, MapKind::affine, {}, MapKind::affine, {}, MatrixClass::full, {}, 11);
  probe(3, MapKind::affine, {}, MapKind::elu_mlp, {4},
        MatrixClass::skew_plus_diag, {}, 12);
  probe(8, MapKind::elu_mlp, {5}, MapKind::affine, {}, MatrixClass::skew_only,
        {}, 13);
  probe(3, MapKind::affine, {}, MapKind::affine, {},
        MatrixClass::skew_plus_diag, 1.5, 14);
  probe(8, MapKind::affine, {}, MapKind::elu_mlp, {6},
        MatrixClass::skew_plus_diag, 0.75, 15);
  return {worst < 1e-5,
          "max relative gradient error = " + fmt(worst) + " (need < 1e-5)"};
}

Outcome c5_matrix_exponential() {
  std::string detail;

  Matrix R(2, 2);
  R << 0.0, -M_PI, M_PI, 0.0;
  const double rot = (expm(R) + Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  detail += "pi-rotation " + fmt(rot);
  bool ok = rot < 1e-12;

  Rng rng(5);
  Matrix A(4, 4), E(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      A(i, j) = rng_uniform(rng, -0.5, 0.5);
      E(i, j) = rng_uniform(rng, -1.0, 1.0);
    }
  const auto [F, L] = expm_frechet(A, E);
  const double h = 1e-6;
  const Matrix fd = (expm(A + h * E) - expm(A - h * E)) / (2.0 * h);
  const double frechet = (L - fd).cwiseAbs().maxCoeff();
  detail += ", frechet-fd " + fmt(frechet);
  ok = ok && frechet < 1e-6;

  Matrix K = Matrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < i; ++j) K(i, j) = rng_uniform(rng, -0.5, 0.5);
  const Matrix S = K - K.transpose();
  const Matrix Mstep = expm(S);  // one unit of time per step
  Vector hvec(6);
  for (int i = 0; i < 6; ++i) hvec[i] = rng_normal(rng);
  const double r0 = hvec.norm();
  double drift = 0.0;
  for (int t = 1; t <= 100; ++t) {
    hvec = Mstep * hvec;
    drift = std::max(drift, std::abs(hvec.norm() - r0));
  }
  detail += ", norm drift " + fmt(drift);
  ok = ok && drift < 1e-10;

  Matrix D(2, 2);
  D << 0.0, -0.6, 0.4, -0.2;
  const double delay = 0.7;
  double delayed_err = 0.0;
  for (double t : {0.35, 1.05, 1.75, 2.45, 3.15, 3.49}) {
    const Matrix X = delayed_expm(D, delay, t);
    const Matrix O = delayed_euler_oracle(D, delay, t, 1e-4);
    delayed_err = std::max(delayed_err, (X - O).cwiseAbs().maxCoeff());
  }
  detail += ", delayed-vs-euler " + fmt(delayed_err);
  ok = ok && delayed_err < 1e-3;
  return {ok, detail};
}

Outcome c6_generator_physics() {
  std::string detail;

  GeneratorSpec lorenz;
  lorenz.system = "lorenz";
  lorenz.seed = 12;
  lorenz.n_train = 100;
  lorenz.n_test = 0;
  lorenz.traj_len = 2000;
  const TrajectorySet lz = gen_lorenz(lorenz);
  double lorenz_max = 0.0;
  for (double v : lz.values) lorenz_max = std::max(lorenz_max, std::abs(v));
  detail += "lorenz max |coord| " + fmt(lorenz_max);
  bool ok = lorenz_max < 100.0;

  double mg = 1.0;
  bool mg_fixed = true;
  for (int t = 0; t < 2000; ++t) {
    mg = mackey_glass_step(mg, 1.0, 0.1);
    mg_fixed = mg_fixed && mg == 1.0;
  }
  detail += std::string(", mg equilibrium ") + (mg_fixed ? "exact" : "broken");
  ok = ok && mg_fixed;

  const auto rhs = [](const Vector& v) {
    return lotka_volterra_rhs(v, 1.0, 0.1, 0.02, 0.5);
  };
  Vector fp(2);
  fp << 25.0, 10.0;
  for (int t = 0; t < 1000; ++t) fp = euler_step(rhs, fp, 1e-3);
  const double fp_err =
      std::max(std::abs(fp[0] - 25.0), std::abs(fp[1] - 10.0));
  detail += ", lv fixed-point drift " + fmt(fp_err);
  ok = ok && fp_err < 1e-12;

  const auto V = [](const Vector& v) {
    return 0.02 * v[0] - 0.5 * std::log(v[0]) + 0.1 * v[1] - std::log(v[1]);
  };
  Vector orbit(2);
  orbit << 50.0, 15.0;
  const double v0 = V(orbit);
  double vdrift = 0.0;
  for (int t = 0; t < 12000; ++t) {
    orbit = euler_step(rhs, orbit, 1e-3);
    vdrift = std::max(vdrift, std::abs(V(orbit) - v0));
  }
  detail += ", lv V drift " + fmt(vdrift / std::abs(v0));
  ok = ok && vdrift / std::abs(v0) < 0.01;

  const RowMajorMatrix ks_zero =
      ks_simulate(Vector::Zero(100), 5, 20, 0.01, 200.0);
  const bool ks_still = ks_zero.cwiseAbs().maxCoeff() == 0.0;
  detail += std::string(", ks zero-ic ") + (ks_still ? "exact" : "broken");
  ok = ok && ks_still;

  GeneratorSpec ks_spec;
  ks_spec.system = "ks";
  ks_spec.seed = 9;
  ks_spec.n_train = 1;
  ks_spec.n_test = 0;
  ks_spec.traj_len = 100;
  const TrajectorySet ks_set = gen_ks(ks_spec);
  const auto ks_traj = ks_set.trajectory(0);
  double ks_rise = 0.0;
  for (int f = 1; f < ks_set.len; ++f)
    ks_rise = std::max(ks_rise,
                       ks_traj.row(f).mean() - ks_traj.row(f - 1).mean());
  detail += ", ks mean rise " + fmt(ks_rise);
  ok = ok && ks_rise < 1e-3;

  Rng rng(31);
  RowMajorMatrix c0(64, 64);
  for (int a = 0; a < 64; ++a)
    for (int b = 0; b < 64; ++b) c0(a, b) = rng_uniform(rng, -0.05, 0.05);
  const RowMajorMatrix frames = ch_simulate(c0, 30, 5e-6, 1e-4);
  const double mean0 = frames.row(0).mean();
  double ch_drift = 0.0;
  for (int f = 1; f < 30; ++f)
    ch_drift = std::max(ch_drift, std::abs(frames.row(f).mean() - mean0));
  detail += ", ch mean drift " + fmt(ch_drift);
  ok = ok && ch_drift < 1e-12;

  const RowMajorMatrix flat = RowMajorMatrix::Constant(16, 16, 0.3);
  const RowMajorMatrix still = ch_simulate(flat, 10, 5e-6, 1e-4);
  const double ch_still = (still.array() - 0.3).abs().maxCoeff();
  detail += ", ch constant drift " + fmt(ch_still);
  ok = ok && ch_still < 1e-12;
  return {ok, detail};
}

Outcome c7_determinism_io() {
  std::string detail;

  GeneratorSpec spec;
  spec.system = "lorenz";
  spec.seed = 77;
  spec.n_train = 8;
  spec.n_test = 2;
  spec.traj_len = 120;
  const TrajectorySet one = generate(spec);
  spec.workers = 3;
  const TrajectorySet three = generate(spec);
  const bool workers_same = one.values == three.values;
  detail += std::string("workers bit-identical ") +
            (workers_same ? "yes" : "NO");
  bool ok = workers_same;

  const DatasetContainer c = make_container("lorenz", one, spec.n_train);
  const auto dir = std::filesystem::temp_directory_path();
  const auto p1 =
      dir / ("ltsf_acc_a_" + std::to_string(::getpid()) + ".ltsf");
  const auto p2 =
      dir / ("ltsf_acc_b_" + std::to_string(::getpid()) + ".ltsf");
  save_container(c, p1);
  const DatasetContainer back = load_container(p1);
  save_container(back, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::ostringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  const bool bytes_same = !b1.str().empty() && b1.str() == b2.str();
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  detail += std::string(", round-trip bytes ") + (bytes_same ? "equal" : "NO");
  ok = ok && bytes_same;

  DatasetContainer norm = c;
  normalize_container(norm);
  const StandardScaler stats = fit_scaler(norm.train);
  const double mean_err = stats.mean.cwiseAbs().maxCoeff();
  const double std_err = (stats.std.array() - 1.0).abs().maxCoeff();
  detail += ", scaler |mean| " + fmt(mean_err) + ", |std-1| " + fmt(std_err);
  ok = ok && mean_err < 1e-9 && std_err < 1e-9;
  return {ok, detail};
}

Outcome c8_dense_output() {
  LinodeConfig cfg;
  cfg.state_dim = 3;
  cfg.lookback = 2;
  cfg.horizon = 1000;
  cfg.latent_dim = 3;
  cfg.matrix_class = MatrixClass::skew_only;
  auto model = LatentLinearODEModel::init(cfg, 21);
  const Matrix A = model.generator().materialize();

  Rng rng(3);
  Vector z0(3);
  for (int i = 0; i < 3; ++i) z0[i] = rng_normal(rng);
  const double step = 0.5;
  Vector grid(1000);
  for (int k = 0; k < 1000; ++k) grid[k] = (k + 1) * step;
  const Matrix cached = model.propagate(z0, grid);
  double cache_err = 0.0;
  for (int k : {0, 9, 99, 499, 998, 999}) {
    const Vector direct = expm(A * grid[k]) * z0;
    cache_err = std::max(
        cache_err, (cached.row(k).transpose() - direct).cwiseAbs().maxCoeff());
  }
  bool ok = cache_err < 1e-9;

  LinodeConfig rot_cfg;
  rot_cfg.state_dim = 2;
  rot_cfg.lookback = 1;
  rot_cfg.horizon = 4;
  rot_cfg.latent_dim = 2;
  rot_cfg.matrix_class = MatrixClass::skew_only;
  auto rot = LatentLinearODEModel::init(rot_cfg, 2);
  const double theta = 0.37;
  Vector gp(1);
  gp << theta;
  rot.mutable_generator().set_params(gp);
  Vector unit(2);
  unit << 1.0, 0.0;
  Vector times(3);
  times << 2.5, 7.5, 12.5;  // fractional k + 1/2 queries
  const Matrix path = rot.propagate(unit, times);
  double frac_err = 0.0;
  for (int j = 0; j < 3; ++j) {
    frac_err = std::max(frac_err,
                        std::abs(path(j, 0) - std::cos(theta * times[j])));
    frac_err = std::max(frac_err,
                        std::abs(path(j, 1) - std::sin(theta * times[j])));
  }
  ok = ok && frac_err < 1e-9;
  return {ok, "cached-power error " + fmt(cache_err) + ", fractional-t error " +
                  fmt(frac_err) + " (need < 1e-9)"};
}

Outcome c9_baseline_identities() {
  const TrajectorySet data = random_set(30, 5, 2, 71);
  NLinearFitOptions opt;
  opt.lambda = 1e-6;
  const NLinearModel flat = nlinear_fit(data, 3, 2, NLinearVariant::B, opt);

  LatentNLinearConfig cfg;
  cfg.state_dim = 2;
  cfg.lookback = 3;
  cfg.horizon = 2;
  cfg.latent_dim = 2;
  cfg.encoder_hidden = {};
  cfg.decoder_hidden = {};
  auto latent = LatentNLinearModel::init(cfg, 1);
  latent.mutable_encoder().layers[0].W.setIdentity();
  latent.mutable_encoder().layers[0].b.setZero();
  latent.mutable_decoder().layers[0].W.setIdentity();
  latent.mutable_decoder().layers[0].b.setZero();
  latent.mutable_map() = flat.W;
  latent.mutable_bias() = flat.b;
  double collapse = 0.0;
  for (int i = 0; i < data.count; ++i) {
    const auto window = data.trajectory(i).topRows(3);
    collapse = std::max(collapse, (latent.forecast(window) -
                                   flat.predict(window))
                                      .cwiseAbs()
                                      .maxCoeff());
  }
  bool ok = collapse == 0.0;

  NLinearModel zero;
  zero.lookback = 3;
  zero.horizon = 2;
  zero.state_dim = 2;
  zero.W = RowMajorMatrix::Zero(4, 6);
  zero.b = Vector::Zero(4);
  latent.mutable_map().setZero();
  latent.mutable_bias().setZero();
  double reduce = 0.0;
  for (auto v : {NLinearVariant::A, NLinearVariant::B}) {
    zero.variant = v;
    const auto window = data.trajectory(0).topRows(3);
    const RowMajorMatrix hold = persistence_predict(window, 2);
    reduce = std::max(reduce,
                      (zero.predict(window) - hold).cwiseAbs().maxCoeff());
    reduce = std::max(reduce,
                      (latent.forecast(window) - hold).cwiseAbs().maxCoeff());
  }
  ok = ok && reduce == 0.0;

  const TrajectorySet noise = random_set(2000, 60, 1, 101);
  double sq = 0.0;
  long long n = 0;
  for (int i = 0; i < noise.count; ++i) {
    const auto traj = noise.trajectory(i);
    const RowMajorMatrix pred = persistence_predict(traj.topRows(1), 59);
    sq += (pred - traj.bottomRows(59)).squaredNorm();
    n += 59;
  }
  const double noise_mse = sq / double(n);
  ok = ok && n >= 100000 && noise_mse > 1.9 && noise_mse < 2.1;
  return {ok, "identity-collapse max diff " + fmt(collapse) +
                  ", zero-weight vs persistence diff " + fmt(reduce) +
                  ", white-noise persistence mse " + fmt(noise_mse) + " over " +
                  std::to_string(n) + " samples"};
}

Outcome c10_integrator_order() {
  const auto f = [](const Vector& x) { return x; };
  auto global_error = [&](bool use_rk4, double dt) {
    Vector x(1);
    x << 1.0;
    const int steps = int(std::lround(1.0 / dt));
    for (int i = 0; i < steps; ++i)
      x = use_rk4 ? rk4_step(f, x, dt) : euler_step(f, x, dt);
    return std::abs(x[0] - std::exp(1.0));
  };
  double slopes[2] = {0.0, 0.0};
  for (int which = 0; which < 2; ++which) {
    std::vector<double> errs;
    for (double dt : {0.1, 0.05, 0.025, 0.0125})
      errs.push_back(global_error(which == 1, dt));
    double slope = 0.0;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
      slope += std::log2(errs[i] / errs[i + 1]);
    slopes[which] = slope / double(errs.size() - 1);
  }
  const bool ok =
      std::abs(slopes[0] - 1.0) < 0.1 && std::abs(slopes[1] - 4.0) < 0.2;
  return {ok, "euler slope " + fmt(slopes[0]) + " (need 1 +/- 0.1), rk4 slope " +
                  fmt(slopes[1]) + " (need 4 +/- 0.2)"};
}

}  // namespace

int main() {
  run("C1 parameter-count oracle", c1_param_counts);
  run("C2 sinewave reproduction", c2_sinewave);
  run("C3 linear-system recovery", c3_linear_recovery);
  run("C4 gradient suite", c4_gradients);
  run("C5 matrix-exponential suite", c5_matrix_exponential);
  run("C6 generator physics suite", c6_generator_physics);
  run("C7 determinism and io", c7_determinism_io);
  run("C8 dense-output consistency", c8_dense_output);
  run("C9 baseline identities", c9_baseline_identities);
  run("C10 integrator order", c10_integrator_order);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
