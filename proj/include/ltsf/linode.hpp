#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "ltsf/dataio.hpp"
#include "ltsf/matexp.hpp"

namespace ltsf {

enum class MapKind { affine, elu_mlp };
MapKind map_kind_from_string(const std::string& s);
std::string to_string(MapKind k);

/// Dense layer y = W x + b. W is stored row-major so the flat parameter
/// order is W row-major followed by b.
struct DenseLayer {
  RowMajorMatrix W;
  Vector b;
};

/// Dense stack with ELU between layers and a linear output. A single layer
/// is a plain affine map.
struct EluMlp {
  std::vector<DenseLayer> layers;

  /// Glorot-uniform weights drawn from rng in parameter order, zero biases.
  static EluMlp make(int in, const std::vector<int>& hidden, int out, Rng& rng);

  Eigen::Index param_count() const;
  int in_dim() const { return int(layers.front().W.cols()); }
  int out_dim() const { return int(layers.back().W.rows()); }

  Vector forward(const Vector& x) const;
  /// Forward keeping per-layer inputs and pre-activations for backward.
  Vector forward_cached(const Vector& x, std::vector<Vector>& inputs,
                        std::vector<Vector>& pre) const;
  /// Backpropagates dy, accumulating parameter gradients into grad (laid out
  /// like params()) and returning dL/dx.
  Vector backward(const std::vector<Vector>& inputs,
                  const std::vector<Vector>& pre, const Vector& dy,
                  Eigen::Ref<Vector> grad) const;

  void write_params(Eigen::Ref<Vector> out) const;
  void read_params(const Vector& in, Eigen::Index at);
};

struct LinodeConfig {
  int state_dim = 1;
  int lookback = 0;
  int horizon = 0;
  int latent_dim = 50;
  MatrixClass matrix_class = MatrixClass::skew_plus_diag;
  MapKind encoder_kind = MapKind::affine;
  std::vector<int> encoder_hidden = {64};  // used when encoder_kind == elu_mlp
  MapKind decoder_kind = MapKind::elu_mlp;
  std::vector<int> decoder_hidden = {64};
  double step_unit = 1.0;
  std::optional<double> delay;  // delayed propagation when set
};

/// Retained-buffer accounting for one loss_and_grad call, in doubles.
/// trajectory_cache covers buffers whose size grows with the horizon (the
/// latent path, per-step upstream gradients, cached delay operators); other
/// covers everything else, which stays O(latent_dim^2 + batch * latent_dim).
struct WorkspaceStats {
  std::size_t trajectory_cache_doubles = 0;
  std::size_t other_retained_doubles = 0;
};

/// Forecaster y(t) = decode(expm(A t) encode(x)) with A structured by a
/// SkewDiagGenerator; with a delay configured, expm(A t) is replaced by the
/// fundamental solution of x'(t) = A x(t - delay).
class LatentLinearODEModel {
 public:
  static LatentLinearODEModel init(const LinodeConfig& cfg, std::uint64_t seed);

  const LinodeConfig& config() const { return cfg_; }
  int lookback() const { return cfg_.lookback; }
  int horizon() const { return cfg_.horizon; }

  Eigen::Index param_count() const;
  Vector params() const;
  void set_params(const Vector& p);

  /// Latent initial condition from an L x D_S lookback window.
  Vector encode(const Eigen::Ref<const RowMajorMatrix>& window) const;

  /// Latent states at the query times, one row per time. A uniform grid
  /// t_j = j * times[0] reuses the cached step operator M = expm(A times[0]);
  /// other time sets evaluate expm(A t) (or its delayed counterpart) per time.
  Matrix propagate(const Vector& z0, const Vector& times) const;

  /// Decodes each latent row to a state row.
  RowMajorMatrix decode_path(const Matrix& latents) const;

  /// Full pipeline over the configured horizon grid (1..T) * step_unit.
  RowMajorMatrix forecast(const Eigen::Ref<const RowMajorMatrix>& window) const;

  /// Mean squared error over the selected trajectories and its exact
  /// parameter gradient. Uses lookback rows as input and the next `horizon`
  /// rows as targets (horizon <= configured horizon). grad is resized and
  /// laid out like params(): encoder, generator, decoder.
  double loss_and_grad(const TrajectorySet& data,
                       const std::vector<int>& indices, int horizon,
                       Vector& grad, WorkspaceStats* stats = nullptr) const;

  const SkewDiagGenerator& generator() const { return generator_; }
  const EluMlp& encoder() const { return encoder_; }
  const EluMlp& decoder() const { return decoder_; }
  EluMlp& mutable_encoder() { return encoder_; }
  EluMlp& mutable_decoder() { return decoder_; }
  SkewDiagGenerator& mutable_generator() { return generator_; }

 private:
  LinodeConfig cfg_;
  EluMlp encoder_;
  SkewDiagGenerator generator_;
  EluMlp decoder_;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int eval_every = 1;
  /// (horizon_fraction, epoch_fraction) stages; epoch e uses the first stage
  /// whose epoch_fraction covers (e+1)/epochs. Fractions must be
  /// nondecreasing and the final horizon_fraction must be 1.
  std::vector<std::pair<double, double>> curriculum = {
      {0.125, 0.1}, {0.25, 0.2}, {0.5, 0.3}, {1.0, 1.0}};
  std::uint64_t seed = 0;
};

struct TrainHistoryRow {
  int epoch;
  double train_loss;
  double test_mse;
  double test_mae;
};

struct TrainResult {
  Vector best_params;
  double best_mse = std::numeric_limits<double>::infinity();
  double best_mae = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  std::vector<TrainHistoryRow> history;
  bool diverged = false;
};

/// Full-horizon forecast metrics (mean squared / absolute error over every
/// test trajectory, horizon step and dimension).
template <class Model>
std::pair<double, double> evaluate_forecasts(const Model& model,
                                             const TrajectorySet& test) {
  const int L = model.lookback();
  const int T = model.horizon();
  if (test.len < L + T)
    throw DomainError("evaluate_forecasts: trajectories shorter than L + T");
  if (test.dim != model.config().state_dim)
    throw DomainError("evaluate_forecasts: state dimension mismatch");
  double se = 0.0, ae = 0.0;
  for (int i = 0; i < test.count; ++i) {
    const auto traj = test.trajectory(i);
    const RowMajorMatrix pred = model.forecast(traj.topRows(L));
    const auto diff = (pred - traj.middleRows(L, T)).eval();
    se += diff.squaredNorm();
    ae += diff.cwiseAbs().sum();
  }
  const double n = double(test.count) * T * test.dim;
  return {se / n, ae / n};
}

namespace detail {

class Adam {
 public:
  Adam(Eigen::Index n, const TrainConfig& cfg)
      : cfg_(cfg), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

  void step(Vector& params, const Vector& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    params -= (cfg_.lr / c1) * m_.cwiseQuotient(
                  ((v_ / c2).cwiseSqrt().array() + cfg_.eps).matrix());
  }

 private:
  const TrainConfig cfg_;
  double t_ = 0;
  Vector m_, v_;
};

int curriculum_horizon(const TrainConfig& cfg, int epoch, int full_horizon);
void validate_curriculum(const TrainConfig& cfg);
std::vector<int> shuffled_indices(int n, Rng& rng);

}  // namespace detail

/// Adam training loop with horizon curriculum and min-test-MSE checkpoint
/// selection. Expects normalised train/test blocks. The model is left at the
/// returned best parameters. A non-finite training loss, or a numerical
/// failure while computing it, stops the run and keeps the last finite
/// checkpoint.
template <class Model>
TrainResult train(Model& model, const TrajectorySet& train_set,
                  const TrajectorySet& test_set, const TrainConfig& cfg) {
  detail::validate_curriculum(cfg);
  if (cfg.epochs <= 0 || cfg.batch_size <= 0)
    throw DomainError("train: epochs and batch_size must be positive");
  if (train_set.len < model.lookback() + model.horizon())
    throw DomainError("train: trajectories shorter than lookback + horizon");

  TrainResult result;
  Vector params = model.params();
  detail::Adam adam(params.size(), cfg);
  Rng rng(cfg.seed);
  Vector grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const int horizon = detail::curriculum_horizon(cfg, epoch, model.horizon());
    const auto order = detail::shuffled_indices(train_set.count, rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (int at = 0; at < int(order.size()); at += cfg.batch_size) {
      const int extent = std::min<int>(cfg.batch_size, int(order.size()) - at);
      const std::vector<int> batch(order.begin() + at, order.begin() + at + extent);
      double loss = 0.0;
      try {
        loss = model.loss_and_grad(train_set, batch, horizon, grad);
      } catch (const NumericalError&) {
        result.diverged = true;
        break;
      }
      if (!std::isfinite(loss)) {
        result.diverged = true;
        break;
      }
      adam.step(params, grad);
      model.set_params(params);
      loss_sum += loss;
      ++batches;
    }
    if (result.diverged) break;
    if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs) {
      std::pair<double, double> eval;
      try {
        eval = evaluate_forecasts(model, test_set);
      } catch (const NumericalError&) {
        result.diverged = true;
        break;
      }
      const auto [mse, mae] = eval;
      result.history.push_back({epoch, loss_sum / std::max(batches, 1), mse, mae});
      if (mse < result.best_mse) {
        result.best_mse = mse;
        result.best_mae = mae;
        result.best_epoch = epoch;
        result.best_params = params;
      }
    }
  }
  if (result.best_epoch < 0) {
    result.best_params = params;
  } else {
    model.set_params(result.best_params);
  }
  return result;
}

// Model checkpoint file:
//   "LTSM"  u16 version=1  u32 metadata_len  metadata bytes
//   u32 group_count, then per group: u16 name_len, name, u64 count, f64 values
// Metadata is the same newline-separated key=value block the data container
// uses and must include kind=<model type>.
struct ModelFile {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Vector>> groups;
};

void save_model_file(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model_file(const std::filesystem::path& path);

ModelFile to_model_file(const LatentLinearODEModel& model);
LatentLinearODEModel linode_from_model_file(const ModelFile& file);

}  // namespace ltsf
