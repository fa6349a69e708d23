#pragma once

#include "ltsf/linode.hpp"

namespace ltsf {

/// Which input the linear map sees. Both variants add the last observed
/// state back onto the mapped output.
///   A: map(flatten(X - 1 (x) x_L)) + 1 (x) x_L
///   B: map(flatten(X)) + 1 (x) x_L
enum class NLinearVariant { A, B };
NLinearVariant nlinear_variant_from_string(const std::string& s);
std::string to_string(NLinearVariant v);

Eigen::Index nlinear_param_count(int lookback, int horizon, int state_dim);

/// One dense map from the flattened lookback to the flattened horizon,
/// anchored at the last observation. Channel-mixing by construction.
struct NLinearModel {
  NLinearVariant variant = NLinearVariant::A;
  int lookback = 0;
  int horizon = 0;
  int state_dim = 0;
  RowMajorMatrix W;  // (T * D_S) x (L * D_S)
  Vector b;          // T * D_S

  RowMajorMatrix predict(const Eigen::Ref<const RowMajorMatrix>& window) const;
  RowMajorMatrix forecast(const Eigen::Ref<const RowMajorMatrix>& window) const {
    return predict(window);
  }
  Eigen::Index count_params() const {
    return nlinear_param_count(lookback, horizon, state_dim);
  }
};

struct NLinearFitOptions {
  double lambda = 0.0;
  /// 0 fits one (lookback, horizon) split per trajectory; a positive stride
  /// harvests every window at that stride from each trajectory, for imported
  /// series where trajectories overlap anyway.
  int window_stride = 0;
};

/// Exact ridge minimizer of the direct multi-step objective.
NLinearModel nlinear_fit(const TrajectorySet& train, int lookback, int horizon,
                         NLinearVariant variant,
                         const NLinearFitOptions& options = {});

/// Repeats the last observed state across the horizon.
RowMajorMatrix persistence_predict(const Eigen::Ref<const RowMajorMatrix>& window,
                                   int horizon);

struct LatentNLinearConfig {
  int state_dim = 1;
  int lookback = 0;
  int horizon = 0;
  int latent_dim = 1;
  MapKind encoder_kind = MapKind::affine;
  std::vector<int> encoder_hidden = {64};
  MapKind decoder_kind = MapKind::affine;
  std::vector<int> decoder_hidden = {64};
};

/// NLinear applied in a learned per-state latent space: each lookback state
/// is encoded to latent_dim, the flattened latent sequence goes through one
/// dense map, each horizon latent is decoded back, and the last observation
/// is added on (variant B anchoring). With identity encoder and decoder this
/// collapses to NLinearModel variant B. Trained with the shared Adam loop.
class LatentNLinearModel {
 public:
  static LatentNLinearModel init(const LatentNLinearConfig& cfg,
                                 std::uint64_t seed);

  const LatentNLinearConfig& config() const { return cfg_; }
  int lookback() const { return cfg_.lookback; }
  int horizon() const { return cfg_.horizon; }

  Eigen::Index param_count() const;
  Eigen::Index count_params() const { return param_count(); }
  Vector params() const;
  void set_params(const Vector& p);

  RowMajorMatrix forecast(const Eigen::Ref<const RowMajorMatrix>& window) const;

  double loss_and_grad(const TrajectorySet& data,
                       const std::vector<int>& indices, int horizon,
                       Vector& grad, WorkspaceStats* stats = nullptr) const;

  const EluMlp& encoder() const { return encoder_; }
  const EluMlp& decoder() const { return decoder_; }
  EluMlp& mutable_encoder() { return encoder_; }
  EluMlp& mutable_decoder() { return decoder_; }
  RowMajorMatrix& mutable_map() { return W_; }
  Vector& mutable_bias() { return b_; }

 private:
  LatentNLinearConfig cfg_;
  EluMlp encoder_;   // state_dim -> latent_dim, shared across time steps
  RowMajorMatrix W_;  // (T * d_l) x (L * d_l)
  Vector b_;
  EluMlp decoder_;   // latent_dim -> state_dim
};

ModelFile to_model_file(const NLinearModel& model);
NLinearModel nlinear_from_model_file(const ModelFile& file);
ModelFile to_model_file(const LatentNLinearModel& model);
LatentNLinearModel latent_nlinear_from_model_file(const ModelFile& file);

}  // namespace ltsf
