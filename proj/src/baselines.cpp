#include "ltsf/baselines.hpp"

#include <cstring>

namespace ltsf {

NLinearVariant nlinear_variant_from_string(const std::string& s) {
  if (s == "a" || s == "A") return NLinearVariant::A;
  if (s == "b" || s == "B") return NLinearVariant::B;
  throw DomainError("unknown nlinear variant: " + s);
}

std::string to_string(NLinearVariant v) {
  return v == NLinearVariant::A ? "a" : "b";
}

Eigen::Index nlinear_param_count(int lookback, int horizon, int state_dim) {
  const Eigen::Index in = Eigen::Index(lookback) * state_dim;
  const Eigen::Index out = Eigen::Index(horizon) * state_dim;
  return in * out + out;
}

RowMajorMatrix NLinearModel::predict(
    const Eigen::Ref<const RowMajorMatrix>& window) const {
  if (window.rows() != lookback || window.cols() != state_dim)
    throw DomainError("nlinear: window shape mismatch");
  const Vector anchor = window.row(lookback - 1).transpose();
  Vector flat(Eigen::Index(lookback) * state_dim);
  for (int t = 0; t < lookback; ++t)
    for (int d = 0; d < state_dim; ++d)
      flat[Eigen::Index(t) * state_dim + d] =
          variant == NLinearVariant::A ? window(t, d) - anchor[d] : window(t, d);
  const Vector out = W * flat + b;
  RowMajorMatrix pred(horizon, state_dim);
  for (int j = 0; j < horizon; ++j)
    for (int d = 0; d < state_dim; ++d)
      pred(j, d) = out[Eigen::Index(j) * state_dim + d] + anchor[d];
  return pred;
}

NLinearModel nlinear_fit(const TrajectorySet& train, int lookback, int horizon,
                         NLinearVariant variant,
                         const NLinearFitOptions& options) {
  if (lookback < 1 || horizon < 1)
    throw DomainError("nlinear_fit: lookback and horizon must be positive");
  if (train.len < lookback + horizon)
    throw DomainError("nlinear_fit: trajectories shorter than lookback + horizon");
  if (options.lambda < 0) throw DomainError("nlinear_fit: lambda must be >= 0");
  if (options.window_stride < 0)
    throw DomainError("nlinear_fit: window_stride must be >= 0");

  const int D = train.dim;
  const Eigen::Index in = Eigen::Index(lookback) * D;
  const Eigen::Index out = Eigen::Index(horizon) * D;

  std::vector<std::pair<int, int>> samples;  // (trajectory, window start)
  for (int i = 0; i < train.count; ++i) {
    if (options.window_stride == 0) {
      samples.emplace_back(i, 0);
    } else {
      for (int s = 0; s + lookback + horizon <= train.len;
           s += options.window_stride)
        samples.emplace_back(i, s);
    }
  }

  // Features plus an intercept column; the intercept is ridge-penalized like
  // any other weight, which is immaterial at the default lambda = 0.
  Matrix X(samples.size(), in + 1);
  Matrix Y(samples.size(), out);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto [i, s] = samples[r];
    const auto traj = train.trajectory(i);
    const auto anchor = traj.row(s + lookback - 1);
    for (int t = 0; t < lookback; ++t)
      for (int d = 0; d < D; ++d)
        X(r, Eigen::Index(t) * D + d) =
            variant == NLinearVariant::A ? traj(s + t, d) - anchor[d]
                                         : traj(s + t, d);
    X(r, in) = 1.0;
    for (int j = 0; j < horizon; ++j)
      for (int d = 0; d < D; ++d)
        Y(r, Eigen::Index(j) * D + d) = traj(s + lookback + j, d) - anchor[d];
  }

  const Matrix solution = ridge_solve(X, Y, options.lambda);
  NLinearModel model;
  model.variant = variant;
  model.lookback = lookback;
  model.horizon = horizon;
  model.state_dim = D;
  model.W = solution.topRows(in).transpose();
  model.b = solution.row(in).transpose();
  return model;
}

RowMajorMatrix persistence_predict(
    const Eigen::Ref<const RowMajorMatrix>& window, int horizon) {
  if (window.rows() < 1) throw DomainError("persistence: empty window");
  if (horizon < 1) throw DomainError("persistence: horizon must be positive");
  return window.row(window.rows() - 1).replicate(horizon, 1);
}

LatentNLinearModel LatentNLinearModel::init(const LatentNLinearConfig& cfg,
                                            std::uint64_t seed) {
  if (cfg.state_dim <= 0 || cfg.lookback <= 0 || cfg.horizon <= 0 ||
      cfg.latent_dim < 1)
    throw DomainError("latent nlinear: dimensions must be positive");
  LatentNLinearModel m;
  m.cfg_ = cfg;
  // Draws happen in parameter order: encoder, map, decoder; biases are zero.
  Rng rng(seed);
  const std::vector<int> none;
  m.encoder_ = EluMlp::make(
      cfg.state_dim,
      cfg.encoder_kind == MapKind::affine ? none : cfg.encoder_hidden,
      cfg.latent_dim, rng);
  const Eigen::Index in = Eigen::Index(cfg.lookback) * cfg.latent_dim;
  const Eigen::Index out = Eigen::Index(cfg.horizon) * cfg.latent_dim;
  m.W_.resize(out, in);
  const double r = std::sqrt(6.0 / double(in + out));
  for (Eigen::Index i = 0; i < out; ++i)
    for (Eigen::Index j = 0; j < in; ++j) m.W_(i, j) = rng_uniform(rng, -r, r);
  m.b_ = Vector::Zero(out);
  m.decoder_ = EluMlp::make(
      cfg.latent_dim,
      cfg.decoder_kind == MapKind::affine ? none : cfg.decoder_hidden,
      cfg.state_dim, rng);
  return m;
}

Eigen::Index LatentNLinearModel::param_count() const {
  return encoder_.param_count() + W_.size() + b_.size() +
         decoder_.param_count();
}

Vector LatentNLinearModel::params() const {
  Vector p(param_count());
  Eigen::Index at = 0;
  encoder_.write_params(p.segment(at, encoder_.param_count()));
  at += encoder_.param_count();
  std::memcpy(p.data() + at, W_.data(), sizeof(double) * W_.size());
  at += W_.size();
  p.segment(at, b_.size()) = b_;
  at += b_.size();
  decoder_.write_params(p.segment(at, decoder_.param_count()));
  return p;
}

void LatentNLinearModel::set_params(const Vector& p) {
  if (p.size() != param_count())
    throw DomainError("latent nlinear: parameter vector has wrong size");
  Eigen::Index at = 0;
  encoder_.read_params(p, at);
  at += encoder_.param_count();
  std::memcpy(W_.data(), p.data() + at, sizeof(double) * W_.size());
  at += W_.size();
  b_ = p.segment(at, b_.size());
  at += b_.size();
  decoder_.read_params(p, at);
}

RowMajorMatrix LatentNLinearModel::forecast(
    const Eigen::Ref<const RowMajorMatrix>& window) const {
  const int L = cfg_.lookback;
  const int dl = cfg_.latent_dim;
  if (window.rows() != L || window.cols() != cfg_.state_dim)
    throw DomainError("latent nlinear: window shape mismatch");
  Vector zflat(Eigen::Index(L) * dl);
  for (int t = 0; t < L; ++t)
    zflat.segment(Eigen::Index(t) * dl, dl) =
        encoder_.forward(window.row(t).transpose());
  const Vector u = W_ * zflat + b_;
  const Vector anchor = window.row(L - 1).transpose();
  RowMajorMatrix pred(cfg_.horizon, cfg_.state_dim);
  for (int j = 0; j < cfg_.horizon; ++j)
    pred.row(j) =
        (decoder_.forward(u.segment(Eigen::Index(j) * dl, dl)) + anchor)
            .transpose();
  return pred;
}

double LatentNLinearModel::loss_and_grad(const TrajectorySet& data,
                                         const std::vector<int>& indices,
                                         int horizon, Vector& grad,
                                         WorkspaceStats* stats) const {
  const int L = cfg_.lookback;
  const int D = cfg_.state_dim;
  const int dl = cfg_.latent_dim;
  if (horizon <= 0 || horizon > cfg_.horizon)
    throw DomainError("latent nlinear: horizon out of range");
  if (data.len < L + horizon)
    throw DomainError("latent nlinear: trajectories shorter than lookback + horizon");
  if (data.dim != D) throw DomainError("latent nlinear: state dimension mismatch");
  if (indices.empty()) throw DomainError("latent nlinear: empty batch");
  for (int i : indices)
    if (i < 0 || i >= data.count)
      throw DomainError("latent nlinear: trajectory index out of range");

  grad = Vector::Zero(param_count());
  const Eigen::Index enc_n = encoder_.param_count();
  const Eigen::Index w_n = W_.size();
  const Eigen::Index b_n = b_.size();
  auto enc_grad = grad.segment(0, enc_n);
  Eigen::Map<RowMajorMatrix> dW(grad.data() + enc_n, W_.rows(), W_.cols());
  auto db = grad.segment(enc_n + w_n, b_n);
  auto dec_grad = grad.segment(enc_n + w_n + b_n, decoder_.param_count());

  const double scale = 1.0 / (double(indices.size()) * horizon * D);
  double loss = 0.0;

  std::vector<std::vector<Vector>> enc_in(L), enc_pre(L);
  std::vector<Vector> dec_in, dec_pre;
  Vector zflat(Eigen::Index(L) * dl), dzflat(Eigen::Index(L) * dl);

  for (int idx : indices) {
    const auto traj = data.trajectory(idx);
    for (int t = 0; t < L; ++t)
      zflat.segment(Eigen::Index(t) * dl, dl) = encoder_.forward_cached(
          traj.row(t).transpose(), enc_in[t], enc_pre[t]);
    const Vector anchor = traj.row(L - 1).transpose();
    dzflat.setZero();
    for (int j = 0; j < horizon; ++j) {
      const auto Wj = W_.middleRows(Eigen::Index(j) * dl, dl);
      const Vector u = Wj * zflat + b_.segment(Eigen::Index(j) * dl, dl);
      const Vector y = decoder_.forward_cached(u, dec_in, dec_pre) + anchor;
      Vector err = y - traj.row(L + j).transpose();
      loss += scale * err.squaredNorm();
      err *= 2.0 * scale;
      const Vector du = decoder_.backward(dec_in, dec_pre, err, dec_grad);
      dW.middleRows(Eigen::Index(j) * dl, dl).noalias() +=
          du * zflat.transpose();
      db.segment(Eigen::Index(j) * dl, dl) += du;
      dzflat.noalias() += Wj.transpose() * du;
    }
    for (int t = 0; t < L; ++t)
      encoder_.backward(enc_in[t], enc_pre[t],
                        dzflat.segment(Eigen::Index(t) * dl, dl), enc_grad);
  }

  if (stats) {
    stats->trajectory_cache_doubles = 0;
    std::size_t other = std::size_t(grad.size()) + std::size_t(zflat.size()) +
                        std::size_t(dzflat.size());
    for (int t = 0; t < L; ++t) {
      for (const auto& v : enc_in[t]) other += std::size_t(v.size());
      for (const auto& v : enc_pre[t]) other += std::size_t(v.size());
    }
    for (const auto& v : dec_in) other += std::size_t(v.size());
    for (const auto& v : dec_pre) other += std::size_t(v.size());
    stats->other_retained_doubles = other;
  }
  return loss;
}

ModelFile to_model_file(const NLinearModel& model) {
  ModelFile file;
  file.metadata["kind"] = "nlinear";
  file.metadata["variant"] = to_string(model.variant);
  file.metadata["lookback"] = std::to_string(model.lookback);
  file.metadata["horizon"] = std::to_string(model.horizon);
  file.metadata["state_dim"] = std::to_string(model.state_dim);
  Vector w(model.W.size());
  std::memcpy(w.data(), model.W.data(), sizeof(double) * model.W.size());
  file.groups.emplace_back("W", std::move(w));
  file.groups.emplace_back("b", model.b);
  return file;
}

NLinearModel nlinear_from_model_file(const ModelFile& file) {
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = file.metadata.find(key);
    if (it == file.metadata.end())
      throw DataError("model file: metadata is missing " + key);
    return it->second;
  };
  if (field("kind") != "nlinear")
    throw DataError("model file: not an nlinear checkpoint");
  NLinearModel model;
  model.variant = nlinear_variant_from_string(field("variant"));
  model.lookback = std::stoi(field("lookback"));
  model.horizon = std::stoi(field("horizon"));
  model.state_dim = std::stoi(field("state_dim"));
  const Eigen::Index in = Eigen::Index(model.lookback) * model.state_dim;
  const Eigen::Index out = Eigen::Index(model.horizon) * model.state_dim;
  if (file.groups.size() != 2 || file.groups[0].first != "W" ||
      file.groups[1].first != "b")
    throw DataError("model file: nlinear checkpoint needs groups W, b");
  if (file.groups[0].second.size() != in * out ||
      file.groups[1].second.size() != out)
    throw DataError("model file: nlinear group sizes do not match metadata");
  model.W.resize(out, in);
  std::memcpy(model.W.data(), file.groups[0].second.data(),
              sizeof(double) * model.W.size());
  model.b = file.groups[1].second;
  return model;
}

ModelFile to_model_file(const LatentNLinearModel& model) {
  const auto& cfg = model.config();
  ModelFile file;
  file.metadata["kind"] = "latent_nlinear";
  file.metadata["state_dim"] = std::to_string(cfg.state_dim);
  file.metadata["lookback"] = std::to_string(cfg.lookback);
  file.metadata["horizon"] = std::to_string(cfg.horizon);
  file.metadata["latent_dim"] = std::to_string(cfg.latent_dim);
  file.metadata["encoder"] = to_string(cfg.encoder_kind);
  file.metadata["decoder"] = to_string(cfg.decoder_kind);
  auto join = [](const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
      out += (i ? "," : "") + std::to_string(values[i]);
    return out;
  };
  if (cfg.encoder_kind == MapKind::elu_mlp)
    file.metadata["encoder_hidden"] = join(cfg.encoder_hidden);
  if (cfg.decoder_kind == MapKind::elu_mlp)
    file.metadata["decoder_hidden"] = join(cfg.decoder_hidden);
  file.groups.emplace_back("params", model.params());
  return file;
}

LatentNLinearModel latent_nlinear_from_model_file(const ModelFile& file) {
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = file.metadata.find(key);
    if (it == file.metadata.end())
      throw DataError("model file: metadata is missing " + key);
    return it->second;
  };
  if (field("kind") != "latent_nlinear")
    throw DataError("model file: not a latent nlinear checkpoint");
  auto split = [](const std::string& s) {
    std::vector<int> out;
    std::size_t at = 0;
    while (at < s.size()) {
      auto comma = s.find(',', at);
      if (comma == std::string::npos) comma = s.size();
      out.push_back(std::stoi(s.substr(at, comma - at)));
      at = comma + 1;
    }
    return out;
  };
  LatentNLinearConfig cfg;
  cfg.state_dim = std::stoi(field("state_dim"));
  cfg.lookback = std::stoi(field("lookback"));
  cfg.horizon = std::stoi(field("horizon"));
  cfg.latent_dim = std::stoi(field("latent_dim"));
  cfg.encoder_kind = map_kind_from_string(field("encoder"));
  cfg.decoder_kind = map_kind_from_string(field("decoder"));
  cfg.encoder_hidden = cfg.encoder_kind == MapKind::elu_mlp
                           ? split(field("encoder_hidden"))
                           : std::vector<int>{};
  cfg.decoder_hidden = cfg.decoder_kind == MapKind::elu_mlp
                           ? split(field("decoder_hidden"))
                           : std::vector<int>{};
  LatentNLinearModel model = LatentNLinearModel::init(cfg, 0);
  if (file.groups.size() != 1 || file.groups[0].first != "params" ||
      file.groups[0].second.size() != model.param_count())
    throw DataError("model file: latent nlinear checkpoint needs one params group");
  model.set_params(file.groups[0].second);
  return model;
}

}  // namespace ltsf
