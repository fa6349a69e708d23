#include "ltsf/linode.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ltsf {

namespace {

double elu(double z) { return z > 0 ? z : std::expm1(z); }
double elu_grad(double z) { return z > 0 ? 1.0 : std::exp(z); }

Vector flatten_window(const Eigen::Ref<const RowMajorMatrix>& window) {
  Vector flat(window.rows() * window.cols());
  for (Eigen::Index t = 0; t < window.rows(); ++t)
    for (Eigen::Index d = 0; d < window.cols(); ++d)
      flat[t * window.cols() + d] = window(t, d);
  return flat;
}

bool uniform_grid(const Vector& times) {
  if (times.size() == 0 || times[0] <= 0) return false;
  for (Eigen::Index j = 0; j < times.size(); ++j) {
    const double expect = double(j + 1) * times[0];
    if (std::abs(times[j] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      return false;
  }
  return true;
}

}  // namespace

MapKind map_kind_from_string(const std::string& s) {
  if (s == "affine") return MapKind::affine;
  if (s == "elu_mlp") return MapKind::elu_mlp;
  throw DomainError("unknown map kind: " + s);
}

std::string to_string(MapKind k) {
  return k == MapKind::affine ? "affine" : "elu_mlp";
}

EluMlp EluMlp::make(int in, const std::vector<int>& hidden, int out, Rng& rng) {
  if (in <= 0 || out <= 0)
    throw DomainError("EluMlp: layer sizes must be positive");
  std::vector<int> sizes;
  sizes.push_back(in);
  for (int h : hidden) {
    if (h <= 0) throw DomainError("EluMlp: layer sizes must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(out);
  EluMlp mlp;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.W.resize(sizes[l + 1], sizes[l]);
    const double r = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j)
        layer.W(i, j) = rng_uniform(rng, -r, r);
    layer.b = Vector::Zero(sizes[l + 1]);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Eigen::Index EluMlp::param_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) n += layer.W.size() + layer.b.size();
  return n;
}

Vector EluMlp::forward(const Vector& x) const {
  Vector a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector z = layers[l].W * a + layers[l].b;
    if (l + 1 < layers.size())
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = elu(z[i]);
    a = std::move(z);
  }
  return a;
}

Vector EluMlp::forward_cached(const Vector& x, std::vector<Vector>& inputs,
                              std::vector<Vector>& pre) const {
  inputs.assign(layers.size(), Vector());
  pre.assign(layers.size(), Vector());
  Vector a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    inputs[l] = a;
    pre[l] = layers[l].W * a + layers[l].b;
    a = pre[l];
    if (l + 1 < layers.size())
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = elu(a[i]);
  }
  return a;
}

Vector EluMlp::backward(const std::vector<Vector>& inputs,
                        const std::vector<Vector>& pre, const Vector& dy,
                        Eigen::Ref<Vector> grad) const {
  Vector dz = dy;
  Eigen::Index tail = grad.size();
  for (int l = int(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[l];
    if (std::size_t(l) + 1 < layers.size())
      for (Eigen::Index i = 0; i < dz.size(); ++i)
        dz[i] *= elu_grad(pre[l][i]);
    const Eigen::Index nb = layer.b.size();
    const Eigen::Index nw = layer.W.size();
    tail -= nb;
    grad.segment(tail, nb) += dz;
    tail -= nw;
    Eigen::Map<RowMajorMatrix> dW(grad.data() + tail, layer.W.rows(),
                                  layer.W.cols());
    dW.noalias() += dz * inputs[l].transpose();
    dz = layer.W.transpose() * dz;
  }
  return dz;
}

void EluMlp::write_params(Eigen::Ref<Vector> out) const {
  Eigen::Index at = 0;
  for (const auto& layer : layers) {
    std::memcpy(out.data() + at, layer.W.data(),
                sizeof(double) * layer.W.size());
    at += layer.W.size();
    out.segment(at, layer.b.size()) = layer.b;
    at += layer.b.size();
  }
}

void EluMlp::read_params(const Vector& in, Eigen::Index at) {
  for (auto& layer : layers) {
    std::memcpy(layer.W.data(), in.data() + at,
                sizeof(double) * layer.W.size());
    at += layer.W.size();
    layer.b = in.segment(at, layer.b.size());
    at += layer.b.size();
  }
}

LatentLinearODEModel LatentLinearODEModel::init(const LinodeConfig& cfg,
                                                std::uint64_t seed) {
  if (cfg.state_dim <= 0 || cfg.lookback <= 0 || cfg.horizon <= 0 ||
      cfg.latent_dim <= 0)
    throw DomainError("linode: dimensions must be positive");
  if (cfg.step_unit <= 0) throw DomainError("linode: step_unit must be positive");
  if (cfg.delay && *cfg.delay <= 0)
    throw DomainError("linode: delay must be positive");

  LatentLinearODEModel m;
  m.cfg_ = cfg;
  // One stream seeds everything; draws happen in parameter order
  // (encoder, generator, decoder).
  Rng rng(seed);
  const std::vector<int> none;
  m.encoder_ = EluMlp::make(
      cfg.lookback * cfg.state_dim,
      cfg.encoder_kind == MapKind::affine ? none : cfg.encoder_hidden,
      cfg.latent_dim, rng);
  m.generator_ = SkewDiagGenerator::zeros(cfg.latent_dim, cfg.matrix_class);
  Vector gp(m.generator_.param_count());
  for (Eigen::Index i = 0; i < gp.size(); ++i)
    gp[i] = rng_uniform(rng, -0.01, 0.01);
  m.generator_.set_params(gp);
  m.decoder_ = EluMlp::make(
      cfg.latent_dim,
      cfg.decoder_kind == MapKind::affine ? none : cfg.decoder_hidden,
      cfg.state_dim, rng);
  return m;
}

Eigen::Index LatentLinearODEModel::param_count() const {
  return encoder_.param_count() + generator_.param_count() +
         decoder_.param_count();
}

Vector LatentLinearODEModel::params() const {
  Vector p(param_count());
  Eigen::Index at = 0;
  encoder_.write_params(p.segment(at, encoder_.param_count()));
  at += encoder_.param_count();
  p.segment(at, generator_.param_count()) = generator_.params();
  at += generator_.param_count();
  decoder_.write_params(p.segment(at, decoder_.param_count()));
  return p;
}

void LatentLinearODEModel::set_params(const Vector& p) {
  if (p.size() != param_count())
    throw DomainError("linode: parameter vector has wrong size");
  Eigen::Index at = 0;
  encoder_.read_params(p, at);
  at += encoder_.param_count();
  generator_.set_params(p.segment(at, generator_.param_count()));
  at += generator_.param_count();
  decoder_.read_params(p, at);
}

Vector LatentLinearODEModel::encode(
    const Eigen::Ref<const RowMajorMatrix>& window) const {
  if (window.rows() != cfg_.lookback || window.cols() != cfg_.state_dim)
    throw DomainError("linode: window shape mismatch");
  return encoder_.forward(flatten_window(window));
}

Matrix LatentLinearODEModel::propagate(const Vector& z0,
                                       const Vector& times) const {
  if (z0.size() != cfg_.latent_dim)
    throw DomainError("linode: latent state has wrong size");
  const Matrix A = generator_.materialize();
  Matrix out(times.size(), cfg_.latent_dim);
  if (cfg_.delay) {
    for (Eigen::Index j = 0; j < times.size(); ++j)
      out.row(j) = (delayed_expm(A, *cfg_.delay, times[j]) * z0).transpose();
    return out;
  }
  if (uniform_grid(times)) {
    const Matrix M = expm((A * times[0]).eval());
    Vector h = z0;
    for (Eigen::Index j = 0; j < times.size(); ++j) {
      h = M * h;
      out.row(j) = h.transpose();
    }
    return out;
  }
  for (Eigen::Index j = 0; j < times.size(); ++j)
    out.row(j) = (expm((A * times[j]).eval()) * z0).transpose();
  return out;
}

RowMajorMatrix LatentLinearODEModel::decode_path(const Matrix& latents) const {
  RowMajorMatrix out(latents.rows(), cfg_.state_dim);
  for (Eigen::Index j = 0; j < latents.rows(); ++j)
    out.row(j) = decoder_.forward(latents.row(j).transpose()).transpose();
  return out;
}

RowMajorMatrix LatentLinearODEModel::forecast(
    const Eigen::Ref<const RowMajorMatrix>& window) const {
  Vector times(cfg_.horizon);
  for (int j = 0; j < cfg_.horizon; ++j) times[j] = (j + 1) * cfg_.step_unit;
  return decode_path(propagate(encode(window), times));
}

double LatentLinearODEModel::loss_and_grad(const TrajectorySet& data,
                                           const std::vector<int>& indices,
                                           int horizon, Vector& grad,
                                           WorkspaceStats* stats) const {
  const int L = cfg_.lookback;
  const int D = cfg_.state_dim;
  const int dz = cfg_.latent_dim;
  if (horizon <= 0 || horizon > cfg_.horizon)
    throw DomainError("linode: horizon out of range");
  if (data.len < L + horizon)
    throw DomainError("linode: trajectories shorter than lookback + horizon");
  if (data.dim != D) throw DomainError("linode: state dimension mismatch");
  if (indices.empty()) throw DomainError("linode: empty batch");
  for (int i : indices)
    if (i < 0 || i >= data.count)
      throw DomainError("linode: trajectory index out of range");

  grad = Vector::Zero(param_count());
  const Eigen::Index enc_n = encoder_.param_count();
  const Eigen::Index gen_n = generator_.param_count();
  auto enc_grad = grad.segment(0, enc_n);
  auto dec_grad = grad.segment(enc_n + gen_n, decoder_.param_count());

  const Matrix A = generator_.materialize();
  const double scale =
      1.0 / (double(indices.size()) * horizon * D);

  // Per-step latent propagators for the delayed variant, shared by the batch.
  std::vector<Matrix> delay_ops;
  Matrix M, Mt;
  if (cfg_.delay) {
    delay_ops.reserve(horizon);
    for (int j = 1; j <= horizon; ++j)
      delay_ops.push_back(delayed_expm(A, *cfg_.delay, j * cfg_.step_unit));
  } else {
    M = expm((A * cfg_.step_unit).eval());
    Mt = M.transpose();
  }

  double loss = 0.0;
  Matrix dM = Matrix::Zero(dz, dz);            // ODE: dL/dM
  std::vector<Matrix> delay_up;                // DDE: per-step dL/dX_j
  if (cfg_.delay) delay_up.assign(horizon, Matrix::Zero(dz, dz));

  Matrix path(horizon + 1, dz);  // h_0..h_T for one trajectory
  Matrix up(horizon, dz);        // per-step dL/dh_j pulled through the decoder
  std::vector<Vector> enc_in, enc_pre, dec_in, dec_pre;

  for (int idx : indices) {
    const auto traj = data.trajectory(idx);
    const Vector x = flatten_window(traj.topRows(L));
    const Vector z0 = encoder_.forward_cached(x, enc_in, enc_pre);

    path.row(0) = z0.transpose();
    if (cfg_.delay) {
      for (int j = 1; j <= horizon; ++j)
        path.row(j) = (delay_ops[j - 1] * z0).transpose();
    } else {
      for (int j = 1; j <= horizon; ++j)
        path.row(j) = path.row(j - 1) * Mt;
    }

    // Decoder forward+backward per step; activations are recomputed inside
    // the loop so retained memory stays independent of the horizon.
    for (int j = 1; j <= horizon; ++j) {
      const Vector h = path.row(j).transpose();
      const Vector y = decoder_.forward_cached(h, dec_in, dec_pre);
      Vector err = y - traj.row(L + j - 1).transpose();
      loss += scale * err.squaredNorm();
      err *= 2.0 * scale;
      up.row(j - 1) = decoder_.backward(dec_in, dec_pre, err, dec_grad).transpose();
    }

    Vector gz0;
    if (cfg_.delay) {
      gz0 = Vector::Zero(dz);
      for (int j = 1; j <= horizon; ++j) {
        delay_up[j - 1].noalias() += up.row(j - 1).transpose() * z0.transpose();
        gz0.noalias() += delay_ops[j - 1].transpose() * up.row(j - 1).transpose();
      }
    } else {
      Vector gbar = Vector::Zero(dz);
      for (int j = horizon; j >= 1; --j) {
        gbar += up.row(j - 1).transpose();
        dM.noalias() += gbar * path.row(j - 1);
        gbar = Mt * gbar;  // entering step j-1 (dL/dh_{j-1} once j-1 is added)
      }
      gz0 = gbar;
    }
    encoder_.backward(enc_in, enc_pre, gz0, enc_grad);
  }

  // Pull the propagator gradient back to A, then to the generator params.
  Matrix dA;
  if (cfg_.delay) {
    dA = Matrix::Zero(dz, dz);
    for (int j = 1; j <= horizon; ++j)
      dA += delayed_expm_grad(A, *cfg_.delay, j * cfg_.step_unit,
                              delay_up[j - 1]);
  } else {
    // d expm(X) in direction E has adjoint E -> L(X^T, E), so
    // dL/dA = step_unit * L((A step_unit)^T, dL/dM), one Frechet evaluation.
    dA = cfg_.step_unit *
         expm_frechet((A * cfg_.step_unit).transpose().eval(), dM).second;
  }
  grad.segment(enc_n, gen_n) = generator_.pullback(dA);

  if (stats) {
    stats->trajectory_cache_doubles =
        std::size_t(path.size()) + std::size_t(up.size());
    for (const auto& op : delay_ops)
      stats->trajectory_cache_doubles += std::size_t(op.size());
    for (const auto& u : delay_up)
      stats->trajectory_cache_doubles += std::size_t(u.size());
    std::size_t other = std::size_t(A.size()) + std::size_t(dA.size()) +
                        std::size_t(M.size()) + std::size_t(Mt.size()) +
                        std::size_t(dM.size()) + std::size_t(grad.size());
    for (const auto& v : enc_in) other += std::size_t(v.size());
    for (const auto& v : enc_pre) other += std::size_t(v.size());
    for (const auto& v : dec_in) other += std::size_t(v.size());
    for (const auto& v : dec_pre) other += std::size_t(v.size());
    stats->other_retained_doubles = other;
  }
  return loss;
}

namespace detail {

void validate_curriculum(const TrainConfig& cfg) {
  if (cfg.curriculum.empty())
    throw DomainError("train: curriculum must not be empty");
  double prev_epoch = 0.0;
  for (const auto& [h_frac, e_frac] : cfg.curriculum) {
    if (h_frac <= 0 || h_frac > 1)
      throw DomainError("train: curriculum horizon fractions must be in (0, 1]");
    if (e_frac < prev_epoch || e_frac > 1)
      throw DomainError("train: curriculum epoch fractions must be nondecreasing in [0, 1]");
    prev_epoch = e_frac;
  }
  if (cfg.curriculum.back().first != 1.0)
    throw DomainError("train: final curriculum stage must use the full horizon");
  if (cfg.curriculum.back().second != 1.0)
    throw DomainError("train: final curriculum stage must cover the last epoch");
}

int curriculum_horizon(const TrainConfig& cfg, int epoch, int full_horizon) {
  const double progress = double(epoch + 1) / double(cfg.epochs);
  for (const auto& [h_frac, e_frac] : cfg.curriculum)
    if (progress <= e_frac)
      return std::max(1, int(std::lround(h_frac * full_horizon)));
  return full_horizon;
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = int(rng.next() % std::uint64_t(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace detail

namespace {

constexpr char kModelMagic[4] = {'L', 'T', 'S', 'M'};
constexpr std::uint16_t kModelVersion = 1;

template <class T>
void put(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

std::string encode_metadata(const std::map<std::string, std::string>& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) {
    if (key.empty() || key.find('=') != std::string::npos ||
        key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos)
      throw DomainError("model file: malformed metadata entry: " + key);
    out += key + "=" + value + "\n";
  }
  return out;
}

struct ModelReader {
  const std::string& buf;
  std::size_t at = 0;

  void need(std::size_t n) const {
    if (buf.size() - at < n) throw DataError("model file: truncated file");
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf.data() + at, sizeof(T));
    at += sizeof(T);
    return value;
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string out = buf.substr(at, n);
    at += n;
    return out;
  }
};

}  // namespace

void save_model_file(const ModelFile& file, const std::filesystem::path& path) {
  if (!file.metadata.count("kind"))
    throw DomainError("model file: metadata must include kind");
  std::string out;
  out.append(kModelMagic, 4);
  put(out, kModelVersion);
  const std::string metadata = encode_metadata(file.metadata);
  put(out, std::uint32_t(metadata.size()));
  out += metadata;
  put(out, std::uint32_t(file.groups.size()));
  for (const auto& [name, values] : file.groups) {
    if (name.empty() || name.size() > 0xFFFF)
      throw DomainError("model file: bad group name");
    put(out, std::uint16_t(name.size()));
    out += name;
    put(out, std::uint64_t(values.size()));
    out.append(reinterpret_cast<const char*>(values.data()),
               sizeof(double) * values.size());
  }
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw DataError("model file: cannot open " + path.string());
  stream.write(out.data(), std::streamsize(out.size()));
  if (!stream) throw DataError("model file: write failed: " + path.string());
}

ModelFile load_model_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw DataError("model file: cannot open " + path.string());
  std::ostringstream content;
  content << stream.rdbuf();
  const std::string buf = content.str();

  ModelReader reader{buf};
  if (reader.get_bytes(4) != std::string(kModelMagic, 4))
    throw DataError("model file: bad magic");
  if (reader.get<std::uint16_t>() != kModelVersion)
    throw DataError("model file: unsupported version");
  const auto metadata_len = reader.get<std::uint32_t>();
  const std::string metadata = reader.get_bytes(metadata_len);

  ModelFile file;
  std::size_t line_start = 0;
  while (line_start < metadata.size()) {
    auto line_end = metadata.find('\n', line_start);
    if (line_end == std::string::npos)
      throw DataError("model file: malformed metadata");
    const std::string line = metadata.substr(line_start, line_end - line_start);
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw DataError("model file: malformed metadata line: " + line);
    file.metadata[line.substr(0, eq)] = line.substr(eq + 1);
    line_start = line_end + 1;
  }
  if (!file.metadata.count("kind"))
    throw DataError("model file: metadata is missing kind");

  const auto group_count = reader.get<std::uint32_t>();
  for (std::uint32_t g = 0; g < group_count; ++g) {
    const auto name_len = reader.get<std::uint16_t>();
    const std::string name = reader.get_bytes(name_len);
    const auto count = reader.get<std::uint64_t>();
    if (count > (std::uint64_t(1) << 40))
      throw DataError("model file: group too large: " + name);
    reader.need(std::size_t(count) * sizeof(double));
    Vector values(static_cast<Eigen::Index>(count));
    std::memcpy(values.data(), buf.data() + reader.at,
                std::size_t(count) * sizeof(double));
    reader.at += std::size_t(count) * sizeof(double);
    file.groups.emplace_back(name, std::move(values));
  }
  if (reader.at != buf.size())
    throw DataError("model file: trailing bytes after last group");
  return file;
}

namespace {

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::size_t at = 0;
  while (at < s.size()) {
    auto comma = s.find(',', at);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoi(s.substr(at, comma - at)));
    at = comma + 1;
  }
  return out;
}

void append_mlp_groups(ModelFile& file, const std::string& prefix,
                       const EluMlp& mlp) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    Vector w(layer.W.size());
    std::memcpy(w.data(), layer.W.data(), sizeof(double) * layer.W.size());
    file.groups.emplace_back(prefix + "." + std::to_string(l) + ".W", w);
    file.groups.emplace_back(prefix + "." + std::to_string(l) + ".b", layer.b);
  }
}

}  // namespace

ModelFile to_model_file(const LatentLinearODEModel& model) {
  const auto& cfg = model.config();
  ModelFile file;
  file.metadata["kind"] = "linode";
  file.metadata["state_dim"] = std::to_string(cfg.state_dim);
  file.metadata["lookback"] = std::to_string(cfg.lookback);
  file.metadata["horizon"] = std::to_string(cfg.horizon);
  file.metadata["latent_dim"] = std::to_string(cfg.latent_dim);
  file.metadata["matrix_class"] = to_string(cfg.matrix_class);
  file.metadata["encoder"] = to_string(cfg.encoder_kind);
  file.metadata["decoder"] = to_string(cfg.decoder_kind);
  if (cfg.encoder_kind == MapKind::elu_mlp)
    file.metadata["encoder_hidden"] = join_ints(cfg.encoder_hidden);
  if (cfg.decoder_kind == MapKind::elu_mlp)
    file.metadata["decoder_hidden"] = join_ints(cfg.decoder_hidden);
  {
    std::ostringstream step;
    step.precision(17);
    step << cfg.step_unit;
    file.metadata["step_unit"] = step.str();
    if (cfg.delay) {
      std::ostringstream delay;
      delay.precision(17);
      delay << *cfg.delay;
      file.metadata["delay"] = delay.str();
    }
  }
  append_mlp_groups(file, "encoder", model.encoder());
  file.groups.emplace_back("generator", model.generator().params());
  append_mlp_groups(file, "decoder", model.decoder());
  return file;
}

LatentLinearODEModel linode_from_model_file(const ModelFile& file) {
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = file.metadata.find(key);
    if (it == file.metadata.end())
      throw DataError("model file: metadata is missing " + key);
    return it->second;
  };
  if (field("kind") != "linode")
    throw DataError("model file: not a latent ODE checkpoint");

  LinodeConfig cfg;
  cfg.state_dim = std::stoi(field("state_dim"));
  cfg.lookback = std::stoi(field("lookback"));
  cfg.horizon = std::stoi(field("horizon"));
  cfg.latent_dim = std::stoi(field("latent_dim"));
  cfg.matrix_class = matrix_class_from_string(field("matrix_class"));
  cfg.encoder_kind = map_kind_from_string(field("encoder"));
  cfg.decoder_kind = map_kind_from_string(field("decoder"));
  cfg.encoder_hidden = cfg.encoder_kind == MapKind::elu_mlp
                           ? split_ints(field("encoder_hidden"))
                           : std::vector<int>{};
  cfg.decoder_hidden = cfg.decoder_kind == MapKind::elu_mlp
                           ? split_ints(field("decoder_hidden"))
                           : std::vector<int>{};
  cfg.step_unit = std::stod(field("step_unit"));
  if (file.metadata.count("delay")) cfg.delay = std::stod(field("delay"));

  LatentLinearODEModel model = LatentLinearODEModel::init(cfg, 0);
  Vector params(model.param_count());
  Eigen::Index at = 0;
  for (const auto& [name, values] : file.groups) {
    if (at + values.size() > params.size())
      throw DataError("model file: parameter groups exceed model size");
    params.segment(at, values.size()) = values;
    at += values.size();
  }
  if (at != params.size())
    throw DataError("model file: parameter groups do not cover the model");
  model.set_params(params);
  return model;
}

}  // namespace ltsf
