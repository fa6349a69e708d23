#include "ltsf/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ltsf {

namespace {

constexpr std::uint16_t kVersion = 1;
constexpr std::uint64_t kMaxElements = std::uint64_t(1) << 40;

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  put_bytes(out, &v, sizeof v);
}

struct Reader {
  const std::string& buf;
  std::size_t at = 0;

  void need(std::size_t n) const {
    if (at + n > buf.size()) throw DataError("container: truncated file");
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf.data() + at, sizeof v);
    at += sizeof v;
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s = buf.substr(at, n);
    at += n;
    return s;
  }
};

void append_block(std::string& out, const TrajectorySet& set,
                  const std::optional<Vector>& timestamps) {
  put<std::uint8_t>(out, 3);
  put<std::uint64_t>(out, std::uint64_t(set.count));
  put<std::uint64_t>(out, std::uint64_t(set.len));
  put<std::uint64_t>(out, std::uint64_t(set.dim));
  put<std::uint8_t>(out, timestamps ? 1 : 0);
  if (timestamps) {
    if (timestamps->size() != set.len)
      throw DomainError("container: timestamp length mismatch");
    for (Eigen::Index i = 0; i < timestamps->size(); ++i)
      put<double>(out, (*timestamps)[i]);
  }
  for (double v : set.values) put<float>(out, static_cast<float>(v));
}

void read_block(Reader& r, TrajectorySet& set, std::optional<Vector>& timestamps) {
  const auto ndim = r.get<std::uint8_t>();
  if (ndim != 3) throw DataError("container: tensor rank must be 3");
  const auto m = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  if (m > kMaxElements || n > kMaxElements || d > kMaxElements ||
      (n != 0 && m > kMaxElements / n) ||
      (d != 0 && m * n > kMaxElements / d))
    throw DataError("container: shape overflow");
  const auto flag = r.get<std::uint8_t>();
  if (flag > 1) throw DataError("container: bad timestamp flag");
  if (flag) {
    Vector t(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) t[Eigen::Index(i)] = r.get<double>();
    timestamps = std::move(t);
  } else {
    timestamps.reset();
  }
  set.count = int(m);
  set.len = int(n);
  set.dim = int(d);
  const std::uint64_t total = m * n * d;
  set.values.resize(std::size_t(total));
  r.need(std::size_t(total) * 4);
  for (std::uint64_t i = 0; i < total; ++i)
    set.values[std::size_t(i)] = double(r.get<float>());
}

std::map<std::string, std::string> parse_metadata(const std::string& text) {
  std::map<std::string, std::string> meta;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("container: malformed metadata line '" + line + "'");
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

}  // namespace

DatasetContainer make_container(const std::string& name,
                                const TrajectorySet& all, int n_train) {
  if (n_train < 0 || n_train > all.count)
    throw DomainError("make_container: bad n_train");
  DatasetContainer c;
  c.name = name;
  const auto slice = [&](int begin, int count) {
    TrajectorySet s;
    s.system = all.system;
    s.seed = all.seed;
    s.dt = all.dt;
    s.count = count;
    s.len = all.len;
    s.dim = all.dim;
    s.regenerated = all.regenerated;
    const std::size_t stride = std::size_t(all.len) * all.dim;
    s.values.assign(all.values.begin() + std::size_t(begin) * stride,
                    all.values.begin() + std::size_t(begin + count) * stride);
    return s;
  };
  c.train = slice(0, n_train);
  c.test = slice(n_train, all.count - n_train);
  Vector times(all.len);
  for (int j = 0; j < all.len; ++j) times[j] = all.dt * j;
  c.train_timestamps = times;
  c.test_timestamps = times;
  c.metadata["system"] = all.system;
  c.metadata["seed"] = std::to_string(all.seed);
  c.metadata["dt"] = std::to_string(all.dt);
  if (all.regenerated > 0)
    c.metadata["regenerated"] = std::to_string(all.regenerated);
  return c;
}

void save_container(const DatasetContainer& c, const std::filesystem::path& path) {
  if (c.name.empty()) throw DomainError("save_container: name is required");
  if (c.train.count == 0 || c.test.count == 0)
    throw DomainError("save_container: both splits must be non-empty");
  std::string meta = "name=" + c.name + "\n";
  for (const auto& [k, v] : c.metadata) {
    if (k == "name") continue;
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw DomainError("save_container: metadata keys/values must not contain "
                        "'=' or newlines");
    meta += k + "=" + v + "\n";
  }

  std::string out;
  out.reserve(meta.size() + 64 + 4 * (c.train.values.size() + c.test.values.size()));
  put_bytes(out, "LTSF", 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, std::uint32_t(meta.size()));
  put_bytes(out, meta.data(), meta.size());
  append_block(out, c.train, c.train_timestamps);
  append_block(out, c.test, c.test_timestamps);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path.string());
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

DatasetContainer load_container(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());

  Reader r{buf};
  if (r.get_string(4) != "LTSF") throw DataError("container: bad magic");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion)
    throw DataError("container: unsupported version " + std::to_string(version));
  const auto meta_len = r.get<std::uint32_t>();
  DatasetContainer c;
  c.metadata = parse_metadata(r.get_string(meta_len));
  const auto name = c.metadata.find("name");
  if (name == c.metadata.end())
    throw DataError("container: metadata is missing name");
  c.name = name->second;
  c.metadata.erase("name");
  read_block(r, c.train, c.train_timestamps);
  read_block(r, c.test, c.test_timestamps);
  if (r.at != buf.size()) throw DataError("container: trailing bytes");
  const auto sys = c.metadata.find("system");
  if (sys != c.metadata.end()) c.train.system = c.test.system = sys->second;
  return c;
}

std::vector<int> window_starts(int rows, int window, int stride) {
  if (window <= 0 || stride <= 0)
    throw DomainError("window_starts: window and stride must be positive");
  std::vector<int> starts;
  for (int s = 0; s + window <= rows; s += stride) starts.push_back(s);
  return starts;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

DatasetContainer import_csv(const CsvImportSpec& spec) {
  if (spec.traj_len <= 0) throw DomainError("import_csv: traj_len must be > 0");
  if (spec.stride <= 0) throw DomainError("import_csv: stride must be > 0");
  if (!(spec.subsample > 0.0) || spec.subsample > 1.0)
    throw DomainError("import_csv: subsample must be in (0, 1]");
  if (spec.split.empty()) throw DomainError("import_csv: split is required");

  std::ifstream f(spec.path);
  if (!f) throw DataError("cannot open: " + spec.path.string());
  std::string line;
  if (!std::getline(f, line)) throw DataError("import_csv: empty file");
  const std::vector<std::string> header = split_csv_line(line);

  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("import_csv: row " + std::to_string(rows.size() + 2) +
                      " has " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError("import_csv: no data rows");

  // Column selection: requested names, or every column that parses as a
  // number on the first data row.
  std::vector<int> data_cols;
  if (!spec.columns.empty()) {
    for (const auto& want : spec.columns) {
      const auto it = std::find(header.begin(), header.end(), want);
      if (it == header.end())
        throw DataError("import_csv: no column named '" + want + "'");
      data_cols.push_back(int(it - header.begin()));
    }
  } else {
    double tmp;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (parse_double(rows[0][j], tmp)) data_cols.push_back(int(j));
    if (data_cols.empty())
      throw DataError("import_csv: no numeric columns detected");
  }

  // Time column for timestamp splits: the first non-numeric column.
  int time_col = -1;
  {
    double tmp;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (!parse_double(rows[0][j], tmp)) {
        time_col = int(j);
        break;
      }
  }

  const int n_rows = int(rows.size());
  const int n_dim = int(data_cols.size());
  RowMajorMatrix data(n_rows, n_dim);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < n_dim; ++j) {
      double v;
      if (!parse_double(rows[i][data_cols[j]], v))
        throw DataError("import_csv: non-numeric cell at row " +
                        std::to_string(i + 2) + ", column '" +
                        header[data_cols[j]] + "'");
      data(i, j) = v;
    }

  // Split the rows, then window each side separately.
  int split_row;
  double frac;
  if (parse_double(spec.split, frac) && frac > 0.0 && frac < 1.0) {
    split_row = int(std::floor(frac * n_rows));
  } else {
    if (time_col < 0)
      throw DataError("import_csv: timestamp split needs a non-numeric time column");
    split_row = 0;
    while (split_row < n_rows && rows[split_row][time_col] <= spec.split)
      ++split_row;
  }
  if (split_row <= 0 || split_row >= n_rows)
    throw DataError("import_csv: split leaves an empty side");

  const auto cut = [&](int begin, int count, Rng& rng) {
    const auto starts = window_starts(count, spec.traj_len, spec.stride);
    if (starts.empty())
      throw DataError("import_csv: a side with " + std::to_string(count) +
                      " rows is shorter than traj_len " +
                      std::to_string(spec.traj_len));
    std::vector<int> kept;
    for (int s : starts)
      if (spec.subsample >= 1.0 || rng_uniform(rng, 0.0, 1.0) < spec.subsample)
        kept.push_back(s);
    if (kept.empty()) kept.push_back(starts.front());
    TrajectorySet set;
    set.system = "csv";
    set.seed = spec.seed;
    set.dt = 1.0;
    set.count = int(kept.size());
    set.len = spec.traj_len;
    set.dim = n_dim;
    set.values.resize(std::size_t(set.count) * set.len * set.dim);
    for (int w = 0; w < int(kept.size()); ++w) {
      auto traj = set.trajectory(w);
      traj = data.middleRows(begin + kept[w], spec.traj_len);
    }
    return set;
  };

  DatasetContainer c;
  c.name = spec.name.empty() ? spec.path.stem().string() : spec.name;
  Rng train_rng(mix64(spec.seed, 0));
  Rng test_rng(mix64(spec.seed, 1));
  c.train = cut(0, split_row, train_rng);
  c.test = cut(split_row, n_rows - split_row, test_rng);
  c.metadata["source"] = spec.path.filename().string();
  c.metadata["split"] = spec.split;
  c.metadata["stride"] = std::to_string(spec.stride);
  return c;
}

StandardScaler fit_scaler(const TrajectorySet& train) {
  if (train.count == 0 || train.len == 0 || train.dim == 0)
    throw DomainError("fit_scaler: empty training block");
  const Eigen::Index dim = train.dim;
  const double n = double(train.count) * train.len;
  Vector mean = Vector::Zero(dim);
  const std::size_t total = train.values.size();
  for (std::size_t i = 0; i < total; ++i)
    mean[Eigen::Index(i % std::size_t(dim))] += train.values[i];
  mean /= n;
  Vector var = Vector::Zero(dim);
  for (std::size_t i = 0; i < total; ++i) {
    const double d = train.values[i] - mean[Eigen::Index(i % std::size_t(dim))];
    var[Eigen::Index(i % std::size_t(dim))] += d * d;
  }
  var /= n;
  StandardScaler s;
  s.mean = mean;
  s.std = var.cwiseSqrt().cwiseMax(1e-8);
  return s;
}

void scaler_apply(const StandardScaler& s, TrajectorySet& set) {
  if (s.mean.size() != set.dim)
    throw DomainError("scaler_apply: dimension mismatch");
  const std::size_t dim = std::size_t(set.dim);
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    const Eigen::Index d = Eigen::Index(i % dim);
    set.values[i] = (set.values[i] - s.mean[d]) / s.std[d];
  }
}

void scaler_invert(const StandardScaler& s, TrajectorySet& set) {
  if (s.mean.size() != set.dim)
    throw DomainError("scaler_invert: dimension mismatch");
  const std::size_t dim = std::size_t(set.dim);
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    const Eigen::Index d = Eigen::Index(i % dim);
    set.values[i] = set.values[i] * s.std[d] + s.mean[d];
  }
}

StandardScaler normalize_container(DatasetContainer& c) {
  StandardScaler s = fit_scaler(c.train);
  scaler_apply(s, c.train);
  scaler_apply(s, c.test);
  return s;
}

void export_csv(const DatasetContainer& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const TrajectorySet& set, const std::string& suffix) {
    const auto path = dir / (c.name + "_" + suffix + ".csv");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f << "traj,t";
    for (int d = 0; d < set.dim; ++d) f << ",c" << d;
    f << "\n";
    char buf[32];
    for (int i = 0; i < set.count; ++i) {
      auto traj = set.trajectory(i);
      for (int t = 0; t < set.len; ++t) {
        f << i << "," << t;
        for (int d = 0; d < set.dim; ++d) {
          std::snprintf(buf, sizeof buf, "%.9g", traj(t, d));
          f << "," << buf;
        }
        f << "\n";
      }
    }
    if (!f) throw DataError("write failed: " + path.string());
  };
  write(c.train, "train");
  write(c.test, "test");
}

}  // namespace ltsf
