#include "ltsf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

namespace ltsf {

namespace {

void check_shapes(const RowMajorMatrix& pred, const RowMajorMatrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DomainError("metrics: shape mismatch");
  if (pred.size() == 0) throw DomainError("metrics: empty matrices");
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

int to_int(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(context + ": not an integer: " + s);
  }
}

double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(context + ": not a number: " + s);
  }
}

bool to_bool(const std::string& s, const std::string& context) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw DomainError(context + ": expected true or false: " + s);
}

std::vector<int> to_int_list(const std::string& s, const std::string& context) {
  std::vector<int> out;
  std::size_t at = 0;
  while (at <= s.size()) {
    auto comma = s.find(',', at);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = trim(s.substr(at, comma - at));
    if (!item.empty()) out.push_back(to_int(item, context));
    at = comma + 1;
  }
  if (out.empty()) throw DomainError(context + ": empty list");
  return out;
}

template <class T>
T option_or(const std::map<std::string, std::string>& options,
            const std::string& key, T fallback,
            T (*parse)(const std::string&, const std::string&)) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  return parse(it->second, "model option " + key);
}

std::pair<double, double> eval_on(const ForecastFn& fn,
                                  const TrajectorySet& test, int L, int T) {
  double se = 0.0, ae = 0.0;
  for (int i = 0; i < test.count; ++i) {
    const auto traj = test.trajectory(i);
    const RowMajorMatrix pred = fn(traj.topRows(L));
    if (pred.rows() != T || pred.cols() != test.dim)
      throw DataError("evaluate: forecast has wrong shape");
    const auto diff = (pred - traj.middleRows(L, T)).eval();
    se += diff.squaredNorm();
    ae += diff.cwiseAbs().sum();
  }
  const double n = double(test.count) * T * test.dim;
  return {se / n, ae / n};
}

}  // namespace

double mse(const RowMajorMatrix& pred, const RowMajorMatrix& truth) {
  check_shapes(pred, truth);
  return (pred - truth).squaredNorm() / double(pred.size());
}

double mae(const RowMajorMatrix& pred, const RowMajorMatrix& truth) {
  check_shapes(pred, truth);
  return (pred - truth).cwiseAbs().sum() / double(pred.size());
}

std::pair<double, double> evaluate(const ForecastFn& forecast,
                                   const DatasetContainer& container,
                                   const ForecastTask& task) {
  const int L = task.lookback;
  const int T = task.horizon;
  if (L < 1 || T < 1) throw DomainError("evaluate: lookback and horizon must be positive");
  if (L + T != container.test.len)
    throw DomainError("evaluate: lookback + horizon must equal the trajectory length");
  if (container.test.count < 1) throw DomainError("evaluate: empty test block");

  const StandardScaler scaler = fit_scaler(container.train);
  const int D = container.test.dim;
  double se = 0.0, ae = 0.0;
  RowMajorMatrix window(L, D);
  for (int i = 0; i < container.test.count; ++i) {
    const auto traj = container.test.trajectory(i);
    for (int t = 0; t < L; ++t)
      for (int d = 0; d < D; ++d)
        window(t, d) = (traj(t, d) - scaler.mean[d]) / scaler.std[d];
    const RowMajorMatrix pred = forecast(window);
    if (pred.rows() != T || pred.cols() != D)
      throw DataError("evaluate: forecast has wrong shape");
    for (int j = 0; j < T; ++j)
      for (int d = 0; d < D; ++d) {
        const double truth = (traj(L + j, d) - scaler.mean[d]) / scaler.std[d];
        const double diff = pred(j, d) - truth;
        se += diff * diff;
        ae += std::abs(diff);
      }
  }
  const double n = double(container.test.count) * T * D;
  return {se / n, ae / n};
}

BenchConfig parse_bench_config(const std::string& text) {
  BenchConfig cfg;
  BenchConfig::Dataset* dataset = nullptr;
  BenchConfig::Model* model = nullptr;
  std::istringstream lines(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const auto where = "config line " + std::to_string(line_no);
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw DomainError(where + ": unterminated section");
      const std::string inside = trim(s.substr(1, s.size() - 2));
      dataset = nullptr;
      model = nullptr;
      if (inside.rfind("dataset.", 0) == 0) {
        const std::string name = inside.substr(8);
        if (name.empty()) throw DomainError(where + ": dataset section needs a name");
        for (const auto& d : cfg.datasets)
          if (d.name == name)
            throw DomainError(where + ": duplicate dataset section: " + name);
        cfg.datasets.push_back({});
        cfg.datasets.back().name = name;
        dataset = &cfg.datasets.back();
      } else if (inside.rfind("model.", 0) == 0) {
        const std::string name = inside.substr(6);
        if (name.empty()) throw DomainError(where + ": model section needs a name");
        for (const auto& m : cfg.models)
          if (m.name == name)
            throw DomainError(where + ": duplicate model section: " + name);
        cfg.models.push_back({});
        cfg.models.back().name = name;
        model = &cfg.models.back();
      } else {
        throw DomainError(where + ": unknown section [" + inside + "]");
      }
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw DomainError(where + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = unquote(trim(s.substr(eq + 1)));
    if (key.empty()) throw DomainError(where + ": empty key");

    if (model) {
      if (key == "kind")
        model->kind = value;
      else
        model->options[key] = value;
    } else if (dataset) {
      if (key == "source")
        dataset->source = value;
      else if (key == "lookbacks")
        dataset->lookbacks = to_int_list(value, where);
      else if (key == "scale100")
        dataset->scale100 = to_bool(value, where);
      else if (key == "truncate_train")
        dataset->truncate_train = to_int(value, where);
      else
        throw DomainError(where + ": unknown dataset key: " + key);
    } else {
      if (key == "seed")
        cfg.seed = std::uint64_t(std::stoull(value));
      else
        throw DomainError(where + ": unknown top-level key: " + key);
    }
  }

  for (auto& d : cfg.datasets) {
    if (d.lookbacks.empty())
      throw DomainError("config: dataset " + d.name + " needs lookbacks");
    for (int L : d.lookbacks)
      if (L < 1) throw DomainError("config: dataset " + d.name + ": lookbacks must be >= 1");
    if (d.truncate_train < 0)
      throw DomainError("config: dataset " + d.name + ": truncate_train must be >= 0");
  }
  for (auto& m : cfg.models)
    if (m.kind.empty()) m.kind = m.name;
  return cfg;
}

namespace {

const std::set<std::string> kTrainKeys = {"epochs", "batch_size", "lr",
                                          "eval_every", "curriculum"};

TrainConfig train_config_from(const std::map<std::string, std::string>& options,
                              std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = option_or(options, "epochs", 10, to_int);
  tc.batch_size = option_or(options, "batch_size", 64, to_int);
  tc.lr = option_or(options, "lr", 1e-3, to_double);
  tc.eval_every = option_or(options, "eval_every", 1, to_int);
  tc.seed = seed;
  if (auto it = options.find("curriculum"); it != options.end()) {
    tc.curriculum.clear();
    std::size_t at = 0;
    const std::string& s = it->second;
    while (at <= s.size()) {
      auto comma = s.find(',', at);
      if (comma == std::string::npos) comma = s.size();
      const std::string item = trim(s.substr(at, comma - at));
      if (!item.empty()) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw DomainError("model option curriculum: expected horizon:epoch pairs");
        tc.curriculum.emplace_back(
            to_double(trim(item.substr(0, colon)), "model option curriculum"),
            to_double(trim(item.substr(colon + 1)), "model option curriculum"));
      }
      at = comma + 1;
    }
  }
  return tc;
}

std::vector<int> hidden_from(const std::map<std::string, std::string>& options,
                             const std::string& key,
                             const std::vector<int>& fallback) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  return to_int_list(it->second, "model option " + key);
}

std::uint64_t fold_string(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = splitmix64_mix(h ^ c);
  return h;
}

std::uint64_t cell_seed(std::uint64_t base, const std::string& dataset, int L,
                        const std::string& model) {
  std::uint64_t h = splitmix64_mix(base);
  h = fold_string(h, dataset);
  h = splitmix64_mix(h ^ std::uint64_t(L));
  h = fold_string(h, model);
  return h;
}

TrajectorySet truncate_set(const TrajectorySet& set, int n) {
  if (n > set.count)
    throw DomainError("benchmark: truncate_train exceeds the training set");
  TrajectorySet out = set;
  out.count = n;
  out.values.resize(std::size_t(n) * set.len * set.dim);
  return out;
}

}  // namespace

void validate_model_options(const std::string& kind,
                            const std::map<std::string, std::string>& options) {
  std::set<std::string> allowed;
  if (kind == "persistence") {
  } else if (kind == "nlinear" || kind == "nlinear-b") {
    allowed = {"lambda", "window_stride"};
  } else if (kind == "latent-nlinear") {
    allowed = kTrainKeys;
    allowed.insert({"latent_dim", "encoder", "decoder", "encoder_hidden",
                    "decoder_hidden"});
  } else if (kind == "linode" || kind == "linode-dde") {
    allowed = kTrainKeys;
    allowed.insert({"latent_dim", "matrix_class", "encoder", "decoder",
                    "encoder_hidden", "decoder_hidden", "step_unit"});
    if (kind == "linode-dde") allowed.insert("delay");
  } else {
    throw DomainError("unknown model kind: " + kind);
  }
  for (const auto& [key, value] : options)
    if (!allowed.count(key))
      throw DomainError("model option not recognized for " + kind + ": " + key);
}

FittedModel fit_model(const std::string& kind,
                      const std::map<std::string, std::string>& options,
                      const DatasetContainer& normalized, int lookback,
                      std::uint64_t seed) {
  validate_model_options(kind, options);
  const TrajectorySet& train_set = normalized.train;
  const TrajectorySet& test_set = normalized.test;
  const int L = lookback;
  const int T = train_set.len - L;
  if (L < 1 || T < 1)
    throw DomainError("fit_model: lookback must leave a positive horizon");
  if (test_set.len != train_set.len)
    throw DomainError("fit_model: train and test trajectory lengths differ");

  FittedModel out;
  out.kind = kind;

  if (kind == "persistence") {
    out.forecast = [T](const Eigen::Ref<const RowMajorMatrix>& w) {
      return persistence_predict(w, T);
    };
    std::tie(out.mse, out.mae) = eval_on(out.forecast, test_set, L, T);
    return out;
  }

  if (kind == "nlinear" || kind == "nlinear-b") {
    NLinearFitOptions fit_options;
    fit_options.lambda = option_or(options, "lambda", 0.0, to_double);
    fit_options.window_stride = option_or(options, "window_stride", 0, to_int);
    const auto variant =
        kind == "nlinear" ? NLinearVariant::A : NLinearVariant::B;
    auto model = std::make_shared<NLinearModel>(
        nlinear_fit(train_set, L, T, variant, fit_options));
    out.param_count = model->count_params();
    out.forecast = [model](const Eigen::Ref<const RowMajorMatrix>& w) {
      return model->predict(w);
    };
    std::tie(out.mse, out.mae) = eval_on(out.forecast, test_set, L, T);
    out.checkpoint = [model] { return to_model_file(*model); };
    return out;
  }

  const TrainConfig tc = train_config_from(options, mix64(seed, 1));

  if (kind == "latent-nlinear") {
    LatentNLinearConfig cfg;
    cfg.state_dim = train_set.dim;
    cfg.lookback = L;
    cfg.horizon = T;
    cfg.latent_dim = option_or(options, "latent_dim", 8, to_int);
    cfg.encoder_kind = map_kind_from_string(
        options.count("encoder") ? options.at("encoder") : "affine");
    cfg.decoder_kind = map_kind_from_string(
        options.count("decoder") ? options.at("decoder") : "affine");
    cfg.encoder_hidden = hidden_from(options, "encoder_hidden", {64});
    cfg.decoder_hidden = hidden_from(options, "decoder_hidden", {64});
    auto model = std::make_shared<LatentNLinearModel>(
        LatentNLinearModel::init(cfg, seed));
    const TrainResult result = train(*model, train_set, test_set, tc);
    if (result.best_epoch < 0)
      throw NumericalError("training diverged before the first evaluation");
    out.param_count = model->param_count();
    out.mse = result.best_mse;
    out.mae = result.best_mae;
    out.forecast = [model](const Eigen::Ref<const RowMajorMatrix>& w) {
      return model->forecast(w);
    };
    out.checkpoint = [model] { return to_model_file(*model); };
    return out;
  }

  // linode / linode-dde
  LinodeConfig cfg;
  cfg.state_dim = train_set.dim;
  cfg.lookback = L;
  cfg.horizon = T;
  cfg.latent_dim = option_or(options, "latent_dim", 50, to_int);
  cfg.matrix_class = matrix_class_from_string(
      options.count("matrix_class") ? options.at("matrix_class")
                                    : "skew_plus_diag");
  cfg.encoder_kind = map_kind_from_string(
      options.count("encoder") ? options.at("encoder") : "affine");
  cfg.decoder_kind = map_kind_from_string(
      options.count("decoder") ? options.at("decoder") : "elu_mlp");
  cfg.encoder_hidden = hidden_from(options, "encoder_hidden", {64});
  cfg.decoder_hidden = hidden_from(options, "decoder_hidden", {64});
  cfg.step_unit = option_or(options, "step_unit", 1.0, to_double);
  if (kind == "linode-dde")
    cfg.delay = option_or(options, "delay", 1.0, to_double);
  auto model = std::make_shared<LatentLinearODEModel>(
      LatentLinearODEModel::init(cfg, seed));
  const TrainResult result = train(*model, train_set, test_set, tc);
  if (result.best_epoch < 0)
    throw NumericalError("training diverged before the first evaluation");
  out.param_count = model->param_count();
  out.mse = result.best_mse;
  out.mae = result.best_mae;
  out.forecast = [model](const Eigen::Ref<const RowMajorMatrix>& w) {
    return model->forecast(w);
  };
  out.checkpoint = [model] { return to_model_file(*model); };
  return out;
}

BenchmarkReport run_benchmark(
    const BenchConfig& config,
    const std::map<std::string, DatasetContainer>& preloaded) {
  for (const auto& model : config.models)
    validate_model_options(model.kind, model.options);

  BenchmarkReport report;
  for (const auto& dataset : config.datasets) {
    report.scale100[dataset.name] = dataset.scale100;

    DatasetContainer container;
    std::string dataset_error;
    try {
      if (auto it = preloaded.find(dataset.name); it != preloaded.end())
        container = it->second;
      else if (!dataset.source.empty())
        container = load_container(dataset.source);
      else
        throw DataError("benchmark: dataset " + dataset.name + " has no source");
      if (dataset.truncate_train > 0)
        container.train = truncate_set(container.train, dataset.truncate_train);
      normalize_container(container);
    } catch (const std::exception& e) {
      dataset_error = e.what();
    }

    for (int L : dataset.lookbacks) {
      for (const auto& model : config.models) {
        BenchCell cell;
        cell.dataset = dataset.name;
        cell.lookback = L;
        cell.model = model.name;
        if (!dataset_error.empty()) {
          cell.error = dataset_error;
        } else {
          const auto t0 = std::chrono::steady_clock::now();
          try {
            const FittedModel fitted =
                fit_model(model.kind, model.options, container, L,
                          cell_seed(config.seed, dataset.name, L, model.name));
            cell.ok = true;
            cell.mse = fitted.mse;
            cell.mae = fitted.mae;
            cell.param_count = fitted.param_count;
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
          cell.wall_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  std::sort(report.cells.begin(), report.cells.end(),
            [](const BenchCell& a, const BenchCell& b) {
              return std::tie(a.dataset, a.lookback, a.model) <
                     std::tie(b.dataset, b.lookback, b.model);
            });
  return report;
}

namespace {

struct RowBest {
  double mse = std::numeric_limits<double>::infinity();
  double mae = std::numeric_limits<double>::infinity();
};

std::map<std::pair<std::string, int>, RowBest> best_per_row(
    const BenchmarkReport& report) {
  std::map<std::pair<std::string, int>, RowBest> best;
  for (const auto& cell : report.cells) {
    if (!cell.ok) continue;
    auto& row = best[{cell.dataset, cell.lookback}];
    row.mse = std::min(row.mse, cell.mse);
    row.mae = std::min(row.mae, cell.mae);
  }
  return best;
}

}  // namespace

std::string render_table(const BenchmarkReport& report,
                         const std::string& format) {
  if (format != "markdown" && format != "csv")
    throw DomainError("render_table: format must be markdown or csv");
  auto cells = report.cells;
  std::sort(cells.begin(), cells.end(),
            [](const BenchCell& a, const BenchCell& b) {
              return std::tie(a.dataset, a.lookback, a.model) <
                     std::tie(b.dataset, b.lookback, b.model);
            });
  const auto best = best_per_row(report);
  auto scale = [&](const BenchCell& cell) {
    auto it = report.scale100.find(cell.dataset);
    return it != report.scale100.end() && it->second ? 100.0 : 1.0;
  };

  std::string out;
  if (format == "markdown") {
    out += "| Dataset | L | Model | MSE | MAE | Params | Seconds |\n";
    out += "| --- | --- | --- | --- | --- | --- | --- |\n";
    for (const auto& cell : cells) {
      out += "| " + cell.dataset + " | " + std::to_string(cell.lookback) +
             " | " + cell.model + " | ";
      if (!cell.ok) {
        out += "N/A | N/A | N/A | " + fmt2(cell.wall_seconds) + " |\n";
        continue;
      }
      const auto& row = best.at({cell.dataset, cell.lookback});
      const std::string mse_text = fmt2(cell.mse * scale(cell));
      const std::string mae_text = fmt2(cell.mae * scale(cell));
      out += (cell.mse == row.mse ? "**" + mse_text + "**" : mse_text);
      out += " | ";
      out += (cell.mae == row.mae ? "**" + mae_text + "**" : mae_text);
      out += " | " + std::to_string(cell.param_count) + " | " +
             fmt2(cell.wall_seconds) + " |\n";
    }
    return out;
  }

  out += "dataset,lookback,model,mse,mae,params,best_mse,best_mae\n";
  for (const auto& cell : cells) {
    out += cell.dataset + "," + std::to_string(cell.lookback) + "," +
           cell.model + ",";
    if (!cell.ok) {
      out += "N/A,N/A,0,0,0\n";
      continue;
    }
    const auto& row = best.at({cell.dataset, cell.lookback});
    out += fmt2(cell.mse * scale(cell)) + "," + fmt2(cell.mae * scale(cell)) +
           "," + std::to_string(cell.param_count) + "," +
           (cell.mse == row.mse ? "1" : "0") + "," +
           (cell.mae == row.mae ? "1" : "0") + "\n";
  }
  return out;
}

std::string render_bar_svg(
    const BenchmarkReport& report,
    const std::map<std::string, std::vector<std::string>>& groups) {
  if (report.cells.empty()) throw DomainError("render_bar_svg: empty report");

  std::map<std::string, std::vector<std::string>> resolved = groups;
  if (resolved.empty()) {
    std::vector<std::string> all;
    for (const auto& cell : report.cells)
      if (std::find(all.begin(), all.end(), cell.dataset) == all.end())
        all.push_back(cell.dataset);
    std::sort(all.begin(), all.end());
    resolved["all"] = all;
  }

  std::vector<std::string> models;
  for (const auto& cell : report.cells)
    if (std::find(models.begin(), models.end(), cell.model) == models.end())
      models.push_back(cell.model);
  std::sort(models.begin(), models.end());

  // group -> model -> mean MSE over the group's ok cells
  std::map<std::string, std::map<std::string, double>> means;
  double maxv = 0.0;
  for (const auto& [group, datasets] : resolved) {
    for (const auto& model : models) {
      double sum = 0.0;
      int n = 0;
      for (const auto& cell : report.cells) {
        if (!cell.ok || cell.model != model) continue;
        if (std::find(datasets.begin(), datasets.end(), cell.dataset) ==
            datasets.end())
          continue;
        sum += cell.mse;
        ++n;
      }
      if (n > 0) {
        means[group][model] = sum / n;
        maxv = std::max(maxv, sum / n);
      }
    }
  }

  static const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                   "#956cb4", "#8c613c", "#dc7ec0", "#797979"};
  const double bar_w = 34, gap = 10, group_gap = 46;
  const double margin_left = 60, margin_top = 40, plot_h = 220;
  const double height = margin_top + plot_h + 70;

  double width = margin_left + group_gap;
  for (const auto& [group, columns] : means)
    width += double(columns.size()) * (bar_w + gap) + group_gap;
  width = std::max(width, 260.0);

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(4);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<style>text{font-family:sans-serif;font-size:12px}</style>\n";
  svg << "<text x=\"" << margin_left << "\" y=\"20\">Mean test MSE by model</text>\n";
  svg << "<line x1=\"" << margin_left - 8 << "\" y1=\"" << margin_top + plot_h
      << "\" x2=\"" << width - 10 << "\" y2=\"" << margin_top + plot_h
      << "\" stroke=\"#444\"/>\n";

  double x = margin_left + group_gap / 2;
  for (const auto& [group, columns] : means) {
    const double group_x0 = x;
    for (const auto& [model, value] : columns) {
      const double h = maxv > 0 ? value / maxv * plot_h : 0.0;
      const double y = margin_top + plot_h - h;
      const auto model_index =
          std::find(models.begin(), models.end(), model) - models.begin();
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\""
          << kPalette[model_index % 8] << "\"/>\n";
      svg << "<text x=\"" << x << "\" y=\"" << y - 4 << "\">" << value
          << "</text>\n";
      svg << "<text x=\"" << x << "\" y=\"" << margin_top + plot_h + 16
          << "\" transform=\"rotate(30 " << x << " "
          << margin_top + plot_h + 16 << ")\">" << model << "</text>\n";
      x += bar_w + gap;
    }
    svg << "<text x=\"" << (group_x0 + x - gap) / 2 - 10 << "\" y=\""
        << margin_top + plot_h + 54 << "\">" << group << "</text>\n";
    x += group_gap;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ltsf
