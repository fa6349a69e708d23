#pragma once

#include <functional>
#include <memory>

#include "ltsf/baselines.hpp"

namespace ltsf {

double mse(const RowMajorMatrix& pred, const RowMajorMatrix& truth);
double mae(const RowMajorMatrix& pred, const RowMajorMatrix& truth);

/// One evaluation setting: split each trajectory of `dataset` at L and score
/// the next T steps. L + T must equal the trajectory length.
struct ForecastTask {
  std::string dataset;
  int lookback = 0;
  int horizon = 0;
};

using ForecastFn =
    std::function<RowMajorMatrix(const Eigen::Ref<const RowMajorMatrix>&)>;

/// Normalizes with train-fitted statistics, then forecasts every test
/// trajectory from its first L rows and aggregates (MSE, MAE) over all
/// trajectories, steps and dimensions. Already-standardized containers pass
/// through unchanged since their train statistics are (0, 1).
std::pair<double, double> evaluate(const ForecastFn& forecast,
                                   const DatasetContainer& container,
                                   const ForecastTask& task);

struct BenchCell {
  std::string dataset;
  int lookback = 0;
  std::string model;
  bool ok = false;
  std::string error;  // set when !ok
  double mse = 0.0;   // minimum over evaluation checkpoints, normalized scale
  double mae = 0.0;
  long long param_count = 0;
  double wall_seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchCell> cells;
  std::map<std::string, bool> scale100;  // dataset -> display metrics x100
};

struct BenchConfig {
  struct Dataset {
    std::string name;
    std::string source;  // container path; may be preloaded by name instead
    std::vector<int> lookbacks;
    bool scale100 = false;
    int truncate_train = 0;  // 0 keeps every training trajectory
  };
  struct Model {
    std::string name;
    std::string kind;  // defaults to name
    std::map<std::string, std::string> options;
  };
  std::uint64_t seed = 0;
  std::vector<Dataset> datasets;
  std::vector<Model> models;
};

/// Key-value config with [dataset.NAME] and [model.NAME] sections,
/// `key = value` lines, comma lists and # comments.
BenchConfig parse_bench_config(const std::string& text);

/// A model fitted on one benchmark cell. `forecast` maps a normalized
/// lookback window to the normalized horizon; mse/mae are the minimum test
/// metrics seen across evaluation checkpoints.
struct FittedModel {
  std::string kind;
  long long param_count = 0;
  double mse = 0.0;
  double mae = 0.0;
  ForecastFn forecast;
  std::function<ModelFile()> checkpoint;  // null for persistence
};

void validate_model_options(const std::string& kind,
                            const std::map<std::string, std::string>& options);

/// Fits or trains `kind` on an already normalized (and truncated) container.
FittedModel fit_model(const std::string& kind,
                      const std::map<std::string, std::string>& options,
                      const DatasetContainer& normalized, int lookback,
                      std::uint64_t seed);

/// Runs every (dataset, lookback, model) cell. Cell failures become N/A rows
/// and the run continues. `preloaded` supplies containers by dataset name;
/// other datasets load from their source path. Rows come back in canonical
/// (dataset, lookback, model) order and depend only on config content.
BenchmarkReport run_benchmark(
    const BenchConfig& config,
    const std::map<std::string, DatasetContainer>& preloaded = {});

/// format is "markdown" (bold best cells, wall-clock column) or "csv"
/// (byte-deterministic: no wall-clock, best_mse/best_mae flag columns).
/// Metrics print with two decimals, x100 first where configured; best
/// marking compares raw values, ties all marked.
std::string render_table(const BenchmarkReport& report,
                         const std::string& format);

/// Bar chart of per-model MSE averaged over each dataset group. An empty
/// grouping puts every dataset in one group. Self-contained SVG.
std::string render_bar_svg(
    const BenchmarkReport& report,
    const std::map<std::string, std::vector<std::string>>& groups = {});

}  // namespace ltsf
