#include "ltsf/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "ltsf/bench.hpp"

namespace ltsf {

namespace {

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("LTSF_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw DomainError("LTSF_WORKERS must be a positive integer");
    return int(v);
  }
  return 1;
}

double parse_number(const std::string& s, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DomainError(context + ": not a number: " + s);
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= s.size()) {
    auto comma = s.find(',', at);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = s.substr(at, comma - at);
    if (!item.empty()) out.push_back(item);
    at = comma + 1;
  }
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw DataError("cannot open " + path.string());
  stream << text;
  if (!stream) throw DataError("write failed: " + path.string());
}

std::string shape(const TrajectorySet& set) {
  return "(" + std::to_string(set.count) + ", " + std::to_string(set.len) +
         ", " + std::to_string(set.dim) + ")";
}

void print_metrics(std::ostream& out, double mse_value, double mae_value) {
  const auto old = out.precision(6);
  out << "test mse: " << mse_value << "\n";
  out << "test mse x100: " << mse_value * 100.0 << "\n";
  out << "test mae: " << mae_value << "\n";
  out.precision(old);
}

ForecastFn forecast_from_model_file(const ModelFile& file, int& lookback,
                                    int& horizon, long long& params) {
  const auto kind = file.metadata.at("kind");
  if (kind == "linode") {
    auto model =
        std::make_shared<LatentLinearODEModel>(linode_from_model_file(file));
    lookback = model->lookback();
    horizon = model->horizon();
    params = model->param_count();
    return [model](const Eigen::Ref<const RowMajorMatrix>& w) {
      return model->forecast(w);
    };
  }
  if (kind == "nlinear") {
    auto model = std::make_shared<NLinearModel>(nlinear_from_model_file(file));
    lookback = model->lookback;
    horizon = model->horizon;
    params = model->count_params();
    return [model](const Eigen::Ref<const RowMajorMatrix>& w) {
      return model->predict(w);
    };
  }
  if (kind == "latent_nlinear") {
    auto model = std::make_shared<LatentNLinearModel>(
        latent_nlinear_from_model_file(file));
    lookback = model->lookback();
    horizon = model->horizon();
    params = model->param_count();
    return [model](const Eigen::Ref<const RowMajorMatrix>& w) {
      return model->forecast(w);
    };
  }
  throw DataError("model file: unknown kind: " + kind);
}

std::string trajectory_svg(const DatasetContainer& c, const std::string& split,
                           int traj, const std::vector<int>& dims) {
  const TrajectorySet& set = split == "train" ? c.train : c.test;
  if (traj < 0 || traj >= set.count)
    throw DomainError("plot: trajectory index out of range");
  std::vector<int> selected = dims;
  if (selected.empty())
    for (int d = 0; d < set.dim; ++d) selected.push_back(d);
  for (int d : selected)
    if (d < 0 || d >= set.dim)
      throw DomainError("plot: dimension index out of range");

  const auto data = set.trajectory(traj);
  double lo = data(0, selected[0]), hi = lo;
  for (int t = 0; t < set.len; ++t)
    for (int d : selected) {
      lo = std::min(lo, data(t, d));
      hi = std::max(hi, data(t, d));
    }
  if (hi <= lo) hi = lo + 1.0;

  const double width = 820, height = 320;
  const double x0 = 50, y0 = 20, plot_w = width - 70, plot_h = height - 60;
  static const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                   "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<style>text{font-family:sans-serif;font-size:12px}</style>\n";
  svg << "<text x=\"" << x0 << "\" y=\"14\">" << c.name << " " << split << "["
      << traj << "]</text>\n";
  svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg << "<text x=\"4\" y=\"" << y0 + 10 << "\">" << hi << "</text>\n";
  svg << "<text x=\"4\" y=\"" << y0 + plot_h << "\">" << lo << "</text>\n";
  for (std::size_t k = 0; k < selected.size(); ++k) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 8]
        << "\" points=\"";
    for (int t = 0; t < set.len; ++t) {
      const double px =
          x0 + (set.len > 1 ? double(t) / (set.len - 1) : 0.5) * plot_w;
      const double py =
          y0 + (1.0 - (data(t, selected[k]) - lo) / (hi - lo)) * plot_h;
      svg << px << "," << py << " ";
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

struct TrainFlags {
  std::string data, model, out;
  int lookback = 0;
  int truncate_train = 0;
  std::uint64_t seed = 0;
  // Mirrors of the benchmark config model options; only flags the user set
  // are forwarded, so defaults stay in one place.
  std::map<std::string, std::string> options;
};

void run_train(const TrainFlags& flags, std::ostream& out) {
  DatasetContainer container = load_container(flags.data);
  if (flags.truncate_train > 0) {
    if (flags.truncate_train > container.train.count)
      throw DomainError("train: --truncate-train exceeds the training set");
    container.train.count = flags.truncate_train;
    container.train.values.resize(std::size_t(flags.truncate_train) *
                                  container.train.len * container.train.dim);
  }
  normalize_container(container);
  const FittedModel fitted = fit_model(flags.model, flags.options, container,
                                       flags.lookback, flags.seed);
  out << "model: " << flags.model << "  params: " << fitted.param_count
      << "\n";
  print_metrics(out, fitted.mse, fitted.mae);
  if (!flags.out.empty()) {
    if (!fitted.checkpoint)
      throw DomainError("train: " + flags.model + " has no checkpoint to save");
    save_model_file(fitted.checkpoint(), flags.out);
    out << "wrote " << flags.out << "\n";
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Trajectory forecasting toolkit: dataset generation, linear "
               "baselines, latent linear ODE models, and benchmarks"};
  app.name("ltsf");
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  struct {
    std::string system, outfile, name;
    std::uint64_t seed = 0;
    int n_train = -1, n_test = -1, traj_len = 0, workers = 0;
    bool no_noise = false;
    std::vector<std::string> sets;
  } g;
  gen->add_option("--system", g.system,
                  "sinewave | mackey_glass | lorenz | lotka_volterra | ks | "
                  "cahn_hilliard")
      ->required();
  gen->add_option("--seed", g.seed, "Generator seed")->required();
  gen->add_option("--out", g.outfile, "Output container path")->required();
  gen->add_option("--name", g.name, "Container name (default: system)");
  gen->add_option("--n-train", g.n_train, "Training trajectories");
  gen->add_option("--n-test", g.n_test, "Test trajectories");
  gen->add_option("--traj-len", g.traj_len, "Frames per trajectory");
  gen->add_flag("--no-noise", g.no_noise, "Disable process noise");
  gen->add_option("--workers", g.workers,
                  "Worker threads (default: LTSF_WORKERS or 1)");
  gen->add_option("--set", g.sets, "Override a system constant, key=value");

  // import
  auto* imp = app.add_subcommand("import", "Import a CSV series");
  CsvImportSpec import_spec;
  std::string import_out, import_columns;
  imp->add_option("--csv", import_spec.path, "Input CSV path")->required();
  imp->add_option("--out", import_out, "Output container path")->required();
  imp->add_option("--name", import_spec.name, "Container name")->required();
  imp->add_option("--traj-len", import_spec.traj_len, "Window length")
      ->required();
  imp->add_option("--stride", import_spec.stride, "Window stride (default 1)");
  imp->add_option("--split", import_spec.split,
                  "Train fraction in (0,1) or a timestamp (default 0.8)");
  imp->add_option("--columns", import_columns,
                  "Comma-separated value columns (default: numeric columns)");
  imp->add_option("--subsample", import_spec.subsample,
                  "Keep each window with this probability");
  imp->add_option("--seed", import_spec.seed, "Subsampling seed");

  // inspect
  auto* ins = app.add_subcommand("inspect", "Print container shapes and metadata");
  std::string inspect_path;
  ins->add_option("path", inspect_path, "Container path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Fit or train a model");
  TrainFlags train_flags;
  std::map<std::string, std::string> train_raw;
  tr->add_option("--data", train_flags.data, "Container path")->required();
  tr->add_option("--model", train_flags.model,
                 "linode | linode-dde | nlinear | nlinear-b | latent-nlinear "
                 "| persistence")
      ->required();
  tr->add_option("--lookback", train_flags.lookback, "Lookback length L")
      ->required();
  tr->add_option("--out", train_flags.out, "Checkpoint output path");
  tr->add_option("--seed", train_flags.seed, "Training seed");
  tr->add_option("--truncate-train", train_flags.truncate_train,
                 "Use only the first N training trajectories");
  const std::vector<std::string> train_option_keys = {
      "lambda",         "window_stride",  "epochs",        "batch_size",
      "lr",             "eval_every",     "curriculum",    "latent_dim",
      "matrix_class",   "encoder",        "decoder",       "encoder_hidden",
      "decoder_hidden", "step_unit",      "delay"};
  for (const auto& key : train_option_keys) {
    std::string flag = "--" + key;
    for (auto& c : flag)
      if (c == '_') c = '-';
    tr->add_option(flag, train_raw[key],
                   "Model option, see the benchmark config keys");
  }

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint or persistence");
  struct {
    std::string data, model_file, model;
    int lookback = 0;
  } e;
  ev->add_option("--data", e.data, "Container path")->required();
  ev->add_option("--model-file", e.model_file, "Checkpoint path");
  ev->add_option("--model", e.model, "persistence (no checkpoint needed)");
  ev->add_option("--lookback", e.lookback, "Lookback for --model persistence");

  // benchmark
  auto* bm = app.add_subcommand("benchmark", "Run a benchmark config");
  struct {
    std::string config, out_csv, out_md, out_svg;
  } b;
  bm->add_option("--config", b.config, "Benchmark config path")->required();
  bm->add_option("--out-csv", b.out_csv, "Write the CSV table here");
  bm->add_option("--out-md", b.out_md, "Write the markdown table here");
  bm->add_option("--out-svg", b.out_svg, "Write the bar chart here");

  // export-csv
  auto* ex = app.add_subcommand("export-csv", "Write a container as CSV");
  std::string export_data, export_dir;
  ex->add_option("--data", export_data, "Container path")->required();
  ex->add_option("--out-dir", export_dir, "Output directory")->required();

  // plot
  auto* pl = app.add_subcommand("plot", "Plot a trajectory as SVG");
  struct {
    std::string data, split = "test", dims, outfile;
    int traj = 0;
  } p;
  pl->add_option("--data", p.data, "Container path")->required();
  pl->add_option("--split", p.split, "train or test (default test)");
  pl->add_option("--traj", p.traj, "Trajectory index");
  pl->add_option("--dims", p.dims, "Comma-separated dimension indices");
  pl->add_option("--out", p.outfile, "Output SVG path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (*gen) {
      GeneratorSpec spec;
      spec.system = g.system;
      spec.seed = g.seed;
      if (g.n_train >= 0) spec.n_train = g.n_train;
      if (g.n_test >= 0) spec.n_test = g.n_test;
      spec.traj_len = g.traj_len;
      spec.noise_enabled = !g.no_noise;
      spec.workers = resolve_workers(g.workers);
      for (const auto& kv : g.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
          throw DomainError("generate: --set expects key=value: " + kv);
        spec.overrides[kv.substr(0, eq)] =
            parse_number(kv.substr(eq + 1), "generate: --set " + kv.substr(0, eq));
      }
      const TrajectorySet all = generate(spec);
      const DatasetContainer container =
          make_container(g.name.empty() ? g.system : g.name, all, spec.n_train);
      save_container(container, g.outfile);
      out << "wrote " << g.outfile << ": train " << shape(container.train)
          << ", test " << shape(container.test) << "\n";
      if (container.train.regenerated + container.test.regenerated > 0)
        out << "regenerated trajectories: "
            << container.train.regenerated + container.test.regenerated << "\n";
    } else if (*imp) {
      import_spec.columns = split_commas(import_columns);
      if (import_spec.split.empty()) import_spec.split = "0.8";
      const DatasetContainer container = import_csv(import_spec);
      save_container(container, import_out);
      out << "wrote " << import_out << ": train " << shape(container.train)
          << ", test " << shape(container.test) << "\n";
    } else if (*ins) {
      const DatasetContainer container = load_container(inspect_path);
      out << "name: " << container.name << "\n";
      out << "train: " << shape(container.train) << "\n";
      out << "test: " << shape(container.test) << "\n";
      out << "metadata:\n";
      for (const auto& [key, value] : container.metadata)
        out << "  " << key << "=" << value << "\n";
    } else if (*tr) {
      for (const auto& key : train_option_keys) {
        std::string flag = "--" + key;
        for (auto& c : flag)
          if (c == '_') c = '-';
        if (tr->count(flag)) train_flags.options[key] = train_raw[key];
      }
      run_train(train_flags, out);
    } else if (*ev) {
      const DatasetContainer container = load_container(e.data);
      ForecastFn fn;
      int L = 0, T = 0;
      long long params = 0;
      if (!e.model_file.empty()) {
        if (!e.model.empty())
          throw DomainError("evaluate: pass either --model-file or --model");
        fn = forecast_from_model_file(load_model_file(e.model_file), L, T,
                                      params);
      } else if (e.model == "persistence") {
        if (e.lookback < 1)
          throw DomainError("evaluate: --model persistence needs --lookback");
        L = e.lookback;
        T = container.test.len - L;
        fn = [T](const Eigen::Ref<const RowMajorMatrix>& w) {
          return persistence_predict(w, T);
        };
      } else {
        throw DomainError(
            "evaluate: pass --model-file or --model persistence");
      }
      const auto [mse_value, mae_value] =
          evaluate(fn, container, {container.name, L, T});
      out << "model params: " << params << "\n";
      print_metrics(out, mse_value, mae_value);
    } else if (*bm) {
      std::ifstream stream(b.config);
      if (!stream) throw DataError("cannot open " + b.config);
      std::ostringstream text;
      text << stream.rdbuf();
      const BenchConfig config = parse_bench_config(text.str());
      const BenchmarkReport report = run_benchmark(config);
      out << render_table(report, "markdown");
      if (!b.out_csv.empty()) write_text_file(b.out_csv, render_table(report, "csv"));
      if (!b.out_md.empty())
        write_text_file(b.out_md, render_table(report, "markdown"));
      if (!b.out_svg.empty()) write_text_file(b.out_svg, render_bar_svg(report));
    } else if (*ex) {
      const DatasetContainer container = load_container(export_data);
      export_csv(container, export_dir);
      out << "wrote " << export_dir << "/" << container.name
          << "_train.csv and " << container.name << "_test.csv\n";
    } else if (*pl) {
      if (p.split != "train" && p.split != "test")
        throw DomainError("plot: --split must be train or test");
      const DatasetContainer container = load_container(p.data);
      std::vector<int> dims;
      for (const auto& item : split_commas(p.dims))
        dims.push_back(int(parse_number(item, "plot: --dims")));
      write_text_file(p.outfile,
                      trajectory_svg(container, p.split, p.traj, dims));
      out << "wrote " << p.outfile << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? 0 : 1;
  } catch (const DomainError& de) {
    err << "error: " << de.what() << "\n";
    return 1;
  } catch (const DataError& de) {
    err << "error: " << de.what() << "\n";
    return 2;
  } catch (const NumericalError& ne) {
    err << "error: " << ne.what() << "\n";
    return 3;
  } catch (const std::exception& se) {
    err << "error: " << se.what() << "\n";
    return 1;
  }
}

}  // namespace ltsf
