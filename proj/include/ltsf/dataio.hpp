#pragma once

#include <filesystem>
#include <optional>

#include "ltsf/dynsys.hpp"

namespace ltsf {

/// A named train/test pair of trajectory tensors, the unit every model and
/// benchmark consumes. Optional shared timestamps cover the time axis of a
/// block (only stored when every trajectory shares one time axis).
struct DatasetContainer {
  std::string name;
  std::map<std::string, std::string> metadata;
  TrajectorySet train;
  TrajectorySet test;
  std::optional<Vector> train_timestamps;
  std::optional<Vector> test_timestamps;
};

/// Splits a generated TrajectorySet into the first n_train trajectories and
/// the rest, and attaches the uniform time axis (j * dt).
DatasetContainer make_container(const std::string& name, const TrajectorySet& all,
                                int n_train);

// Binary container file, little-endian throughout:
//   "LTSF"  u16 version=1  u32 metadata_len  metadata bytes
//   then two tensor blocks (train, test), each:
//   u8 ndim=3  u64 dims[3]  u8 has_timestamps  [dims[1] x f64]  values f32
// Metadata is newline-separated key=value UTF-8 and must include name.
// Values are stored row-major (trajectory, time, dim) as f32.
void save_container(const DatasetContainer& c, const std::filesystem::path& path);
DatasetContainer load_container(const std::filesystem::path& path);

struct CsvImportSpec {
  std::filesystem::path path;
  std::string name;
  int traj_len = 0;
  int stride = 1;
  std::string split;  // fraction in (0,1), e.g. "0.8", or a timestamp string
  std::vector<std::string> columns;  // empty = every numeric column
  double subsample = 1.0;            // keep each window with this probability
  std::uint64_t seed = 0;
};

/// Imports a single multivariate series from CSV (first line is the header).
/// Rows are split into a train and a test side first; traj_len-row windows at
/// the given stride are then cut from each side separately, so no window
/// straddles the split. A fraction split puts floor(f * rows) rows in train;
/// a timestamp split puts rows whose time column compares <= the given string
/// (lexicographically, which orders ISO timestamps) in train. The time column
/// is the first non-numeric column unless the spec names one.
DatasetContainer import_csv(const CsvImportSpec& spec);

/// Start offsets of length-`window` slices at `stride` over `rows` rows.
std::vector<int> window_starts(int rows, int window, int stride);

/// Per-dimension affine normalisation fitted on a training block:
/// mean and population standard deviation (floored at 1e-8).
struct StandardScaler {
  Vector mean;
  Vector std;
};

StandardScaler fit_scaler(const TrajectorySet& train);
void scaler_apply(const StandardScaler& s, TrajectorySet& set);
void scaler_invert(const StandardScaler& s, TrajectorySet& set);

/// Fits on train and normalises both blocks in place.
StandardScaler normalize_container(DatasetContainer& c);

/// Writes <name>_train.csv and <name>_test.csv under dir:
/// header traj,t,c0..c{D-1}, one row per (trajectory, frame).
void export_csv(const DatasetContainer& c, const std::filesystem::path& dir);

}  // namespace ltsf
