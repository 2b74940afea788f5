#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capa/baselines.hpp"
#include "capa/checkpoint.hpp"
#include "capa/config.hpp"

namespace capa {

// CSV files are UTF-8 with '\n' endings, header row first, stable column
// order; sweep rows are sorted before writing.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

std::string csv_double(double v);

// gen: dataset manifests (seeds + counts + grid specs); points are always
// regenerated, never materialized.
void cmd_gen(const ResolvedConfig& rc, const std::string& out_dir);

struct TrainArtifacts {
  std::string checkpoint_path;
  std::string log_csv_path;
  double final_eval_se = 0.0;  // held-out SE of the checkpointed parameters
  int best_epoch = 0;
  bool diverged = false;
};

TrainArtifacts cmd_train(const ResolvedConfig& rc, const std::string& out_dir);

struct EvalRow {
  Point3 r_o;
  double se_bits = 0.0;
  double power_residual = 0.0;
  double wall_s = 0.0;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  double mean_se = 0.0;
};

// Per-position SE of a checkpoint on the high-resolution eval grids, written
// as CSV. Positions come from the config's eval seed split.
EvalSummary cmd_eval(const ResolvedConfig& rc, const std::string& checkpoint_path,
                     const std::string& out_csv);

struct BaselineOptions {
  std::string method = "wmmse";  // wmmse | fourier | spda
  double tol = 1e-6;
  int max_iter = 200;
  int truncation = -1;    // -1: ceil(L / lambda) per axis
  double spacing = -1.0;  // -1: lambda / 2
};

EvalSummary cmd_baseline(const ResolvedConfig& rc, const BaselineOptions& opts,
                         const std::string& out_csv);

struct SweepOptions {
  std::string axis = "power";  // power | aperture_bs | aperture_ue
  std::vector<double> values;
  std::vector<std::string> methods;  // wmmse, fourier, spda, beainr, coefinr
  std::string beainr_checkpoint;
  std::string coefinr_checkpoint;
  BaselineOptions baseline;
};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string method;
  double mean_se_bits = 0.0;
  double std_se_bits = 0.0;
  int n_positions = 0;
  double wall_s = 0.0;
};

std::vector<SweepRow> cmd_sweep(const ResolvedConfig& rc, const SweepOptions& opts,
                                const std::string& out_csv);

struct BenchRow {
  std::string method;
  double min_s = 0.0;
  double median_s = 0.0;
  double max_s = 0.0;
};

// Median-of-5 per-position inference timing; non-normative.
std::vector<BenchRow> cmd_bench(const ResolvedConfig& rc, const SweepOptions& opts,
                                const std::string& out_csv);

// Loads a checkpoint with encode extents taken from the config (training
// geometry), regardless of any sweep-time geometry shifts.
InrModel load_model_for_config(const ResolvedConfig& rc, const std::string& path);

}  // namespace capa
