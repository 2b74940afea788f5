#include "capa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "capa/datasets.hpp"
#include "capa/error.hpp"
#include "capa/parallel.hpp"
#include "capa/rng.hpp"

namespace capa {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

void write_resolved_echo(const ResolvedConfig& rc, const std::string& out_dir) {
  write_text(join(out_dir, "resolved_config.ini"), resolved_config_text(rc));
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string checkpoint_name(const std::string& model) { return model + ".ckpt"; }

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd ms;
  if (v.empty()) return ms;
  ms.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - ms.mean) * (x - ms.mean);
  ms.std_dev = v.size() > 1 ? std::sqrt(acc / (v.size() - 1)) : 0.0;
  return ms;
}

}  // namespace

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open CSV for writing: " + path);
  f << header << "\n";
  for (const auto& r : rows) f << r << "\n";
  if (!f) throw IoError("CSV write failed: " + path);
}

void cmd_gen(const ResolvedConfig& rc, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_resolved_echo(rc, out_dir);
  const RunConfig& c = rc.cfg;
  std::ostringstream os;
  os << "format = capa-manifest-1\n";
  os << "model = " << c.model << "\n";
  os << "root_seed = " << c.root_seed << "\n";
  os << "sobol_seed = " << c.sobol_seed << "\n";
  os << "train_count = " << c.num_samples << "\n";
  os << "eval_count = " << c.eval_positions << "\n";
  os << "m_ug = " << c.m_ug << "\n";
  os << "m_bg = " << c.m_bg << "\n";
  os << "m_us = " << c.m_us << "\n";
  os << "m_bs = " << c.m_bs << "\n";
  os << "bs_len_x = " << csv_double(c.bs_len_x) << "\n";
  os << "bs_len_y = " << csv_double(c.bs_len_y) << "\n";
  os << "ue_len_x = " << csv_double(c.ue_len_x) << "\n";
  os << "ue_len_y = " << csv_double(c.ue_len_y) << "\n";
  os << "user_x_min = " << csv_double(c.user_x_min) << "\n";
  os << "user_x_max = " << csv_double(c.user_x_max) << "\n";
  os << "user_y_min = " << csv_double(c.user_y_min) << "\n";
  os << "user_y_max = " << csv_double(c.user_y_max) << "\n";
  os << "user_z_min = " << csv_double(c.user_z_min) << "\n";
  os << "user_z_max = " << csv_double(c.user_z_max) << "\n";
  write_text(join(out_dir, "datasets.manifest"), os.str());
}

TrainArtifacts cmd_train(const ResolvedConfig& rc, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_resolved_echo(rc, out_dir);
  const TrainSetup setup = make_train_setup(rc);
  const TrainOptions opts = make_train_options(rc);

  TrainArtifacts art;
  art.checkpoint_path = join(out_dir, checkpoint_name(rc.cfg.model));
  art.log_csv_path = join(out_dir, rc.cfg.model + "_train_log.csv");

  const TrainResult result =
      train(setup, opts, [&](const InrModel& model, int, double) {
        save_checkpoint(art.checkpoint_path, model);
      });

  std::vector<std::string> rows;
  for (const auto& e : result.log) {
    std::ostringstream os;
    os << e.epoch << "," << csv_double(e.mean_train_loss) << ","
       << csv_double(e.eval_se_bits) << "," << csv_double(e.wall_s);
    rows.push_back(os.str());
  }
  write_csv(art.log_csv_path, "epoch,mean_train_loss,eval_se_bits,wall_s", rows);

  // best-so-far parameters; on divergence this is the last good state
  save_checkpoint(art.checkpoint_path, result.model);
  art.final_eval_se = result.best_eval_se;
  art.best_epoch = result.best_epoch;
  art.diverged = result.diverged;
  if (result.diverged)
    throw NumericalError("training diverged (non-finite loss); last good checkpoint kept at " +
                         art.checkpoint_path);
  return art;
}

InrModel load_model_for_config(const ResolvedConfig& rc, const std::string& path) {
  const CheckpointHeader head = peek_checkpoint(path);
  const Aperture surface =
      head.kind == ModelKind::BeaInr ? bs_aperture(rc.cfg) : ue_aperture_local(rc.cfg);
  return load_checkpoint(path, surface, user_region(rc.cfg),
                         activation_from_name(rc.cfg.activation),
                         rc.cfg.fourier_base_scale);
}

namespace {

EvalSummary write_eval_rows(const std::vector<EvalRow>& rows, const std::string& out_csv) {
  EvalSummary summary;
  summary.rows = rows;
  std::vector<std::string> lines;
  double acc = 0.0;
  for (const auto& r : rows) {
    std::ostringstream os;
    os << csv_double(r.r_o.x) << "," << csv_double(r.r_o.y) << "," << csv_double(r.r_o.z)
       << "," << csv_double(r.se_bits) << "," << csv_double(r.power_residual) << ","
       << csv_double(r.wall_s);
    lines.push_back(os.str());
    acc += r.se_bits;
  }
  summary.mean_se = rows.empty() ? 0.0 : acc / rows.size();
  if (!out_csv.empty())
    write_csv(out_csv, "ro_x,ro_y,ro_z,se_bits,power_residual,wall_s", lines);
  return summary;
}

}  // namespace

EvalSummary cmd_eval(const ResolvedConfig& rc, const std::string& checkpoint_path,
                     const std::string& out_csv) {
  const TrainSetup setup = make_train_setup(rc);
  const InrModel model = load_model_for_config(rc, checkpoint_path);
  const DatasetSpec eval_set{rc.cfg.root_seed, rc.cfg.sobol_seed, "eval",
                             rc.cfg.eval_positions, setup.region};
  std::vector<EvalRow> rows(eval_set.count);
  const int threads = rc.cfg.deterministic ? 1 : rc.cfg.threads;
  parallel_for(eval_set.count, threads, [&](long k) {
    EvalRow row;
    row.r_o = eval_set.position(k);
    const double t0 = now_s();
    row.se_bits = eval_model_se(model, setup, row.r_o, &row.power_residual);
    row.wall_s = now_s() - t0;
    rows[k] = row;
  });
  return write_eval_rows(rows, out_csv);
}

namespace {

BaselineOptions resolve_baseline_defaults(const ResolvedConfig& rc, BaselineOptions o) {
  if (o.truncation < 0)
    o.truncation = default_fourier_truncation(rc.cfg.bs_len_x, rc.wavelength);
  if (o.spacing <= 0.0) o.spacing = rc.wavelength / 2.0;
  return o;
}

// Solve one baseline at one position on the eval grids; returns the beamformer
// and its SE (evaluated by the solver's own discretization).
double baseline_se_at(const ResolvedConfig& rc, const TrainSetup& setup,
                      const BaselineOptions& opts, const Point3& r_o, long k,
                      double p_max, double* power_residual) {
  const QuadratureGrid rx = setup.rx_gl_eval_local.translated(r_o);
  PhysicalConfig phys = setup.phys;
  phys.power_budget = p_max;
  BeamformerSamples w;
  double se = 0.0;
  if (opts.method == "wmmse") {
    const WmmseResult res =
        wmmse_solve(setup.tx_gl_eval, rx, phys, p_max, opts.tol, opts.max_iter,
                    derive_seed(rc.cfg.root_seed, "wmmse_init", k));
    w = res.w;
    se = res.se_bits;
  } else if (opts.method == "fourier") {
    const FourierResult res = fourier_solve(setup.tx_gl_eval, rx, setup.bs, phys, p_max,
                                            opts.truncation, opts.truncation);
    w = res.w;
    se = res.se_bits;
  } else if (opts.method == "spda") {
    const SpdaResult res = spda_solve(setup.bs, rx, phys, p_max, opts.spacing);
    w = res.w;
    se = res.se_bits;
  } else {
    throw ConfigError("unknown baseline method: " + opts.method);
  }
  if (power_residual)
    *power_residual = std::abs(transmit_power(w) - p_max) / p_max;
  return se;
}

}  // namespace

EvalSummary cmd_baseline(const ResolvedConfig& rc, const BaselineOptions& opts_in,
                         const std::string& out_csv) {
  const BaselineOptions opts = resolve_baseline_defaults(rc, opts_in);
  const TrainSetup setup = make_train_setup(rc);
  const DatasetSpec eval_set{rc.cfg.root_seed, rc.cfg.sobol_seed, "eval",
                             rc.cfg.eval_positions, setup.region};
  std::vector<EvalRow> rows(eval_set.count);
  const int threads = rc.cfg.deterministic ? 1 : rc.cfg.threads;
  parallel_for(eval_set.count, threads, [&](long k) {
    EvalRow row;
    row.r_o = eval_set.position(k);
    const double t0 = now_s();
    row.se_bits = baseline_se_at(rc, setup, opts, row.r_o, k, setup.phys.power_budget,
                                 &row.power_residual);
    row.wall_s = now_s() - t0;
    rows[k] = row;
  });
  return write_eval_rows(rows, out_csv);
}

namespace {

// Sweep geometry: one axis value applied to a copy of the base config, with
// auto-resolved sampling counts recomputed for the new geometry. Stream count
// and the INR encode extents stay at their base values (the generalization
// protocol evaluates fixed checkpoints on shifted apertures).
ResolvedConfig sweep_variant(const ResolvedConfig& base, const std::string& axis,
                             double value) {
  RunConfig raw = base.cfg;
  raw.num_streams = base.n_streams;
  if (axis == "power") {
    raw.power_budget = value;
  } else if (axis == "aperture_bs") {
    raw.bs_len_x = raw.bs_len_y = std::sqrt(value);
    raw.m_bg = 0;
    raw.m_bs = 0;
    raw.m_bg_eval = 0;
  } else if (axis == "aperture_ue") {
    raw.ue_len_x = raw.ue_len_y = std::sqrt(value);
    raw.m_bg = 0;
    raw.m_bs = 0;
    raw.m_bg_eval = 0;
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
  return resolve_config(raw);
}

}  // namespace

std::vector<SweepRow> cmd_sweep(const ResolvedConfig& rc, const SweepOptions& opts,
                                const std::string& out_csv) {
  if (opts.values.empty() || opts.methods.empty())
    throw ConfigError("sweep needs at least one value and one method");

  // fixed checkpoints, base-config extents
  std::optional<InrModel> beainr;
  std::optional<InrModel> coefinr;
  for (const auto& m : opts.methods) {
    if (m == "beainr") {
      if (opts.beainr_checkpoint.empty())
        throw ConfigError("sweep method beainr requires a checkpoint");
      beainr = load_model_for_config(rc, opts.beainr_checkpoint);
    } else if (m == "coefinr") {
      if (opts.coefinr_checkpoint.empty())
        throw ConfigError("sweep method coefinr requires a checkpoint");
      coefinr = load_model_for_config(rc, opts.coefinr_checkpoint);
    }
  }

  std::vector<SweepRow> out;
  const int threads = rc.cfg.deterministic ? 1 : rc.cfg.threads;
  for (const double value : opts.values) {
    const ResolvedConfig vrc = sweep_variant(rc, opts.axis, value);
    const TrainSetup setup = make_train_setup(vrc);
    const DatasetSpec eval_set{rc.cfg.root_seed, rc.cfg.sobol_seed, "eval",
                               rc.cfg.eval_positions, setup.region};
    for (const auto& method : opts.methods) {
      const double t0 = now_s();
      std::vector<double> se(eval_set.count, 0.0);
      parallel_for(eval_set.count, threads, [&](long k) {
        const Point3 r_o = eval_set.position(k);
        if (method == "beainr") {
          se[k] = eval_model_se(*beainr, setup, r_o);
        } else if (method == "coefinr") {
          se[k] = eval_model_se(*coefinr, setup, r_o);
        } else {
          BaselineOptions bopts = opts.baseline;
          bopts.method = method;
          bopts = resolve_baseline_defaults(vrc, bopts);
          se[k] = baseline_se_at(vrc, setup, bopts, r_o, k, setup.phys.power_budget,
                                 nullptr);
        }
      });
      const MeanStd ms = mean_std(se);
      SweepRow row;
      row.axis = opts.axis;
      row.value = value;
      row.method = method;
      row.mean_se_bits = ms.mean;
      row.std_se_bits = ms.std_dev;
      row.n_positions = static_cast<int>(eval_set.count);
      row.wall_s = now_s() - t0;
      out.push_back(row);
    }
  }

  std::sort(out.begin(), out.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.method < b.method;
  });
  std::vector<std::string> lines;
  for (const auto& r : out) {
    std::ostringstream os;
    os << r.axis << "," << csv_double(r.value) << "," << r.method << ","
       << csv_double(r.mean_se_bits) << "," << csv_double(r.std_se_bits) << ","
       << r.n_positions << "," << csv_double(r.wall_s);
    lines.push_back(os.str());
  }
  if (!out_csv.empty())
    write_csv(out_csv,
              "sweep_param,value,method,mean_se_bits,std_se_bits,n_positions,wall_s",
              lines);
  return out;
}

std::vector<BenchRow> cmd_bench(const ResolvedConfig& rc, const SweepOptions& opts,
                                const std::string& out_csv) {
  const TrainSetup setup = make_train_setup(rc);
  const long positions = std::min<long>(rc.cfg.eval_positions, 8);
  if (positions < 1) throw ConfigError("bench needs at least one eval position");
  const DatasetSpec eval_set{rc.cfg.root_seed, rc.cfg.sobol_seed, "eval", positions,
                             setup.region};

  std::optional<InrModel> beainr;
  std::optional<InrModel> coefinr;
  if (!opts.beainr_checkpoint.empty())
    beainr = load_model_for_config(rc, opts.beainr_checkpoint);
  if (!opts.coefinr_checkpoint.empty())
    coefinr = load_model_for_config(rc, opts.coefinr_checkpoint);

  // Produce the beamformer on the eval tx grid (numerical methods pay their
  // full solve; INR inference is the network pass plus normalization).
  const auto produce = [&](const std::string& method, const Point3& r_o, long k) {
    const QuadratureGrid rx = setup.rx_gl_eval_local.translated(r_o);
    if (method == "beainr" || method == "coefinr") {
      const InrModel& model = method == "beainr" ? *beainr : *coefinr;
      Eigen::MatrixXcd w_raw;
      if (model.kind == ModelKind::BeaInr) {
        w_raw = inr_eval(model, setup.tx_gl_eval.points, r_o);
      } else {
        const Eigen::MatrixXcd h =
            channel_matrix(rx.points, setup.tx_gl_eval.points, setup.phys);
        const Eigen::MatrixXcd c = inr_eval(model, setup.rx_gl_eval_local.points, r_o);
        w_raw = reconstruct_from_kernel(c, rx.weights, h);
      }
      BeamformerSamples w{setup.tx_gl_eval, std::move(w_raw)};
      normalize_power(w, setup.phys.power_budget);
    } else {
      BaselineOptions bopts = opts.baseline;
      bopts.method = method;
      bopts = resolve_baseline_defaults(rc, bopts);
      baseline_se_at(rc, setup, bopts, r_o, k, setup.phys.power_budget, nullptr);
    }
  };

  std::vector<BenchRow> rows;
  for (const auto& method : opts.methods) {
    if (method == "beainr" && !beainr) throw ConfigError("bench: missing beainr checkpoint");
    if (method == "coefinr" && !coefinr)
      throw ConfigError("bench: missing coefinr checkpoint");
    std::vector<double> per_rep;
    for (int rep = 0; rep < 5; ++rep) {
      const double t0 = now_s();
      for (long k = 0; k < positions; ++k) produce(method, eval_set.position(k), k);
      per_rep.push_back((now_s() - t0) / positions);
    }
    std::sort(per_rep.begin(), per_rep.end());
    rows.push_back(BenchRow{method, per_rep.front(), per_rep[2], per_rep.back()});
  }
  std::vector<std::string> lines;
  for (const auto& r : rows) {
    std::ostringstream os;
    os << r.method << "," << csv_double(r.min_s) << "," << csv_double(r.median_s) << ","
       << csv_double(r.max_s);
    lines.push_back(os.str());
  }
  if (!out_csv.empty())
    write_csv(out_csv, "method,min_s,median_s,max_s", lines);
  return rows;
}

}  // namespace capa
