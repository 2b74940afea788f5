#include "cli_main.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "capa/error.hpp"
#include "capa/harness.hpp"

namespace capa {

namespace {

std::string default_ckpt(const std::string& out_dir, const std::string& model) {
  return (std::filesystem::path(out_dir) / (model + ".ckpt")).string();
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"capa - continuous-aperture MIMO beamforming toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  bool deterministic = false;

  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--seed", seed_override, "override training.root_seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_flag("--deterministic", deterministic, "single-threaded, ordered reductions");
  app.add_option("--out", out_override, "override output.dir");

  auto* gen = app.add_subcommand("gen", "write dataset manifests");
  auto* train = app.add_subcommand("train", "train an INR beamformer");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint per position");
  auto* baseline = app.add_subcommand("baseline", "run a numerical baseline");
  auto* sweep = app.add_subcommand("sweep", "sweep a parameter across methods");
  auto* bench = app.add_subcommand("bench", "time per-position inference (non-normative)");
  for (CLI::App* cmd : {gen, train, eval, baseline, sweep, bench}) cmd->fallthrough();

  std::string ckpt_path;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint to evaluate");

  BaselineOptions bopts;
  baseline->add_option("--method", bopts.method, "wmmse|fourier|spda");
  baseline->add_option("--tol", bopts.tol, "WMMSE stopping tolerance (bits)");
  baseline->add_option("--max-iter", bopts.max_iter, "WMMSE iteration cap");
  baseline->add_option("--truncation", bopts.truncation, "Fourier truncation per axis");
  baseline->add_option("--spacing", bopts.spacing, "SPDA element spacing (m)");

  SweepOptions sopts;
  for (CLI::App* cmd : {sweep, bench}) {
    cmd->add_option("--axis", sopts.axis, "power|aperture_bs|aperture_ue");
    cmd->add_option("--values", sopts.values, "swept values");
    cmd->add_option("--methods", sopts.methods, "methods to compare");
    cmd->add_option("--beainr-ckpt", sopts.beainr_checkpoint, "BeaINR checkpoint");
    cmd->add_option("--coefinr-ckpt", sopts.coefinr_checkpoint, "CoefINR checkpoint");
    cmd->add_option("--truncation", sopts.baseline.truncation, "Fourier truncation");
    cmd->add_option("--spacing", sopts.baseline.spacing, "SPDA spacing (m)");
  }

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig raw = load_run_config(config_path);
    if (seed_set) raw.root_seed = seed_override;
    if (deterministic) raw.deterministic = true;
    if (!out_override.empty()) raw.out_dir = out_override;
    const ResolvedConfig rc = resolve_config(raw);
    const std::string out_dir = rc.cfg.out_dir;
    std::filesystem::create_directories(out_dir);

    if (gen->parsed()) {
      cmd_gen(rc, out_dir);
      std::printf("manifest written to %s\n", out_dir.c_str());
    } else if (train->parsed()) {
      const TrainArtifacts art = cmd_train(rc, out_dir);
      std::printf("checkpoint: %s (best epoch %d, eval SE %.6f bits)\n",
                  art.checkpoint_path.c_str(), art.best_epoch, art.final_eval_se);
    } else if (eval->parsed()) {
      if (ckpt_path.empty()) ckpt_path = default_ckpt(out_dir, rc.cfg.model);
      const std::string csv =
          (std::filesystem::path(out_dir) / (rc.cfg.model + "_eval.csv")).string();
      const EvalSummary s = cmd_eval(rc, ckpt_path, csv);
      std::printf("eval: %zu positions, mean SE %.6f bits -> %s\n", s.rows.size(),
                  s.mean_se, csv.c_str());
    } else if (baseline->parsed()) {
      const std::string csv =
          (std::filesystem::path(out_dir) / (bopts.method + "_eval.csv")).string();
      const EvalSummary s = cmd_baseline(rc, bopts, csv);
      std::printf("baseline %s: %zu positions, mean SE %.6f bits -> %s\n",
                  bopts.method.c_str(), s.rows.size(), s.mean_se, csv.c_str());
    } else if (sweep->parsed()) {
      if (sopts.methods.empty()) sopts.methods = {"wmmse", "fourier", "spda"};
      for (const auto& m : sopts.methods) {
        if (m == "beainr" && sopts.beainr_checkpoint.empty())
          sopts.beainr_checkpoint = default_ckpt(out_dir, "beainr");
        if (m == "coefinr" && sopts.coefinr_checkpoint.empty())
          sopts.coefinr_checkpoint = default_ckpt(out_dir, "coefinr");
      }
      const std::string csv =
          (std::filesystem::path(out_dir) / ("sweep_" + sopts.axis + ".csv")).string();
      const auto rows = cmd_sweep(rc, sopts, csv);
      std::printf("sweep %s: %zu rows -> %s\n", sopts.axis.c_str(), rows.size(),
                  csv.c_str());
    } else if (bench->parsed()) {
      if (sopts.methods.empty()) sopts.methods = {"wmmse", "fourier", "spda"};
      const std::string csv = (std::filesystem::path(out_dir) / "bench.csv").string();
      const auto rows = cmd_bench(rc, sopts, csv);
      std::printf("bench: %zu methods -> %s (non-normative timings)\n", rows.size(),
                  csv.c_str());
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace capa
