#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "capa/harness.hpp"
#include "cli_main.hpp"

using namespace capa;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("harness");

namespace {

std::string tmp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("capa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& text) {
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

// small, fast configuration for harness-level runs
std::string tiny_config(const std::string& out_dir, const std::string& model = "beainr") {
  std::ostringstream os;
  os << "[physics]\nnum_streams = 1\n";
  os << "[sampling]\nm_ug = 2\nm_bg = 4\nm_us = 8\nm_bs = 16\n";
  os << "[training]\nmodel = " << model
     << "\nnum_samples = 4\nbatch_size = 2\nepochs = 2\nlr = 0.001\n"
        "eval_positions = 2\nroot_seed = 5\n";
  os << "[network]\nhidden_layers = 1\nhidden_width = 8\nfourier_k = 1\n";
  os << "[eval]\nm_ug_eval = 3\nm_bg_eval = 6\npositions = 2\n";
  os << "[output]\ndir = " << out_dir << "\n";
  return os.str();
}

}  // namespace

TEST_CASE("config parsing and resolution") {
  SUBCASE("defaults resolve to the reference desk setup") {
    const ResolvedConfig rc = resolve_config(parse_run_config(""));
    CHECK(rc.wavelength == doctest::Approx(1.0));
    CHECK(rc.n_streams == 9);  // min(25, 9) at lambda = 1
    CHECK(rc.cfg.m_bg == 24);  // (2 / 0.5) * 6
    CHECK(rc.cfg.m_bs == 2304);
    CHECK(rc.cfg.m_ug_eval == 12);
    CHECK(rc.cfg.m_bg_eval == 48);
  }
  SUBCASE("explicit stream override is honored up to the DoF bound") {
    RunConfig cfg = parse_run_config("[physics]\nnum_streams = 2\n");
    CHECK(resolve_config(cfg).n_streams == 2);
    cfg.num_streams = 10;  // exceeds min(25, 9)
    CHECK_THROWS_AS(resolve_config(cfg), ConfigError);
  }
  SUBCASE("unknown keys and sections are rejected") {
    CHECK_THROWS_AS(parse_run_config("[physics]\nfrequency = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[nonsense]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[training]\nepochs = two\n"), ConfigError);
  }
  SUBCASE("resolved echo is idempotent") {
    const std::string text = "[physics]\nnum_streams = 2\n[sampling]\nm_ug = 4\n";
    const ResolvedConfig rc = resolve_config(parse_run_config(text));
    const std::string echo1 = resolved_config_text(rc);
    const ResolvedConfig rc2 = resolve_config(parse_run_config(echo1));
    CHECK(resolved_config_text(rc2) == echo1);
  }
}

TEST_CASE("checkpoint round trip") {
  const std::string dir = tmp_dir("ckpt");
  const Aperture bs{{0, 0, 0}, 2.0, 2.0};
  const UserRegion region{{-5, 5}, {-5, 5}, {20, 30}};
  NetworkHyperparams hp;
  hp.hidden_layers = 2;
  hp.hidden_width = 12;
  hp.fourier_k = 3;
  const InrModel model = make_inr_model(ModelKind::BeaInr, 2, bs, region, hp, 99);
  const std::string path = (fs::path(dir) / "m.ckpt").string();
  save_checkpoint(path, model);

  SUBCASE("parameters reproduce bitwise") {
    const InrModel back =
        load_checkpoint(path, bs, region, Activation::ReLU, 1.0);
    CHECK(back.kind == model.kind);
    CHECK(back.n_streams == model.n_streams);
    for (std::size_t l = 0; l < model.mlp.weights.size(); ++l) {
      CHECK((back.mlp.weights[l] - model.mlp.weights[l]).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.mlp.biases[l] - model.mlp.biases[l]).cwiseAbs().maxCoeff() == 0.0);
    }
    // a second save of the loaded model is byte-identical
    const std::string path2 = (fs::path(dir) / "m2.ckpt").string();
    save_checkpoint(path2, back);
    CHECK(read_file(path) == read_file(path2));
  }
  SUBCASE("corruption is detected by the checksum") {
    std::string bytes = read_file(path);
    bytes[bytes.size() / 2] ^= 0x40;
    write_file(dir, "bad.ckpt", bytes);
    CHECK_THROWS_AS(
        load_checkpoint((fs::path(dir) / "bad.ckpt").string(), bs, region,
                        Activation::ReLU, 1.0),
        IoError);
  }
  SUBCASE("truncation is detected") {
    std::string bytes = read_file(path);
    bytes.resize(bytes.size() - 3);
    write_file(dir, "short.ckpt", bytes);
    CHECK_THROWS_AS(
        load_checkpoint((fs::path(dir) / "short.ckpt").string(), bs, region,
                        Activation::ReLU, 1.0),
        IoError);
  }
}

TEST_CASE("gen manifests are deterministic") {
  const std::string dir1 = tmp_dir("gen1");
  const std::string dir2 = tmp_dir("gen2");
  const ResolvedConfig rc = resolve_config(parse_run_config(tiny_config(dir1)));
  cmd_gen(rc, dir1);
  cmd_gen(rc, dir2);
  CHECK(read_file((fs::path(dir1) / "datasets.manifest").string()) ==
        read_file((fs::path(dir2) / "datasets.manifest").string()));

  SUBCASE("zero-count manifests are valid") {
    RunConfig cfg = parse_run_config(tiny_config(dir1));
    cfg.num_samples = 0;
    cmd_gen(resolve_config(cfg), dir1);
    const std::string text = read_file((fs::path(dir1) / "datasets.manifest").string());
    CHECK(text.find("train_count = 0") != std::string::npos);
  }
  SUBCASE("regeneration from manifest fields matches direct construction") {
    // the manifest stores (root_seed, sobol_seed, counts); rebuilding the
    // DatasetSpec reproduces sample 0 bitwise
    const DatasetSpec direct{rc.cfg.root_seed, rc.cfg.sobol_seed, "train",
                             rc.cfg.num_samples, user_region(rc.cfg)};
    const DatasetSpec rebuilt{5, 0, "train", 4, user_region(rc.cfg)};
    CHECK(direct.position(0) == rebuilt.position(0));
    CHECK(direct.sobol_tx_seed(0) == rebuilt.sobol_tx_seed(0));
  }
}

TEST_CASE("train / eval / baseline command round trip") {
  const std::string dir = tmp_dir("train");
  const ResolvedConfig rc = resolve_config(parse_run_config(tiny_config(dir)));

  const TrainArtifacts art = cmd_train(rc, dir);
  CHECK(fs::exists(art.checkpoint_path));

  SUBCASE("log CSV has exactly `epochs` rows") {
    const std::string log = read_file(art.log_csv_path);
    const long rows = std::count(log.begin(), log.end(), '\n') - 1;  // minus header
    CHECK(rows == rc.cfg.epochs);
    CHECK(log.find("epoch,mean_train_loss,eval_se_bits,wall_s") == 0);
    CHECK(log.find('\r') == std::string::npos);
  }
  SUBCASE("eval agrees with the final training eval") {
    const EvalSummary s =
        cmd_eval(rc, art.checkpoint_path, (fs::path(dir) / "eval.csv").string());
    REQUIRE(s.rows.size() == 2);  // positions = eval_positions in the tiny config
    CHECK(s.mean_se == doctest::Approx(art.final_eval_se).epsilon(1e-12));
    for (const auto& row : s.rows) CHECK(row.power_residual <= 1e-8);
  }
  SUBCASE("epochs = 0 stores the initial weights and an empty log") {
    const std::string dir0 = tmp_dir("train0");
    RunConfig cfg = parse_run_config(tiny_config(dir0));
    cfg.epochs = 0;
    const TrainArtifacts a0 = cmd_train(resolve_config(cfg), dir0);
    CHECK(fs::exists(a0.checkpoint_path));
    const std::string log = read_file(a0.log_csv_path);
    CHECK(std::count(log.begin(), log.end(), '\n') == 1);  // header only
  }
  SUBCASE("zero-weight checkpoint evaluates to flagged zero SE") {
    InrModel model = load_model_for_config(rc, art.checkpoint_path);
    for (auto& w : model.mlp.weights) w.setZero();
    for (auto& b : model.mlp.biases) b.setZero();
    const std::string zpath = (fs::path(dir) / "zero.ckpt").string();
    save_checkpoint(zpath, model);
    const EvalSummary s = cmd_eval(rc, zpath, "");
    for (const auto& row : s.rows) {
      CHECK(row.se_bits == 0.0);
      CHECK(row.power_residual == 1.0);  // degeneracy marker
    }
  }
  SUBCASE("baseline command writes rows with met power budgets") {
    BaselineOptions bo;
    bo.method = "wmmse";
    const EvalSummary s = cmd_baseline(rc, bo, (fs::path(dir) / "wmmse.csv").string());
    REQUIRE(s.rows.size() == 2);
    CHECK(s.mean_se > 0.0);
    for (const auto& row : s.rows) CHECK(row.power_residual <= 1e-8);
  }
}

TEST_CASE("sweep command") {
  const std::string dir = tmp_dir("sweep");
  const ResolvedConfig rc = resolve_config(parse_run_config(tiny_config(dir)));
  SUBCASE("single value, single method gives one row") {
    SweepOptions so;
    so.axis = "power";
    so.values = {1000.0};
    so.methods = {"spda"};
    const auto rows = cmd_sweep(rc, so, (fs::path(dir) / "s.csv").string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].method == "spda");
    CHECK(rows[0].n_positions == 2);
    const std::string text = read_file((fs::path(dir) / "s.csv").string());
    CHECK(text.find("sweep_param,value,method,mean_se_bits,std_se_bits,n_positions,"
                    "wall_s") == 0);
  }
  SUBCASE("wmmse SE increases strictly along the power axis") {
    SweepOptions so;
    so.axis = "power";
    so.values = {250.0, 1000.0, 4000.0};
    so.methods = {"wmmse"};
    const auto rows = cmd_sweep(rc, so, "");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].mean_se_bits < rows[1].mean_se_bits);
    CHECK(rows[1].mean_se_bits < rows[2].mean_se_bits);
  }
  SUBCASE("missing checkpoint for an INR method is a config error") {
    SweepOptions so;
    so.axis = "power";
    so.values = {1000.0};
    so.methods = {"beainr"};
    CHECK_THROWS_AS(cmd_sweep(rc, so, ""), ConfigError);
  }
}

TEST_CASE("bench command schema") {
  const std::string dir = tmp_dir("bench");
  RunConfig cfg = parse_run_config(tiny_config(dir));
  cfg.eval_positions = 2;
  const ResolvedConfig rc = resolve_config(cfg);
  SweepOptions so;
  so.methods = {"spda", "fourier"};
  const auto rows = cmd_bench(rc, so, (fs::path(dir) / "bench.csv").string());
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.min_s <= r.median_s);
    CHECK(r.median_s <= r.max_s);
    CHECK(r.min_s > 0.0);
  }
  const std::string text = read_file((fs::path(dir) / "bench.csv").string());
  CHECK(text.find("method,min_s,median_s,max_s") == 0);
}

TEST_CASE("cli entry point") {
  const std::string dir = tmp_dir("cli");
  const std::string cfg_path = write_file(dir, "run.ini", tiny_config(dir));

  SUBCASE("gen succeeds") {
    CHECK(cli_main({"gen", "--config", cfg_path}) == 0);
    CHECK(fs::exists(fs::path(dir) / "datasets.manifest"));
    CHECK(fs::exists(fs::path(dir) / "resolved_config.ini"));
  }
  SUBCASE("missing config file is an io error") {
    CHECK(cli_main({"gen", "--config", dir + "/nope.ini"}) == 4);
  }
  SUBCASE("bad config content is a config error") {
    const std::string bad = write_file(dir, "bad.ini", "[physics]\nwat = 1\n");
    CHECK(cli_main({"gen", "--config", bad}) == 2);
  }
  SUBCASE("bad usage is a config error") {
    CHECK(cli_main({"gen"}) == 2);
    CHECK(cli_main({"--config", cfg_path}) == 2);  // no subcommand
  }
  SUBCASE("train then eval via the cli") {
    CHECK(cli_main({"train", "--config", cfg_path, "--deterministic"}) == 0);
    CHECK(fs::exists(fs::path(dir) / "beainr.ckpt"));
    CHECK(cli_main({"eval", "--config", cfg_path, "--deterministic"}) == 0);
    CHECK(fs::exists(fs::path(dir) / "beainr_eval.csv"));
    CHECK(cli_main({"baseline", "--config", cfg_path, "--method", "spda"}) == 0);
    CHECK(fs::exists(fs::path(dir) / "spda_eval.csv"));
  }
}

TEST_SUITE_END();
