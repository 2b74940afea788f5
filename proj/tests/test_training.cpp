#include <doctest.h>

#include <cmath>

#include "capa/baselines.hpp"
#include "capa/datasets.hpp"
#include "capa/sobol.hpp"
#include "capa/training.hpp"

using namespace capa;

TEST_SUITE_BEGIN("training");

namespace {

TrainSetup small_setup(int n_streams, int m_ug = 3, int m_bg = 8, int m_us = 36,
                       int m_bs = 128) {
  TrainSetup s;
  s.phys = default_physical_config(3.0e8);
  s.phys.num_streams = n_streams;
  s.bs = {{0, 0, 0}, 2.0, 2.0};
  s.ue_local = {{0, 0, 0}, 0.5, 0.5};
  s.region = {{-5, 5}, {-5, 5}, {20, 30}};
  s.m_ug = m_ug;
  s.m_bg = m_bg;
  s.m_us = m_us;
  s.m_bs = m_bs;
  s.m_ug_eval = m_ug + 1;
  s.m_bg_eval = 3 * (m_ug + 1);
  s.finalize();
  return s;
}

NetworkHyperparams tiny_net(int width = 24, int layers = 2, int k = 2) {
  NetworkHyperparams hp;
  hp.hidden_layers = layers;
  hp.hidden_width = width;
  hp.fourier_k = k;
  return hp;
}

double flat_param(const MlpParams& p, std::size_t flat) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto wn = static_cast<std::size_t>(p.weights[l].size());
    if (flat < wn) return p.weights[l](flat / p.weights[l].cols(), flat % p.weights[l].cols());
    flat -= wn;
    const auto bn = static_cast<std::size_t>(p.biases[l].size());
    if (flat < bn) return p.biases[l][flat];
    flat -= bn;
  }
  throw std::out_of_range("flat");
}

void flat_param_set(MlpParams& p, std::size_t flat, double v) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto wn = static_cast<std::size_t>(p.weights[l].size());
    if (flat < wn) {
      p.weights[l](flat / p.weights[l].cols(), flat % p.weights[l].cols()) = v;
      return;
    }
    flat -= wn;
    const auto bn = static_cast<std::size_t>(p.biases[l].size());
    if (flat < bn) {
      p.biases[l][flat] = v;
      return;
    }
    flat -= bn;
  }
  throw std::out_of_range("flat");
}

double flat_grad(const MlpGrads& g, std::size_t flat) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    const auto wn = static_cast<std::size_t>(g.weights[l].size());
    if (flat < wn) return g.weights[l](flat / g.weights[l].cols(), flat % g.weights[l].cols());
    flat -= wn;
    const auto bn = static_cast<std::size_t>(g.biases[l].size());
    if (flat < bn) return g.biases[l][flat];
    flat -= bn;
  }
  throw std::out_of_range("flat");
}

}  // namespace

TEST_CASE("datasets regenerate bit-for-bit") {
  const UserRegion region{{-5, 5}, {-5, 5}, {20, 30}};
  const DatasetSpec a{1, 0, "train", 100, region};
  const DatasetSpec b{1, 0, "train", 100, region};
  for (long k : {0L, 1L, 57L, 99L}) {
    CHECK(a.position(k) == b.position(k));
    CHECK(a.sobol_tx_seed(k) == b.sobol_tx_seed(k));
  }
  // different indices, tags and seeds decorrelate
  CHECK(!(a.position(0) == a.position(1)));
  const DatasetSpec eval{1, 0, "eval", 100, region};
  CHECK(!(a.position(0) == eval.position(0)));
  CHECK(a.sobol_tx_seed(3) != a.sobol_rx_seed(3));
  CHECK(a.sobol_tx_seed(3) != a.sobol_tx_seed(4));
  const DatasetSpec other_sobol{1, 9, "train", 100, region};
  CHECK(a.sobol_tx_seed(3) != other_sobol.sobol_tx_seed(3));
  CHECK(a.position(3) == other_sobol.position(3));  // positions unaffected

  SUBCASE("per-sample Sobol point sets differ, shared GL grid does not") {
    const Aperture bs{{0, 0, 0}, 2.0, 2.0};
    const QuadratureGrid s0 = sobol_grid(bs, 16, a.sobol_tx_seed(0));
    const QuadratureGrid s1 = sobol_grid(bs, 16, a.sobol_tx_seed(1));
    bool differ = false;
    for (int i = 0; i < 16; ++i)
      if (!(s0.points[i] == s1.points[i])) differ = true;
    CHECK(differ);
    const QuadratureGrid r0 = sobol_grid(bs, 16, a.sobol_tx_seed(0));
    for (int i = 0; i < 16; ++i) CHECK(s0.points[i] == r0.points[i]);
  }
}

TEST_CASE("injected beamformer oracles") {
  const TrainSetup setup = small_setup(2, 4, 10, 64, 400);
  const DatasetSpec ds{3, 0, "train", 4, setup.region};
  const Point3 r_o = ds.position(0);
  const QuadratureGrid rx = setup.rx_gl_local.translated(r_o);

  SUBCASE("WMMSE samples reproduce their SE through the loss pipeline") {
    const WmmseResult wm =
        wmmse_solve(setup.tx_gl, rx, setup.phys, setup.phys.power_budget, 1e-8, 300, 11);
    const SeContext ctx(setup.tx_gl, rx, setup.phys, setup.phys.power_budget);
    const SeForward f = ctx.forward(wm.w.values);
    CHECK(-(-f.se_bits) == doctest::Approx(wm.se_bits).epsilon(1e-9));
  }
  SUBCASE("loss is invariant to positive rescaling of the raw output") {
    Rng rng(5);
    Eigen::MatrixXcd w(setup.tx_gl.size(), 2);
    for (int i = 0; i < w.size(); ++i)
      w(i % w.rows(), i / w.rows()) = {rng.gaussian(), rng.gaussian()};
    const SeContext ctx(setup.tx_gl, rx, setup.phys, setup.phys.power_budget);
    CHECK(ctx.forward(w).se_bits ==
          doctest::Approx(ctx.forward(7.3 * w).se_bits).epsilon(1e-12));
  }
  SUBCASE("N = 1 capacity upper bound from the discretized channel") {
    TrainSetup s1 = small_setup(1, 4, 10, 64, 400);
    const QuadratureGrid rx1 = s1.rx_gl_local.translated(r_o);
    const DiscretizedChannel ch = discretize_channel(s1.tx_gl, rx1, s1.phys);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch.h_d);
    const double g_top = svd.singularValues()[0] * svd.singularValues()[0];
    const double bound =
        std::log2(1.0 + s1.phys.power_budget * g_top / s1.phys.noise_sigma2);
    const SeContext ctx(s1.tx_gl, rx1, s1.phys, s1.phys.power_budget);
    Rng rng(6);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXcd w(s1.tx_gl.size(), 1);
      for (int i = 0; i < w.rows(); ++i) w(i, 0) = {rng.gaussian(), rng.gaussian()};
      CHECK(ctx.forward(w).se_bits <= bound + 1e-9);
    }
  }
}

TEST_CASE("GL and Sobol estimators agree on physical beamformers") {
  // desk-scale counts: M_BS = 4 M_BG^2
  TrainSetup setup = small_setup(2, 6, 24, 144, 2304);
  const DatasetSpec ds{7, 0, "train", 2, setup.region};
  const Point3 r_o = ds.position(1);

  const QuadratureGrid rx_gl = setup.rx_gl_local.translated(r_o);
  const QuadratureGrid tx_so = sobol_grid(setup.bs, setup.m_bs, ds.sobol_tx_seed(1));
  const QuadratureGrid rx_so =
      sobol_grid(setup.ue_local, setup.m_us, ds.sobol_rx_seed(1)).translated(r_o);

  SUBCASE("constant beamformer: identical power estimates") {
    BeamformerSamples gl{setup.tx_gl,
                         Eigen::MatrixXcd::Constant(setup.tx_gl.size(), 1, {0.7, -0.2})};
    BeamformerSamples so{tx_so, Eigen::MatrixXcd::Constant(tx_so.size(), 1, {0.7, -0.2})};
    CHECK(transmit_power(gl) == doctest::Approx(transmit_power(so)).epsilon(1e-12));
  }
  SUBCASE("matched-synthesis beamformer: losses agree within 5%") {
    // a closed-form w(s) evaluable on any grid
    Rng rng(9);
    Eigen::MatrixXcd c(setup.rx_gl_local.size(), 2);
    for (int i = 0; i < c.size(); ++i)
      c(i % c.rows(), i / c.rows()) = {rng.gaussian(), rng.gaussian()};
    const auto w_at = [&](const std::vector<Point3>& pts) {
      return reconstruct_beamformer(c, setup.rx_gl_local, r_o, pts, setup.phys);
    };
    const SeContext ctx_gl(setup.tx_gl, rx_gl, setup.phys, setup.phys.power_budget);
    const SeContext ctx_so(tx_so, rx_so, setup.phys, setup.phys.power_budget);
    const double loss_gl = -ctx_gl.forward(w_at(setup.tx_gl.points)).se_bits;
    const double loss_so = -ctx_so.forward(w_at(tx_so.points)).se_bits;
    CHECK(std::abs(loss_so - loss_gl) <= 0.05 * std::abs(loss_gl));
  }
}

TEST_CASE("total_loss combines GL and Sobol terms") {
  MlpParams like = MlpParams::init({4, 6, 2}, 3);
  const auto mk = [&](double loss, double fill) {
    SampleLoss s;
    s.loss = loss;
    s.grads = MlpGrads::zeros_like(like);
    for (auto& w : s.grads.weights) w.setConstant(fill);
    return s;
  };
  SUBCASE("lambda = 0 keeps only the GL term") {
    const SampleLoss t = total_loss({mk(2.0, 1.0)}, {mk(5.0, 10.0)}, 0.0, like);
    CHECK(t.loss == doctest::Approx(2.0));
    CHECK(t.grads.weights[0](0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("equal per-sample losses v give 1.1 v at lambda 0.1") {
    const SampleLoss t = total_loss({mk(3.0, 1.0)}, {mk(3.0, 1.0)}, 0.1, like);
    CHECK(t.loss == doctest::Approx(1.1 * 3.0).epsilon(1e-12));
    CHECK(t.grads.weights[0](0, 0) == doctest::Approx(1.1).epsilon(1e-12));
  }
  SUBCASE("gradient is the matching linear combination over a batch") {
    const SampleLoss t =
        total_loss({mk(1.0, 1.0), mk(2.0, 3.0)}, {mk(4.0, 2.0), mk(6.0, 4.0)}, 0.1, like);
    CHECK(t.loss == doctest::Approx(1.5 + 0.1 * 5.0).epsilon(1e-12));
    CHECK(t.grads.weights[0](0, 0) == doctest::Approx(2.0 + 0.1 * 3.0).epsilon(1e-12));
  }
}

TEST_CASE("end-to-end gradients match finite differences") {
  const TrainSetup setup = small_setup(2);
  const DatasetSpec ds{11, 0, "train", 2, setup.region};
  const Point3 r_o = ds.position(0);
  for (ModelKind kind : {ModelKind::BeaInr, ModelKind::CoefInr}) {
    const Aperture& surface = kind == ModelKind::BeaInr ? setup.bs : setup.ue_local;
    InrModel model = make_inr_model(kind, 2, surface, setup.region, tiny_net(12, 1, 1), 21);
    const SampleLoss base = sample_loss_gl(model, setup, r_o);
    REQUIRE_FALSE(base.degenerate);
    const std::size_t n = model.mlp.num_params();
    const double step = 1e-5;
    for (std::size_t i = 0; i < n; i += 5) {
      InrModel mp = model, mm = model;
      flat_param_set(mp.mlp, i, flat_param(model.mlp, i) + step);
      flat_param_set(mm.mlp, i, flat_param(model.mlp, i) - step);
      const double fd =
          (sample_loss_gl(mp, setup, r_o).loss - sample_loss_gl(mm, setup, r_o).loss) /
          (2 * step);
      const double an = flat_grad(base.grads, i);
      CHECK(std::abs(fd - an) <=
            1e-4 * std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
    // sobol path too
    const SampleLoss so =
        sample_loss_sobol(model, setup, r_o, ds.sobol_tx_seed(0), ds.sobol_rx_seed(0));
    REQUIRE_FALSE(so.degenerate);
    for (std::size_t i = 0; i < n; i += 23) {
      InrModel mp = model, mm = model;
      flat_param_set(mp.mlp, i, flat_param(model.mlp, i) + step);
      flat_param_set(mm.mlp, i, flat_param(model.mlp, i) - step);
      const double fd = (sample_loss_sobol(mp, setup, r_o, ds.sobol_tx_seed(0),
                                           ds.sobol_rx_seed(0))
                             .loss -
                         sample_loss_sobol(mm, setup, r_o, ds.sobol_tx_seed(0),
                                           ds.sobol_rx_seed(0))
                             .loss) /
                        (2 * step);
      const double an = flat_grad(so.grads, i);
      CHECK(std::abs(fd - an) <=
            1e-4 * std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
  }
}

TEST_CASE("loss decreases over the first training steps") {
  const TrainSetup setup = small_setup(1);
  const DatasetSpec ds{13, 0, "train", 1, setup.region};
  const Point3 r_o = ds.position(0);
  InrModel model =
      make_inr_model(ModelKind::BeaInr, 1, setup.bs, setup.region, tiny_net(), 31);
  AdamState adam = AdamState::init(model.mlp, 1e-3);
  const double loss0 = sample_loss_gl(model, setup, r_o).loss;
  double loss = loss0;
  for (int step = 0; step < 50; ++step) {
    SampleLoss s = sample_loss_gl(model, setup, r_o);
    adam_step(model.mlp, s.grads, adam);
    loss = s.loss;
  }
  CHECK(loss < loss0);
}

TEST_CASE("single-position overfit approaches the SVD optimum") {
  TrainSetup setup = small_setup(1, 3, 10, 32, 128);
  TrainOptions opts;
  opts.kind = ModelKind::BeaInr;
  opts.num_samples = 1;
  opts.batch_size = 1;
  opts.epochs = 500;
  opts.lr = 3e-3;
  opts.seed = 17;
  opts.eval_positions = 0;
  opts.net = tiny_net(48, 2, 3);
  const TrainResult result = train(setup, opts);
  REQUIRE_FALSE(result.diverged);

  const DatasetSpec ds{opts.seed, 0, "train", 1, setup.region};
  const Point3 r_o = ds.position(0);
  const double se_model = eval_model_se(result.last_model, setup, r_o);
  const QuadratureGrid rx = setup.rx_gl_eval_local.translated(r_o);
  const DiscretizedChannel ch = discretize_channel(setup.tx_gl_eval, rx, setup.phys);
  const double se_opt =
      svd_waterfill(ch, setup.tx_gl_eval, setup.phys.power_budget,
                    setup.phys.noise_sigma2, 1)
          .alloc.se_bits;
  CHECK(se_model >= 0.99 * se_opt);
}

TEST_CASE("training is bitwise reproducible") {
  TrainSetup setup = small_setup(1);
  TrainOptions opts;
  opts.kind = ModelKind::CoefInr;
  opts.num_samples = 4;
  opts.batch_size = 2;
  opts.epochs = 2;
  opts.lr = 1e-3;
  opts.seed = 23;
  opts.eval_positions = 2;
  opts.deterministic = true;
  opts.net = tiny_net(8, 1, 1);
  const TrainResult a = train(setup, opts);
  const TrainResult b = train(setup, opts);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].mean_train_loss == b.log[i].mean_train_loss);
    CHECK(a.log[i].eval_se_bits == b.log[i].eval_se_bits);
  }
  for (std::size_t l = 0; l < a.last_model.mlp.weights.size(); ++l) {
    CHECK((a.last_model.mlp.weights[l] - b.last_model.mlp.weights[l])
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((a.last_model.mlp.biases[l] - b.last_model.mlp.biases[l])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  // threaded run matches the deterministic one (ordered reduction)
  TrainOptions threaded = opts;
  threaded.deterministic = false;
  threaded.threads = 2;
  const TrainResult c = train(setup, threaded);
  for (std::size_t l = 0; l < a.last_model.mlp.weights.size(); ++l)
    CHECK((a.last_model.mlp.weights[l] - c.last_model.mlp.weights[l])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("eval grids differ from training grids") {
  const TrainSetup setup = small_setup(1);
  CHECK(setup.m_ug_eval != setup.m_ug);
  CHECK(setup.m_bg_eval != setup.m_bg);
  CHECK(setup.tx_gl_eval.size() != setup.tx_gl.size());
  // Sobol training point sets are independent of the eval tag
  const DatasetSpec train_ds{5, 0, "train", 4, setup.region};
  const DatasetSpec eval_ds{5, 0, "eval", 4, setup.region};
  CHECK(train_ds.sobol_tx_seed(0) != eval_ds.sobol_tx_seed(0));
}

TEST_SUITE_END();
