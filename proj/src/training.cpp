#include "capa/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "capa/channel.hpp"
#include "capa/error.hpp"
#include "capa/parallel.hpp"
#include "capa/rng.hpp"
#include "capa/sobol.hpp"

namespace capa {

namespace {

// Shared loss core: forward/backward through the SE pipeline for either model
// kind, given the tx/rx grids of one integral estimator.
SampleLoss loss_on_grids(const InrModel& model, const TrainSetup& setup,
                         const Point3& r_o, const QuadratureGrid& tx_grid,
                         const QuadratureGrid& rx_grid_local) {
  const QuadratureGrid rx_global = rx_grid_local.translated(r_o);
  const Eigen::MatrixXcd h =
      channel_matrix(rx_global.points, tx_grid.points, setup.phys);
  const SeContext ctx(h, tx_grid.weights, rx_global.weights,
                      setup.phys.noise_sigma2, setup.phys.power_budget);

  GradientTape tape;
  Eigen::MatrixXcd net_out;
  Eigen::MatrixXcd w_raw;
  if (model.kind == ModelKind::BeaInr) {
    net_out = inr_eval(model, tx_grid.points, r_o, &tape);
    w_raw = net_out;
  } else {
    net_out = inr_eval(model, rx_grid_local.points, r_o, &tape);
    w_raw = reconstruct_from_kernel(net_out, rx_global.weights, h);
  }

  SampleLoss out;
  const SeForward f = ctx.forward(w_raw);
  if (f.degenerate) {
    out.loss = kDegeneratePenalty;
    out.degenerate = true;
    out.grads = MlpGrads::zeros_like(model.mlp);
    return out;
  }
  out.se_bits = f.se_bits;
  out.loss = -f.se_bits;

  Eigen::MatrixXcd adj_w = -ctx.se_grad_raw(f, w_raw);
  Eigen::MatrixXcd adj_net;
  if (model.kind == ModelKind::BeaInr) {
    adj_net = std::move(adj_w);
  } else {
    // w = h^H diag(q) c  =>  adj_c = diag(q) h adj_w
    adj_net = rx_global.weights.asDiagonal() * (h * adj_w);
  }
  out.grads = mlp_backward(model.mlp, tape, complex_adjoint_to_reals(adj_net));
  return out;
}

}  // namespace

void TrainSetup::finalize() {
  phys.validate();
  bs.validate();
  ue_local.validate();
  region.validate();
  tx_gl = gl_grid(bs, m_bg);
  rx_gl_local = gl_grid(ue_local, m_ug);
  tx_gl_eval = gl_grid(bs, m_bg_eval);
  rx_gl_eval_local = gl_grid(ue_local, m_ug_eval);
}

SampleLoss sample_loss_gl(const InrModel& model, const TrainSetup& setup,
                          const Point3& r_o) {
  return loss_on_grids(model, setup, r_o, setup.tx_gl, setup.rx_gl_local);
}

SampleLoss sample_loss_sobol(const InrModel& model, const TrainSetup& setup,
                             const Point3& r_o, std::uint64_t tx_seed,
                             std::uint64_t rx_seed) {
  const QuadratureGrid tx = sobol_grid(setup.bs, setup.m_bs, tx_seed);
  const QuadratureGrid rx_local = sobol_grid(setup.ue_local, setup.m_us, rx_seed);
  return loss_on_grids(model, setup, r_o, tx, rx_local);
}

SampleLoss total_loss(const std::vector<SampleLoss>& gl,
                      const std::vector<SampleLoss>& sobol, double lambda_mix,
                      const MlpParams& like) {
  if (gl.empty() || gl.size() != sobol.size())
    throw ConfigError("total_loss expects paired GL/Sobol batches");
  SampleLoss out;
  out.grads = MlpGrads::zeros_like(like);
  const double inv = 1.0 / static_cast<double>(gl.size());
  for (const auto& s : gl) {
    out.loss += inv * s.loss;
    out.grads.accumulate(s.grads, inv);
    out.degenerate = out.degenerate || s.degenerate;
  }
  for (const auto& s : sobol) {
    out.loss += lambda_mix * inv * s.loss;
    out.grads.accumulate(s.grads, lambda_mix * inv);
    out.degenerate = out.degenerate || s.degenerate;
  }
  return out;
}

double eval_model_se(const InrModel& model, const TrainSetup& setup, const Point3& r_o,
                     double* power_residual) {
  const QuadratureGrid& tx = setup.tx_gl_eval;
  const QuadratureGrid rx_global = setup.rx_gl_eval_local.translated(r_o);
  const Eigen::MatrixXcd h = channel_matrix(rx_global.points, tx.points, setup.phys);
  const SeContext ctx(h, tx.weights, rx_global.weights, setup.phys.noise_sigma2,
                      setup.phys.power_budget);
  Eigen::MatrixXcd w_raw;
  if (model.kind == ModelKind::BeaInr) {
    w_raw = inr_eval(model, tx.points, r_o);
  } else {
    const Eigen::MatrixXcd c = inr_eval(model, setup.rx_gl_eval_local.points, r_o);
    w_raw = reconstruct_from_kernel(c, rx_global.weights, h);
  }
  const SeForward f = ctx.forward(w_raw);
  if (f.degenerate) {
    if (power_residual) *power_residual = 1.0;
    return 0.0;
  }
  if (power_residual) {
    const double p = ctx.raw_power(f.w_norm);
    *power_residual = std::abs(p - setup.phys.power_budget) / setup.phys.power_budget;
  }
  return f.se_bits;
}

TrainResult train(const TrainSetup& setup, const TrainOptions& opts,
                  const std::function<void(const InrModel&, int, double)>& on_improve) {
  if (opts.num_samples < 1) throw ConfigError("training needs at least one sample");
  if (opts.batch_size < 1) throw ConfigError("batch size must be >= 1");

  const Aperture& surface = opts.kind == ModelKind::BeaInr ? setup.bs : setup.ue_local;
  InrModel model = make_inr_model(opts.kind, setup.phys.num_streams, surface,
                                  setup.region, opts.net,
                                  derive_seed(opts.seed, "init"));
  AdamState adam = AdamState::init(model.mlp, opts.lr);

  DatasetSpec train_set{opts.seed, opts.sobol_seed, "train", opts.num_samples,
                        setup.region};
  DatasetSpec eval_set{opts.seed, opts.sobol_seed, "eval", opts.eval_positions,
                       setup.region};

  const int threads = opts.deterministic ? 1 : opts.threads;

  const auto eval_mean_se = [&](const InrModel& m) {
    std::vector<double> se(eval_set.count, 0.0);
    parallel_for(eval_set.count, threads,
                 [&](long k) { se[k] = eval_model_se(m, setup, eval_set.position(k)); });
    // ordered reduction keeps the result independent of scheduling
    return std::accumulate(se.begin(), se.end(), 0.0) /
           static_cast<double>(eval_set.count);
  };

  TrainResult result;
  result.model = model;
  result.best_eval_se = opts.eval_positions > 0 ? eval_mean_se(model) : 0.0;
  result.best_epoch = 0;

  std::vector<long> order(opts.num_samples);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    {
      Rng shuffle_rng(derive_seed(opts.seed, "shuffle", epoch));
      for (long i = opts.num_samples - 1; i > 0; --i) {
        const long j = static_cast<long>(shuffle_rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
      }
    }
    double epoch_loss = 0.0;
    long batches = 0;
    bool diverged = false;
    for (long start = 0; start < opts.num_samples && !diverged;
         start += opts.batch_size) {
      const long bsz = std::min<long>(opts.batch_size, opts.num_samples - start);
      std::vector<SampleLoss> gl(bsz), sobol(bsz);
      parallel_for(bsz, threads, [&](long i) {
        const long k = order[start + i];
        const Point3 r_o = train_set.position(k);
        gl[i] = sample_loss_gl(model, setup, r_o);
        sobol[i] = sample_loss_sobol(model, setup, r_o, train_set.sobol_tx_seed(k),
                                     train_set.sobol_rx_seed(k));
        if (gl[i].degenerate || sobol[i].degenerate) result.degenerate_samples++;
      });
      SampleLoss batch = total_loss(gl, sobol, setup.lambda_mix, model.mlp);
      if (!std::isfinite(batch.loss) || !std::isfinite(batch.grads.squared_norm())) {
        diverged = true;
        break;
      }
      adam_step(model.mlp, batch.grads, adam);
      epoch_loss += batch.loss;
      ++batches;
    }
    if (diverged) {
      result.diverged = true;
      break;
    }

    EpochLog log;
    log.epoch = epoch;
    log.mean_train_loss = batches > 0 ? epoch_loss / batches : 0.0;
    log.eval_se_bits = opts.eval_positions > 0 ? eval_mean_se(model) : 0.0;
    log.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(log);

    if (opts.eval_positions == 0 || log.eval_se_bits > result.best_eval_se) {
      result.best_eval_se = log.eval_se_bits;
      result.best_epoch = epoch;
      result.model = model;
      if (on_improve) on_improve(model, epoch, log.eval_se_bits);
    }
  }
  result.last_model = model;
  return result;
}

}  // namespace capa
