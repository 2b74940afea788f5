#pragma once

#include <functional>
#include <vector>

#include "capa/datasets.hpp"
#include "capa/models.hpp"
#include "capa/objective.hpp"

namespace capa {

// Geometry, physics and quadrature resolution shared by losses, training and
// evaluation. finalize() builds the shared GL grids.
struct TrainSetup {
  PhysicalConfig phys;  // num_streams is the resolved N
  Aperture bs;          // centered at the origin
  Aperture ue_local;    // user aperture in its local frame (center 0)
  UserRegion region;

  int m_ug = 6;     // rx GL order (training)
  int m_bg = 24;    // tx GL order (training)
  int m_us = 144;   // rx Sobol count
  int m_bs = 2304;  // tx Sobol count
  int m_ug_eval = 12;
  int m_bg_eval = 48;

  double lambda_mix = 0.1;

  QuadratureGrid tx_gl;            // order m_bg over S_B
  QuadratureGrid rx_gl_local;      // order m_ug over S_U (local frame)
  QuadratureGrid tx_gl_eval;       // order m_bg_eval
  QuadratureGrid rx_gl_eval_local; // order m_ug_eval

  void finalize();
};

struct SampleLoss {
  double loss = 0.0;     // -SE, or the degeneracy penalty
  double se_bits = 0.0;  // 0 when degenerate
  bool degenerate = false;
  MlpGrads grads;
};

// Training must survive a network that collapses to (numerically) zero power;
// normalize_power is undefined there, so the loss becomes a flat penalty.
inline constexpr double kDegeneratePenalty = 1e3;

// GL-quadrature loss of one sample: -SE of the power-normalized beamformer on
// the shared GL grids, with the reverse pass down to the network parameters.
SampleLoss sample_loss_gl(const InrModel& model, const TrainSetup& setup, const Point3& r_o);

// Sobol counterpart: the tx / rx integrals use per-sample Owen-scrambled
// point sets (uniform weights scaled by aperture area).
SampleLoss sample_loss_sobol(const InrModel& model, const TrainSetup& setup,
                             const Point3& r_o, std::uint64_t tx_seed,
                             std::uint64_t rx_seed);

// L = mean(GL) + lambda * mean(Sobol), gradients combined the same way.
// Inputs are the per-sample results for one batch (GL and Sobol paired on the
// same positions).
SampleLoss total_loss(const std::vector<SampleLoss>& gl,
                      const std::vector<SampleLoss>& sobol, double lambda_mix,
                      const MlpParams& like);

// SE of a trained model at one position on the high-resolution eval grids.
double eval_model_se(const InrModel& model, const TrainSetup& setup, const Point3& r_o,
                     double* power_residual = nullptr);

struct TrainOptions {
  ModelKind kind = ModelKind::BeaInr;
  long num_samples = 2000;
  int batch_size = 64;
  int epochs = 50;
  double lr = 1e-4;
  std::uint64_t seed = 1;
  std::uint64_t sobol_seed = 0;
  int eval_positions = 64;  // held-out positions scored every epoch
  int threads = 0;          // 0 -> hardware/CAPA_THREADS
  bool deterministic = false;
  NetworkHyperparams net;
};

struct EpochLog {
  int epoch = 0;
  double mean_train_loss = 0.0;
  double eval_se_bits = 0.0;
  double wall_s = 0.0;
};

struct TrainResult {
  InrModel model;           // checkpointed (best held-out SE) parameters
  InrModel last_model;      // parameters after the final step
  std::vector<EpochLog> log;
  double best_eval_se = 0.0;
  int best_epoch = 0;       // 0 = initial weights
  bool diverged = false;
  long degenerate_samples = 0;
};

// on_improve fires whenever the held-out SE reaches a new best (used by the
// CLI to write checkpoints as training progresses).
TrainResult train(const TrainSetup& setup, const TrainOptions& opts,
                  const std::function<void(const InrModel&, int, double)>& on_improve = {});

}  // namespace capa
