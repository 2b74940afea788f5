#pragma once

#include <cstdint>
#include <string>

#include "capa/training.hpp"

namespace capa {

// Flat INI-style run configuration. Unknown sections or keys are rejected;
// zeros on the counts marked "auto" resolve from the aperture-size ratios.
struct RunConfig {
  // [physics]
  double freq_hz = 3.0e8;
  double speed_of_light = 3.0e8;
  double impedance_eta = 376.99111843077517;  // 120 pi
  double noise_sigma2 = 5.6e-3;
  double power_budget = 1000.0;
  int num_streams = 0;  // 0 = min(M_B, M_U); explicit values must not exceed it

  // [apertures]
  double bs_len_x = 2.0;
  double bs_len_y = 2.0;
  double ue_len_x = 0.5;
  double ue_len_y = 0.5;
  double user_x_min = -5.0, user_x_max = 5.0;
  double user_y_min = -5.0, user_y_max = 5.0;
  double user_z_min = 20.0, user_z_max = 30.0;

  // [sampling]
  int m_ug = 6;
  int m_bg = 0;  // auto: (bs_len_x / ue_len_x) * m_ug
  int m_us = 144;
  int m_bs = 0;  // auto: (bs_len_x / ue_len_x)^2 * m_us
  std::uint64_t sobol_seed = 0;

  // [training]
  std::string model = "beainr";
  long num_samples = 2000;
  int batch_size = 64;
  int epochs = 50;
  double lr = 1e-4;
  double lambda_mix = 0.1;
  std::uint64_t root_seed = 1;
  int train_eval_positions = 64;  // key "eval_positions"
  bool deterministic = false;
  int threads = 0;

  // [network]
  int hidden_layers = 4;
  int hidden_width = 256;
  int fourier_k = 6;
  double fourier_base_scale = 1.0;
  std::string activation = "relu";

  // [eval]
  int m_ug_eval = 0;  // auto: 2 * m_ug
  int m_bg_eval = 0;  // auto: (bs_len_x / ue_len_x) * m_ug_eval
  int eval_positions = 200;  // key "positions"

  // [output]
  std::string out_dir = "out";
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Derived quantities of a config after auto-resolution.
struct ResolvedConfig {
  RunConfig cfg;        // with all auto fields filled in
  double wavelength = 0.0;
  int m_bs_dof = 0;     // (2 ceil(Lx/lambda)+1)(2 ceil(Ly/lambda)+1), BS side
  int m_ue_dof = 0;
  int n_streams = 0;    // resolved stream count
};

ResolvedConfig resolve_config(const RunConfig& cfg);

// Round-trippable echo: parsing + resolving the returned text reproduces it.
std::string resolved_config_text(const ResolvedConfig& rc);

PhysicalConfig physical_config(const ResolvedConfig& rc);
Aperture bs_aperture(const RunConfig& cfg);
Aperture ue_aperture_local(const RunConfig& cfg);
UserRegion user_region(const RunConfig& cfg);

TrainSetup make_train_setup(const ResolvedConfig& rc);
TrainOptions make_train_options(const ResolvedConfig& rc);

}  // namespace capa
