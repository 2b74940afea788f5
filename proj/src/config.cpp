#include "capa/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capa/error.hpp"

namespace capa {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for " + key + ": '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for " + key + ": '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_long(key, v));
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid seed value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean value for " + key + ": '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "physics" && section != "apertures" && section != "sampling" &&
          section != "training" && section != "network" && section != "eval" &&
          section != "output")
        throw ConfigError("unknown config section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "physics.freq_hz") cfg.freq_hz = parse_double(qual, value);
    else if (qual == "physics.speed_of_light") cfg.speed_of_light = parse_double(qual, value);
    else if (qual == "physics.impedance_eta") cfg.impedance_eta = parse_double(qual, value);
    else if (qual == "physics.noise_sigma2") cfg.noise_sigma2 = parse_double(qual, value);
    else if (qual == "physics.power_budget") cfg.power_budget = parse_double(qual, value);
    else if (qual == "physics.num_streams") cfg.num_streams = parse_int(qual, value);
    else if (qual == "apertures.bs_len_x") cfg.bs_len_x = parse_double(qual, value);
    else if (qual == "apertures.bs_len_y") cfg.bs_len_y = parse_double(qual, value);
    else if (qual == "apertures.ue_len_x") cfg.ue_len_x = parse_double(qual, value);
    else if (qual == "apertures.ue_len_y") cfg.ue_len_y = parse_double(qual, value);
    else if (qual == "apertures.user_x_min") cfg.user_x_min = parse_double(qual, value);
    else if (qual == "apertures.user_x_max") cfg.user_x_max = parse_double(qual, value);
    else if (qual == "apertures.user_y_min") cfg.user_y_min = parse_double(qual, value);
    else if (qual == "apertures.user_y_max") cfg.user_y_max = parse_double(qual, value);
    else if (qual == "apertures.user_z_min") cfg.user_z_min = parse_double(qual, value);
    else if (qual == "apertures.user_z_max") cfg.user_z_max = parse_double(qual, value);
    else if (qual == "sampling.m_ug") cfg.m_ug = parse_int(qual, value);
    else if (qual == "sampling.m_bg") cfg.m_bg = parse_int(qual, value);
    else if (qual == "sampling.m_us") cfg.m_us = parse_int(qual, value);
    else if (qual == "sampling.m_bs") cfg.m_bs = parse_int(qual, value);
    else if (qual == "sampling.sobol_seed") cfg.sobol_seed = parse_u64(qual, value);
    else if (qual == "training.model") cfg.model = value;
    else if (qual == "training.num_samples") cfg.num_samples = parse_long(qual, value);
    else if (qual == "training.batch_size") cfg.batch_size = parse_int(qual, value);
    else if (qual == "training.epochs") cfg.epochs = parse_int(qual, value);
    else if (qual == "training.lr") cfg.lr = parse_double(qual, value);
    else if (qual == "training.lambda_mix") cfg.lambda_mix = parse_double(qual, value);
    else if (qual == "training.root_seed") cfg.root_seed = parse_u64(qual, value);
    else if (qual == "training.eval_positions") cfg.train_eval_positions = parse_int(qual, value);
    else if (qual == "training.deterministic") cfg.deterministic = parse_bool(qual, value);
    else if (qual == "training.threads") cfg.threads = parse_int(qual, value);
    else if (qual == "network.hidden_layers") cfg.hidden_layers = parse_int(qual, value);
    else if (qual == "network.hidden_width") cfg.hidden_width = parse_int(qual, value);
    else if (qual == "network.fourier_k") cfg.fourier_k = parse_int(qual, value);
    else if (qual == "network.fourier_base_scale") cfg.fourier_base_scale = parse_double(qual, value);
    else if (qual == "network.activation") cfg.activation = value;
    else if (qual == "eval.m_ug_eval") cfg.m_ug_eval = parse_int(qual, value);
    else if (qual == "eval.m_bg_eval") cfg.m_bg_eval = parse_int(qual, value);
    else if (qual == "eval.positions") cfg.eval_positions = parse_int(qual, value);
    else if (qual == "output.dir") cfg.out_dir = value;
    else throw ConfigError("unknown config key '" + key + "' in section [" + section + "]");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

Aperture bs_aperture(const RunConfig& cfg) {
  return Aperture{Point3{0.0, 0.0, 0.0}, cfg.bs_len_x, cfg.bs_len_y};
}

Aperture ue_aperture_local(const RunConfig& cfg) {
  return Aperture{Point3{0.0, 0.0, 0.0}, cfg.ue_len_x, cfg.ue_len_y};
}

UserRegion user_region(const RunConfig& cfg) {
  UserRegion r;
  r.x_range = {cfg.user_x_min, cfg.user_x_max};
  r.y_range = {cfg.user_y_min, cfg.user_y_max};
  r.z_range = {cfg.user_z_min, cfg.user_z_max};
  return r;
}

ResolvedConfig resolve_config(const RunConfig& in) {
  ResolvedConfig rc;
  rc.cfg = in;
  RunConfig& cfg = rc.cfg;

  if (!(cfg.freq_hz > 0.0) || !(cfg.speed_of_light > 0.0))
    throw ConfigError("frequency and speed of light must be positive");
  rc.wavelength = cfg.speed_of_light / cfg.freq_hz;

  const Aperture bs = bs_aperture(cfg);
  const Aperture ue = ue_aperture_local(cfg);
  bs.validate();
  ue.validate();
  user_region(cfg).validate();

  const StreamCount sc = stream_count(bs, ue, rc.wavelength);
  rc.m_bs_dof = sc.m_bs;
  rc.m_ue_dof = sc.m_ue;
  if (cfg.num_streams == 0) {
    rc.n_streams = sc.n;
  } else {
    if (cfg.num_streams > sc.n)
      throw ConfigError("num_streams exceeds min(M_B, M_U) = " + std::to_string(sc.n));
    rc.n_streams = cfg.num_streams;
  }
  cfg.num_streams = rc.n_streams;

  const double ratio = cfg.bs_len_x / cfg.ue_len_x;
  if (cfg.m_ug < 1 || cfg.m_us < 1) throw ConfigError("m_ug and m_us must be >= 1");
  if (cfg.m_bg == 0) cfg.m_bg = std::max(1, static_cast<int>(std::lround(ratio * cfg.m_ug)));
  if (cfg.m_bs == 0)
    cfg.m_bs = std::max(1, static_cast<int>(std::lround(ratio * ratio * cfg.m_us)));
  if (cfg.m_ug_eval == 0) cfg.m_ug_eval = 2 * cfg.m_ug;
  if (cfg.m_bg_eval == 0)
    cfg.m_bg_eval = std::max(1, static_cast<int>(std::lround(ratio * cfg.m_ug_eval)));

  if (cfg.model != "beainr" && cfg.model != "coefinr")
    throw ConfigError("training.model must be beainr or coefinr");
  activation_from_name(cfg.activation);  // validates
  if (cfg.batch_size < 1 || cfg.epochs < 0 || cfg.num_samples < 0)
    throw ConfigError("training sizes must be nonnegative");
  if (cfg.lambda_mix < 0.0) throw ConfigError("lambda_mix must be >= 0");
  return rc;
}

std::string resolved_config_text(const ResolvedConfig& rc) {
  const RunConfig& c = rc.cfg;
  std::ostringstream os;
  os << "# resolved configuration (derived: wavelength_m = " << fmt(rc.wavelength)
     << ", m_bs_dof = " << rc.m_bs_dof << ", m_ue_dof = " << rc.m_ue_dof << ")\n";
  os << "[physics]\n";
  os << "freq_hz = " << fmt(c.freq_hz) << "\n";
  os << "speed_of_light = " << fmt(c.speed_of_light) << "\n";
  os << "impedance_eta = " << fmt(c.impedance_eta) << "\n";
  os << "noise_sigma2 = " << fmt(c.noise_sigma2) << "\n";
  os << "power_budget = " << fmt(c.power_budget) << "\n";
  os << "num_streams = " << rc.n_streams << "\n";
  os << "[apertures]\n";
  os << "bs_len_x = " << fmt(c.bs_len_x) << "\n";
  os << "bs_len_y = " << fmt(c.bs_len_y) << "\n";
  os << "ue_len_x = " << fmt(c.ue_len_x) << "\n";
  os << "ue_len_y = " << fmt(c.ue_len_y) << "\n";
  os << "user_x_min = " << fmt(c.user_x_min) << "\n";
  os << "user_x_max = " << fmt(c.user_x_max) << "\n";
  os << "user_y_min = " << fmt(c.user_y_min) << "\n";
  os << "user_y_max = " << fmt(c.user_y_max) << "\n";
  os << "user_z_min = " << fmt(c.user_z_min) << "\n";
  os << "user_z_max = " << fmt(c.user_z_max) << "\n";
  os << "[sampling]\n";
  os << "m_ug = " << c.m_ug << "\n";
  os << "m_bg = " << c.m_bg << "\n";
  os << "m_us = " << c.m_us << "\n";
  os << "m_bs = " << c.m_bs << "\n";
  os << "sobol_seed = " << c.sobol_seed << "\n";
  os << "[training]\n";
  os << "model = " << c.model << "\n";
  os << "num_samples = " << c.num_samples << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  os << "epochs = " << c.epochs << "\n";
  os << "lr = " << fmt(c.lr) << "\n";
  os << "lambda_mix = " << fmt(c.lambda_mix) << "\n";
  os << "root_seed = " << c.root_seed << "\n";
  os << "eval_positions = " << c.train_eval_positions << "\n";
  os << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
  os << "threads = " << c.threads << "\n";
  os << "[network]\n";
  os << "hidden_layers = " << c.hidden_layers << "\n";
  os << "hidden_width = " << c.hidden_width << "\n";
  os << "fourier_k = " << c.fourier_k << "\n";
  os << "fourier_base_scale = " << fmt(c.fourier_base_scale) << "\n";
  os << "activation = " << c.activation << "\n";
  os << "[eval]\n";
  os << "m_ug_eval = " << c.m_ug_eval << "\n";
  os << "m_bg_eval = " << c.m_bg_eval << "\n";
  os << "positions = " << c.eval_positions << "\n";
  os << "[output]\n";
  os << "dir = " << c.out_dir << "\n";
  return os.str();
}

PhysicalConfig physical_config(const ResolvedConfig& rc) {
  PhysicalConfig p;
  p.freq_hz = rc.cfg.freq_hz;
  p.speed_of_light = rc.cfg.speed_of_light;
  p.impedance_eta = rc.cfg.impedance_eta;
  p.noise_sigma2 = rc.cfg.noise_sigma2;
  p.power_budget = rc.cfg.power_budget;
  p.num_streams = rc.n_streams;
  p.validate();
  return p;
}

TrainSetup make_train_setup(const ResolvedConfig& rc) {
  TrainSetup s;
  s.phys = physical_config(rc);
  s.bs = bs_aperture(rc.cfg);
  s.ue_local = ue_aperture_local(rc.cfg);
  s.region = user_region(rc.cfg);
  s.m_ug = rc.cfg.m_ug;
  s.m_bg = rc.cfg.m_bg;
  s.m_us = rc.cfg.m_us;
  s.m_bs = rc.cfg.m_bs;
  s.m_ug_eval = rc.cfg.m_ug_eval;
  s.m_bg_eval = rc.cfg.m_bg_eval;
  s.lambda_mix = rc.cfg.lambda_mix;
  s.finalize();
  return s;
}

TrainOptions make_train_options(const ResolvedConfig& rc) {
  TrainOptions o;
  o.kind = rc.cfg.model == "beainr" ? ModelKind::BeaInr : ModelKind::CoefInr;
  o.num_samples = rc.cfg.num_samples;
  o.batch_size = rc.cfg.batch_size;
  o.epochs = rc.cfg.epochs;
  o.lr = rc.cfg.lr;
  o.seed = rc.cfg.root_seed;
  o.sobol_seed = rc.cfg.sobol_seed;
  o.eval_positions = rc.cfg.train_eval_positions;
  o.threads = rc.cfg.threads;
  o.deterministic = rc.cfg.deterministic;
  o.net.hidden_layers = rc.cfg.hidden_layers;
  o.net.hidden_width = rc.cfg.hidden_width;
  o.net.fourier_k = rc.cfg.fourier_k;
  o.net.fourier_base_scale = rc.cfg.fourier_base_scale;
  o.net.activation = activation_from_name(rc.cfg.activation);
  return o;
}

}  // namespace capa
