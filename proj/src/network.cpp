#include "capa/network.hpp"

#include <cmath>

#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void FourierFeatureMap::validate() const {
  if (input_dim < 1) throw ConfigError("encoding input_dim must be >= 1");
  if (num_frequencies < 0) throw ConfigError("encoding frequency count must be >= 0");
  if (lo.size() != input_dim || hi.size() != input_dim)
    throw ConfigError("encoding extents must match input_dim");
  for (int i = 0; i < input_dim; ++i)
    if (!(hi[i] > lo[i])) throw ConfigError("encoding extents must be nonempty");
}

Eigen::MatrixXd FourierFeatureMap::encode(const Eigen::MatrixXd& coords,
                                          bool* out_of_range) const {
  validate();
  if (coords.cols() != input_dim)
    throw ConfigError("coordinate tuple width does not match encoding input_dim");
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd out(n, output_dim());
  bool oor = false;
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index c = 0;
    for (int i = 0; i < input_dim; ++i) {
      const double x = 2.0 * (coords(r, i) - lo[i]) / (hi[i] - lo[i]) - 1.0;
      if (x < -1.1 || x > 1.1) oor = true;
      out(r, c++) = x;
      double freq = base_scale * kPi;
      for (int k = 0; k < num_frequencies; ++k) {
        out(r, c++) = std::sin(freq * x);
        out(r, c++) = std::cos(freq * x);
        freq *= 2.0;
      }
    }
  }
  if (out_of_range && oor) *out_of_range = true;
  return out;
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  return a == Activation::ReLU ? "relu" : "tanh";
}

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l)
    n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
  return n;
}

void MlpParams::validate() const {
  if (widths.size() < 2) throw ConfigError("MLP needs at least input and output widths");
  if (weights.size() + 1 != widths.size() || biases.size() != weights.size())
    throw ConfigError("MLP parameter count does not match widths");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] ||
        biases[l].size() != widths[l + 1])
      throw ConfigError("MLP layer shapes are inconsistent");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw NumericalError("MLP parameters contain non-finite values");
  }
}

MlpParams MlpParams::init(const std::vector<int>& widths, std::uint64_t seed,
                          Activation act) {
  if (widths.size() < 2) throw ConfigError("MLP needs at least input and output widths");
  MlpParams p;
  p.widths = widths;
  p.activation = act;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double std_dev = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = std_dev * rng.gaussian();
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  MlpGrads g;
  for (int l = 0; l < p.num_layers(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(p.biases[l].size()));
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other, double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].noalias() += factor * other.weights[l];
    biases[l].noalias() += factor * other.biases[l];
  }
}

void MlpGrads::scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= factor;
    biases[l] *= factor;
  }
}

double MlpGrads::squared_norm() const {
  double n = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].squaredNorm() + biases[l].squaredNorm();
  return n;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            GradientTape* tape) {
  if (x.cols() != params.input_dim())
    throw ConfigError("MLP input width mismatch");
  if (tape) {
    tape->layer_inputs.clear();
    tape->preacts.clear();
  }
  Eigen::MatrixXd act = x;
  const int n_layers = params.num_layers();
  for (int l = 0; l < n_layers; ++l) {
    if (tape) tape->layer_inputs.push_back(act);
    Eigen::MatrixXd z = act * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    if (!z.allFinite())
      throw NumericalError("non-finite activation in MLP layer " + std::to_string(l));
    if (l + 1 < n_layers) {
      if (tape) tape->preacts.push_back(z);
      if (params.activation == Activation::ReLU)
        act = z.cwiseMax(0.0);
      else
        act = z.array().tanh().matrix();
    } else {
      act = std::move(z);  // linear output layer
    }
  }
  return act;
}

MlpGrads mlp_backward(const MlpParams& params, const GradientTape& tape,
                      const Eigen::MatrixXd& upstream) {
  const int n_layers = params.num_layers();
  if (static_cast<int>(tape.layer_inputs.size()) != n_layers ||
      static_cast<int>(tape.preacts.size()) != n_layers - 1)
    throw ConfigError("gradient tape does not match the parameter stack");
  MlpGrads g;
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);
  Eigen::MatrixXd delta = upstream;  // dL/dz of the current layer
  for (int l = n_layers - 1; l >= 0; --l) {
    g.weights[l].noalias() = delta.transpose() * tape.layer_inputs[l];
    g.biases[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd d_act = delta * params.weights[l];
    if (params.activation == Activation::ReLU) {
      delta = (tape.preacts[l - 1].array() > 0.0).cast<double>() * d_act.array();
    } else {
      const auto t = tape.preacts[l - 1].array().tanh();
      delta = (1.0 - t.square()) * d_act.array();
    }
  }
  return g;
}

Eigen::MatrixXcd reals_to_complex(const Eigen::MatrixXd& y) {
  if (y.cols() % 2 != 0) throw ConfigError("real output width must be even");
  const Eigen::Index n_streams = y.cols() / 2;
  Eigen::MatrixXcd out(y.rows(), n_streams);
  for (Eigen::Index k = 0; k < n_streams; ++k)
    out.col(k) = y.col(2 * k) + std::complex<double>(0.0, 1.0) * y.col(2 * k + 1);
  return out;
}

Eigen::MatrixXd complex_adjoint_to_reals(const Eigen::MatrixXcd& adj) {
  Eigen::MatrixXd out(adj.rows(), 2 * adj.cols());
  for (Eigen::Index k = 0; k < adj.cols(); ++k) {
    out.col(2 * k) = adj.col(k).real();
    out.col(2 * k + 1) = adj.col(k).imag();
  }
  return out;
}

AdamState AdamState::init(const MlpParams& p, double lr) {
  AdamState s;
  s.lr = lr;
  for (int l = 0; l < p.num_layers(); ++l) {
    s.m_w.emplace_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
    s.v_w.emplace_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
    s.m_b.emplace_back(Eigen::VectorXd::Zero(p.biases[l].size()));
    s.v_b.emplace_back(Eigen::VectorXd::Zero(p.biases[l].size()));
  }
  return s;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (state.m_w.size() != params.weights.size())
    throw ConfigError("Adam state does not match parameters");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double rate = state.lr / bc1;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    state.m_w[l] = state.beta1 * state.m_w[l] + (1.0 - state.beta1) * grads.weights[l];
    state.v_w[l] = state.beta2 * state.v_w[l] +
                   (1.0 - state.beta2) * grads.weights[l].array().square().matrix();
    params.weights[l].array() -=
        rate * state.m_w[l].array() /
        ((state.v_w[l].array() / bc2).sqrt() + state.eps);
    state.m_b[l] = state.beta1 * state.m_b[l] + (1.0 - state.beta1) * grads.biases[l];
    state.v_b[l] = state.beta2 * state.v_b[l] +
                   (1.0 - state.beta2) * grads.biases[l].array().square().matrix();
    params.biases[l].array() -=
        rate * state.m_b[l].array() /
        ((state.v_b[l].array() / bc2).sqrt() + state.eps);
  }
}

}  // namespace capa
