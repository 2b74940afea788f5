#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace capa {

// Coordinate encoding: per input coordinate x (normalized to [-1,1] from its
// extent), emit [x, sin(2^k pi b x), cos(2^k pi b x)] for k = 0..K-1.
struct FourierFeatureMap {
  int input_dim = 0;
  int num_frequencies = 0;  // K; 0 -> identity on normalized coordinates
  double base_scale = 1.0;  // b
  Eigen::VectorXd lo;       // normalization extents, one per raw coordinate
  Eigen::VectorXd hi;

  int output_dim() const { return input_dim * (2 * num_frequencies) + input_dim; }
  void validate() const;

  // Rows of `coords` are raw coordinate tuples. If any normalized coordinate
  // leaves [-1.1, 1.1], *out_of_range is set (evaluation still proceeds; this
  // is the generalization-probe path, not an error).
  Eigen::MatrixXd encode(const Eigen::MatrixXd& coords, bool* out_of_range = nullptr) const;
};

enum class Activation { ReLU, Tanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

struct MlpParams {
  std::vector<int> widths;  // [in, hidden..., out]
  std::vector<Eigen::MatrixXd> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::ReLU;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  std::size_t num_params() const;
  void validate() const;

  static MlpParams init(const std::vector<int>& widths, std::uint64_t seed,
                        Activation act = Activation::ReLU);
};

// Gradients (and Adam moments) share the parameter layout.
struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const MlpParams& p);
  void accumulate(const MlpGrads& other, double factor = 1.0);
  void scale(double factor);
  double squared_norm() const;
};

// Primal values recorded by a forward pass; enough to run the exact reverse
// pass for any upstream gradient on the outputs.
struct GradientTape {
  std::vector<Eigen::MatrixXd> layer_inputs;  // input to each layer, n x widths[l]
  std::vector<Eigen::MatrixXd> preacts;       // pre-activation of hidden layers
};

// Batched forward: x is n x input_dim, returns n x output_dim. Pass a tape to
// record intermediates. Throws NumericalError (with the layer index) if a
// non-finite activation appears.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            GradientTape* tape = nullptr);

// Reverse pass: upstream = dL/d(outputs), n x output_dim.
MlpGrads mlp_backward(const MlpParams& params, const GradientTape& tape,
                      const Eigen::MatrixXd& upstream);

// Interleaved (re, im) pairs -> complex columns. y: n x 2N -> n x N.
Eigen::MatrixXcd reals_to_complex(const Eigen::MatrixXd& y);
// Complex adjoint (dL = Re tr(adj^H dW)) -> real upstream on the 2N outputs.
Eigen::MatrixXd complex_adjoint_to_reals(const Eigen::MatrixXcd& adj);

struct AdamState {
  long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;

  static AdamState init(const MlpParams& p, double lr);
};

// Standard bias-corrected Adam update, in place.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

}  // namespace capa
