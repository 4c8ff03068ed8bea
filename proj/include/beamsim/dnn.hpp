#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace beamsim {

/// Controller network topology: three time-distributed conv+tanh+maxpool
/// blocks over the sensor image, flattened and concatenated with the metric
/// value and the previous control outputs, feeding a stateful GRU and three
/// dense layers (tanh, tanh, linear).
struct DnnSpec {
  int image_nx = 64;
  int image_ny = 64;
  int window = 4;      // N_ws of the training replica; inference uses 1
  int n_controls = 2;  // K
  int aux_dim = 2;     // control-feedback input width (K, or 2K when split)
  std::array<int, 3> conv_channels = {4, 8, 8};
  int conv_kernel = 5;  // odd, 'same' zero padding
  int pool = 4;         // pool size == stride
  int gru_width = 20;
  int dense_width = 12;

  static DnnSpec make(int image_nx, int image_ny, int window, int n_controls,
                      int aux_dim, int gru_mult = 10, int dense_mult = 6);
  void validate() const;

  int conv_out(int n) const { return n / (pool * pool * pool); }
  int flat_features() const {
    return conv_channels[2] * conv_out(image_nx) * conv_out(image_ny);
  }
  int gru_input() const { return flat_features() + 1 + aux_dim; }
  int param_count() const;
  std::uint64_t hash() const;
};

/// One controller input frame.
struct Observation {
  std::vector<double> image;  // image_nx * image_ny, values in [0, 1]
  double metric = 0.0;        // J_t
  std::vector<double> aux;    // scaled control feedback, length aux_dim
};

struct TrainHyper {
  double gamma_s = 0.0;   // output-trajectory regularizer gain
  double gamma_l = 0.0;   // L2 weight-decay gain
  double momentum = 0.9;  // gradient smoothing factor nu
};

class Dnn {
 public:
  explicit Dnn(const DnnSpec& spec);

  const DnnSpec& spec() const { return spec_; }
  int param_count() const { return total_params_; }

  /// Scaled uniform init (+-sqrt(6/(fan_in+fan_out))), zero biases, seeded.
  std::vector<double> init_params(std::uint64_t seed) const;

  /// Runs the window through the network. `hidden` (gru_width) is advanced by
  /// window.size() steps in place; outputs is (window.size() x K) row-major.
  void forward(const std::vector<double>& params, std::vector<double>& hidden,
               const std::vector<const Observation*>& window,
               std::vector<double>& outputs) const;

  /// Exact reverse-mode gradient of sum_t sum_k weights[t*K+k] * U_t^k with
  /// respect to all parameters, backpropagated through the GRU recurrence.
  /// The initial hidden state is treated as constant. If `outputs` is given
  /// it receives the forward outputs of the same pass.
  std::vector<double> weighted_output_grad(const std::vector<double>& params,
                                           const std::vector<double>& hidden0,
                                           const std::vector<const Observation*>& window,
                                           const std::vector<double>& weights,
                                           std::vector<double>* outputs = nullptr) const;

 private:
  struct Cache;
  void forward_impl(const std::vector<double>& params, std::vector<double>& hidden,
                    const std::vector<const Observation*>& window,
                    std::vector<double>& outputs, Cache* cache) const;

  DnnSpec spec_;
  int total_params_ = 0;

 public:
  // flat parameter layout offsets (public: the reference oracle in the test
  // suite addresses individual weights)
  struct Layout {
    std::array<int, 3> conv_w{}, conv_b{};
    int wz = 0, uz = 0, bz = 0;
    int wr = 0, ur = 0, br = 0;
    int wn = 0, un = 0, bn = 0;
    int w1 = 0, b1 = 0, w2 = 0, b2 = 0, wo = 0, bo = 0;
  };
  const Layout& layout() const { return layout_; }

 private:
  Layout layout_;
};

/// Shared parameter store plus per-replica recurrent state and the momentum
/// accumulator.
struct DnnState {
  DnnSpec spec;
  std::vector<double> params;    // alpha
  std::vector<double> momentum;  // g
  std::vector<double> h_infer;   // inference replica hidden state

  DnnState(const DnnSpec& s, std::uint64_t seed);
  void reset_recurrent() { h_infer.assign(spec.gru_width, 0.0); }
};

/// One inference step (window length 1); advances h_infer.
std::vector<double> infer_step(const Dnn& net, DnnState& state, const Observation& obs);

/// Momentum update over one buffered window:
///   g <- nu g + d/dalpha[ sum_t sum_k (metric_w[t][k] U_t^k
///                         - gamma_s (U_t^k - U_{t-1}^k)^2) ] - 2 gamma_l alpha
///   alpha <- alpha + g
/// U_{t-1} inside the window refers to the previous step's output, treated as
/// constant; `u_prev_first` supplies it for the first step. Throws on a
/// non-finite gradient and leaves the state untouched.
void update_weights(const Dnn& net, DnnState& state,
                    const std::vector<const Observation*>& window,
                    const std::vector<double>& hidden0,
                    const std::vector<double>& metric_weights,
                    const std::vector<double>& u_prev_first, const TrainHyper& hyper);

void save_checkpoint(const std::string& path, const DnnState& state);
void load_checkpoint(const std::string& path, DnnState& state);

}  // namespace beamsim
