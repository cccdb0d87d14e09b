#ifndef OTF_LSTM_NET_HPP
#define OTF_LSTM_NET_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "otf/core_math.hpp"

namespace otf {

struct LstmDims {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;

  bool operator==(const LstmDims&) const = default;
};

/// Weights of one LSTM gate: input projection (H x D), recurrent projection
/// (H x H) and bias (H).
struct GateParams {
  Mat wx;
  Mat wh;
  Vec b;
};

/// All learnable parameters: four gates (input, forget, cell, output in that
/// fixed order), the scalar intensity head and the class head. The same
/// struct doubles as the gradient container (ParamGrads), block for block.
///
/// Canonical flat block order (used by flatten(), checkpoints and the
/// gradient checker): per gate wx, wh, b; then intensity head weight + bias;
/// then class head weight + bias.
struct LstmParameters {
  LstmDims dims;
  std::array<GateParams, 4> gates;
  Vec w_intensity;       // H
  Vec b_intensity;       // 1
  Mat w_class;           // Nc x H
  Vec b_class;           // Nc

  std::size_t parameter_count() const;
  Vec flatten() const;
};

using ParamGrads = LstmParameters;

bool operator==(const LstmParameters& a, const LstmParameters& b);

enum class Gate { Input = 0, Forget = 1, Cell = 2, Output = 3 };

/// Zero-valued parameter container of the given shape.
LstmParameters zero_params(const LstmDims& dims);

/// Deterministic initialization: every weight entry uniform in
/// [-1/sqrt(H), 1/sqrt(H)] drawn in canonical block order, forget-gate bias
/// 1.0, all other biases 0.
LstmParameters init_params(const LstmDims& dims, std::uint64_t seed);

LstmParameters unflatten(const LstmDims& dims, const Vec& flat);

// In-place block arithmetic; shapes must match.
void add_scaled(LstmParameters& dst, const LstmParameters& src, double scale);
void scale_params(LstmParameters& p, double scale);
double global_norm(const LstmParameters& p);
/// Scales so the global norm does not exceed max_norm. Returns the factor.
double clip_global_norm(LstmParameters& p, double max_norm);
bool params_finite(const LstmParameters& p);

/// Everything the backward pass needs about one frame of the forward pass.
struct FrameState {
  Vec gate_i, gate_f, gate_g, gate_o;  // post-activation gate values (H)
  Vec cell;                            // c_t (H)
  Vec cell_tanh;                       // tanh(c_t) (H)
  Vec hidden;                          // h_t (H)
  Vec logits;                          // class head output (Nc)
  double intensity_preact = 0.0;       // u_t
  double intensity = 0.0;              // sigmoid(u_t), in (0,1)
};

struct ForwardTrace {
  std::vector<Vec> inputs;        // copy of the consumed frames
  std::vector<FrameState> frames;
  Vec probs;                      // softmax of last-frame logits
};

/// Recurrent carry for streaming use; starts at zero.
struct LstmState {
  Vec h;
  Vec c;
};

LstmState initial_state(const LstmDims& dims);

/// One recurrence step. Updates `state` in place and returns the full frame
/// record (heads included).
FrameState step(const LstmParameters& params, LstmState& state, const Vec& x);

/// Full pass over a sequence of frames. Causal: frame t of the trace depends
/// only on frames 0..t, bitwise identical to feeding the prefix alone.
ForwardTrace forward(const LstmParameters& params, const std::vector<Vec>& frames);

struct PartialPrediction {
  int class_id = 0;     // argmax, ties to the lowest index
  Vec probs;            // softmax over the last prefix frame's logits
  double intensity = 0; // predicted intensity at that frame
};

PartialPrediction predict_partial(const LstmParameters& params,
                                  const std::vector<Vec>& prefix_frames);

/// Exact backpropagation through time. Upstream gradients are injected at up
/// to three points per frame: the class logits (d_logits[t], size Nc), the
/// post-sigmoid intensity prediction (d_intensity[t]) and the hidden state
/// itself (d_hidden[t], size H). Any injection may be passed empty to mean
/// all-zero. Returns gradients for every parameter block.
ParamGrads backward(const LstmParameters& params, const ForwardTrace& trace,
                    const std::vector<Vec>& d_logits, const Vec& d_intensity,
                    const std::vector<Vec>& d_hidden);

}  // namespace otf

#endif
