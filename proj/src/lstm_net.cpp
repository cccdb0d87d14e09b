#include "otf/lstm_net.hpp"

#include <cmath>

namespace otf {

namespace {

void check_dims(const LstmDims& dims) {
  if (dims.input_dim == 0 || dims.hidden_dim == 0 || dims.num_classes == 0)
    throw ConfigError("lstm dims must all be positive");
}

// Canonical block order; every flatten/IO/arithmetic path goes through here.
template <typename P, typename Fn>
void visit_blocks(P& p, Fn&& fn) {
  for (auto& gate : p.gates) {
    fn(gate.wx.data);
    fn(gate.wh.data);
    fn(gate.b);
  }
  fn(p.w_intensity);
  fn(p.b_intensity);
  fn(p.w_class.data);
  fn(p.b_class);
}

}  // namespace

bool operator==(const LstmParameters& a, const LstmParameters& b) {
  if (!(a.dims == b.dims)) return false;
  for (int g = 0; g < 4; ++g) {
    if (!(a.gates[g].wx.data == b.gates[g].wx.data &&
          a.gates[g].wh.data == b.gates[g].wh.data && a.gates[g].b == b.gates[g].b))
      return false;
  }
  return a.w_intensity == b.w_intensity && a.b_intensity == b.b_intensity &&
         a.w_class.data == b.w_class.data && a.b_class == b.b_class;
}

std::size_t LstmParameters::parameter_count() const {
  std::size_t n = 0;
  visit_blocks(*this, [&](const Vec& v) { n += v.size(); });
  return n;
}

Vec LstmParameters::flatten() const {
  Vec flat;
  flat.reserve(parameter_count());
  visit_blocks(*this, [&](const Vec& v) { flat.insert(flat.end(), v.begin(), v.end()); });
  return flat;
}

LstmParameters zero_params(const LstmDims& dims) {
  check_dims(dims);
  LstmParameters p;
  p.dims = dims;
  for (auto& gate : p.gates) {
    gate.wx = Mat(dims.hidden_dim, dims.input_dim);
    gate.wh = Mat(dims.hidden_dim, dims.hidden_dim);
    gate.b = Vec(dims.hidden_dim, 0.0);
  }
  p.w_intensity = Vec(dims.hidden_dim, 0.0);
  p.b_intensity = Vec(1, 0.0);
  p.w_class = Mat(dims.num_classes, dims.hidden_dim);
  p.b_class = Vec(dims.num_classes, 0.0);
  return p;
}

LstmParameters init_params(const LstmDims& dims, std::uint64_t seed) {
  LstmParameters p = zero_params(dims);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden_dim));
  const auto fill = [&](Vec& v) {
    for (double& x : v) x = rng.next_uniform(-bound, bound);
  };
  for (auto& gate : p.gates) {
    fill(gate.wx.data);
    fill(gate.wh.data);
  }
  fill(p.w_intensity);
  fill(p.w_class.data);
  // biases stay deterministic constants: forget gate opens, the rest at zero
  for (double& x : p.gates[static_cast<int>(Gate::Forget)].b) x = 1.0;
  return p;
}

LstmParameters unflatten(const LstmDims& dims, const Vec& flat) {
  LstmParameters p = zero_params(dims);
  if (flat.size() != p.parameter_count())
    throw ConfigError("unflatten: flat vector has wrong length");
  std::size_t pos = 0;
  visit_blocks(p, [&](Vec& v) {
    for (double& x : v) x = flat[pos++];
  });
  return p;
}

void add_scaled(LstmParameters& dst, const LstmParameters& src, double scale) {
  if (!(dst.dims == src.dims)) throw ConfigError("add_scaled: shape mismatch");
  for (int g = 0; g < 4; ++g) {
    axpy(dst.gates[g].wx.data, scale, src.gates[g].wx.data);
    axpy(dst.gates[g].wh.data, scale, src.gates[g].wh.data);
    axpy(dst.gates[g].b, scale, src.gates[g].b);
  }
  axpy(dst.w_intensity, scale, src.w_intensity);
  axpy(dst.b_intensity, scale, src.b_intensity);
  axpy(dst.w_class.data, scale, src.w_class.data);
  axpy(dst.b_class, scale, src.b_class);
}

void scale_params(LstmParameters& p, double scale) {
  visit_blocks(p, [&](Vec& v) {
    for (double& x : v) x *= scale;
  });
}

double global_norm(const LstmParameters& p) {
  double sq = 0.0;
  visit_blocks(p, [&](const Vec& v) { sq += dot(v, v); });
  return std::sqrt(sq);
}

double clip_global_norm(LstmParameters& p, double max_norm) {
  const double norm = global_norm(p);
  if (norm <= max_norm || norm == 0.0) return 1.0;
  const double factor = max_norm / norm;
  scale_params(p, factor);
  return factor;
}

bool params_finite(const LstmParameters& p) {
  bool ok = true;
  visit_blocks(p, [&](const Vec& v) { ok = ok && all_finite(v); });
  return ok;
}

LstmState initial_state(const LstmDims& dims) {
  return LstmState{Vec(dims.hidden_dim, 0.0), Vec(dims.hidden_dim, 0.0)};
}

FrameState step(const LstmParameters& params, LstmState& state, const Vec& x) {
  const LstmDims& dims = params.dims;
  if (x.size() != dims.input_dim)
    throw ConfigError("lstm step: frame dimension mismatch");

  const auto gate_preact = [&](Gate g) {
    const GateParams& gp = params.gates[static_cast<int>(g)];
    Vec a = matvec(gp.wx, x);
    const Vec rec = matvec(gp.wh, state.h);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += rec[i] + gp.b[i];
    return a;
  };

  FrameState fs;
  fs.gate_i = gate_preact(Gate::Input);
  fs.gate_f = gate_preact(Gate::Forget);
  fs.gate_g = gate_preact(Gate::Cell);
  fs.gate_o = gate_preact(Gate::Output);
  for (std::size_t i = 0; i < dims.hidden_dim; ++i) {
    fs.gate_i[i] = sigmoid(fs.gate_i[i]);
    fs.gate_f[i] = sigmoid(fs.gate_f[i]);
    fs.gate_g[i] = std::tanh(fs.gate_g[i]);
    fs.gate_o[i] = sigmoid(fs.gate_o[i]);
  }

  fs.cell.resize(dims.hidden_dim);
  fs.cell_tanh.resize(dims.hidden_dim);
  fs.hidden.resize(dims.hidden_dim);
  for (std::size_t i = 0; i < dims.hidden_dim; ++i) {
    fs.cell[i] = fs.gate_f[i] * state.c[i] + fs.gate_i[i] * fs.gate_g[i];
    fs.cell_tanh[i] = std::tanh(fs.cell[i]);
    fs.hidden[i] = fs.gate_o[i] * fs.cell_tanh[i];
  }

  fs.logits = matvec(params.w_class, fs.hidden);
  for (std::size_t c = 0; c < dims.num_classes; ++c) fs.logits[c] += params.b_class[c];
  fs.intensity_preact = dot(params.w_intensity, fs.hidden) + params.b_intensity[0];
  fs.intensity = sigmoid(fs.intensity_preact);

  state.c = fs.cell;
  state.h = fs.hidden;
  return fs;
}

ForwardTrace forward(const LstmParameters& params, const std::vector<Vec>& frames) {
  if (frames.empty()) throw ConfigError("forward: empty sequence");
  ForwardTrace trace;
  trace.inputs = frames;
  trace.frames.reserve(frames.size());
  LstmState state = initial_state(params.dims);
  for (const Vec& x : frames) {
    trace.frames.push_back(step(params, state, x));
  }
  trace.probs = softmax(trace.frames.back().logits);
  return trace;
}

PartialPrediction predict_partial(const LstmParameters& params,
                                  const std::vector<Vec>& prefix_frames) {
  if (prefix_frames.empty()) throw ConfigError("predict_partial: empty prefix");
  LstmState state = initial_state(params.dims);
  FrameState last;
  for (const Vec& x : prefix_frames) last = step(params, state, x);

  PartialPrediction pred;
  pred.probs = softmax(last.logits);
  pred.intensity = last.intensity;
  pred.class_id = 0;
  for (std::size_t c = 1; c < pred.probs.size(); ++c) {
    if (pred.probs[c] > pred.probs[static_cast<std::size_t>(pred.class_id)])
      pred.class_id = static_cast<int>(c);
  }
  return pred;
}

ParamGrads backward(const LstmParameters& params, const ForwardTrace& trace,
                    const std::vector<Vec>& d_logits, const Vec& d_intensity,
                    const std::vector<Vec>& d_hidden) {
  const LstmDims& dims = params.dims;
  const std::size_t n_frames = trace.frames.size();
  if (n_frames == 0 || trace.inputs.size() != n_frames)
    throw ConfigError("backward: trace is empty or inconsistent");
  if (!d_logits.empty() && d_logits.size() != n_frames)
    throw ConfigError("backward: d_logits length mismatch");
  if (!d_intensity.empty() && d_intensity.size() != n_frames)
    throw ConfigError("backward: d_intensity length mismatch");
  if (!d_hidden.empty() && d_hidden.size() != n_frames)
    throw ConfigError("backward: d_hidden length mismatch");

  ParamGrads grads = zero_params(dims);
  const std::size_t H = dims.hidden_dim;

  Vec dh_next(H, 0.0);  // dE/dh_t flowing in from frame t+1
  Vec dc_next(H, 0.0);  // dE/dc_t flowing in from frame t+1

  for (std::size_t ti = n_frames; ti-- > 0;) {
    const FrameState& fs = trace.frames[ti];
    const Vec& x = trace.inputs[ti];
    const Vec* h_prev = ti > 0 ? &trace.frames[ti - 1].hidden : nullptr;
    const Vec* c_prev = ti > 0 ? &trace.frames[ti - 1].cell : nullptr;

    // Collect everything that lands on h_t.
    Vec dh = dh_next;
    if (!d_hidden.empty() && !d_hidden[ti].empty()) {
      if (d_hidden[ti].size() != H) throw ConfigError("backward: d_hidden entry size");
      for (std::size_t i = 0; i < H; ++i) dh[i] += d_hidden[ti][i];
    }
    if (!d_logits.empty() && !d_logits[ti].empty()) {
      const Vec& dz = d_logits[ti];
      if (dz.size() != dims.num_classes)
        throw ConfigError("backward: d_logits entry size");
      const Vec via_head = matvec_transposed(params.w_class, dz);
      for (std::size_t i = 0; i < H; ++i) dh[i] += via_head[i];
      add_outer(grads.w_class, dz, fs.hidden);
      for (std::size_t c = 0; c < dims.num_classes; ++c) grads.b_class[c] += dz[c];
    }
    if (!d_intensity.empty() && d_intensity[ti] != 0.0) {
      const double du = d_intensity[ti] * sigmoid_prime_from_value(fs.intensity);
      for (std::size_t i = 0; i < H; ++i) {
        dh[i] += du * params.w_intensity[i];
        grads.w_intensity[i] += du * fs.hidden[i];
      }
      grads.b_intensity[0] += du;
    }

    // Through h_t = o_t * tanh(c_t) and the cell update.
    Vec dc(H);
    Vec d_ai(H), d_af(H), d_ag(H), d_ao(H);
    for (std::size_t i = 0; i < H; ++i) {
      dc[i] = dc_next[i] + dh[i] * fs.gate_o[i] * (1.0 - fs.cell_tanh[i] * fs.cell_tanh[i]);
      d_ao[i] = dh[i] * fs.cell_tanh[i] * sigmoid_prime_from_value(fs.gate_o[i]);
      d_ai[i] = dc[i] * fs.gate_g[i] * sigmoid_prime_from_value(fs.gate_i[i]);
      const double cp = c_prev ? (*c_prev)[i] : 0.0;
      d_af[i] = dc[i] * cp * sigmoid_prime_from_value(fs.gate_f[i]);
      d_ag[i] = dc[i] * fs.gate_i[i] * (1.0 - fs.gate_g[i] * fs.gate_g[i]);
    }

    const std::array<const Vec*, 4> d_preact = {&d_ai, &d_af, &d_ag, &d_ao};
    for (int g = 0; g < 4; ++g) {
      const Vec& da = *d_preact[g];
      add_outer(grads.gates[g].wx, da, x);
      if (h_prev) add_outer(grads.gates[g].wh, da, *h_prev);
      for (std::size_t i = 0; i < H; ++i) grads.gates[g].b[i] += da[i];
    }

    // Flow to frame t-1.
    for (std::size_t i = 0; i < H; ++i) dh_next[i] = 0.0;
    for (int g = 0; g < 4; ++g) {
      const Vec via_rec = matvec_transposed(params.gates[g].wh, *d_preact[g]);
      for (std::size_t i = 0; i < H; ++i) dh_next[i] += via_rec[i];
    }
    for (std::size_t i = 0; i < H; ++i) dc_next[i] = dc[i] * fs.gate_f[i];
  }

  return grads;
}

}  // namespace otf
