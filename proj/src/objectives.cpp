#include "otf/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace otf {

double loss_e1(const Vec& yhat, const Vec& y_onehot) {
  if (yhat.size() != y_onehot.size()) throw ConfigError("loss_e1: length mismatch");
  double loss = 0.0;
  for (std::size_t c = 0; c < yhat.size(); ++c) {
    if (y_onehot[c] != 0.0) {
      loss -= y_onehot[c] * std::log(std::max(yhat[c], 1e-12));
    }
  }
  return loss;
}

Vec grad_e1_logits(const Vec& yhat, const Vec& y_onehot) {
  if (yhat.size() != y_onehot.size())
    throw ConfigError("grad_e1_logits: length mismatch");
  Vec g(yhat.size());
  for (std::size_t c = 0; c < yhat.size(); ++c) g[c] = yhat[c] - y_onehot[c];
  return g;
}

double loss_e2(const Vec& pred_trace, const IntensityTrace& label_trace) {
  if (pred_trace.size() != label_trace.values.size())
    throw ConfigError("loss_e2: length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < pred_trace.size(); ++t) {
    const double d = pred_trace[t] - label_trace.values[t];
    s += d * d;
  }
  return 0.5 * s;
}

Vec grad_e2_intensity(const Vec& pred_trace, const IntensityTrace& label_trace) {
  if (pred_trace.size() != label_trace.values.size())
    throw ConfigError("grad_e2_intensity: length mismatch");
  Vec g(pred_trace.size());
  for (std::size_t t = 0; t < pred_trace.size(); ++t) {
    g[t] = pred_trace[t] - label_trace.values[t];
  }
  return g;
}

Vec grad_e2_intensity_literal(const Vec& pred_trace, const IntensityTrace& label_trace,
                              double beta) {
  Vec g = grad_e2_intensity(pred_trace, label_trace);
  double e2 = 0.0;
  for (std::size_t t = 0; t < pred_trace.size(); ++t) {
    const double d = label_trace.values[t] - pred_trace[t];
    e2 += d * d;
  }
  const double factor = softplus_g_prime(e2, beta);
  for (double& x : g) x *= factor;
  return g;
}

E3Target e3_target(const PerceivedClusterModel& model, int class_id,
                   Perceived assignment) {
  if (assignment == Perceived::Expression) {
    const auto it = model.class_means.find(class_id);
    if (it == model.class_means.end())
      throw ConfigError("e3_target: class missing from cluster model");
    return E3Target{&it->second, model.radii.at(class_id)};
  }
  const double radius = class_id == 0 ? 0.0 : [&] {
    const auto it = model.radii.find(class_id);
    if (it == model.radii.end())
      throw ConfigError("e3_target: class missing from cluster model");
    return it->second;
  }();
  return E3Target{&model.neutral_mean, radius};
}

double loss_e3(const std::vector<E3Item>& items, const PerceivedClusterModel& model,
               double beta) {
  double s = 0.0;
  for (const E3Item& item : items) {
    const Perceived a = model.assignment_of(item.sequence_key, item.frame_index);
    const E3Target target = e3_target(model, item.class_id, a);
    const double e3 =
        squared_distance(item.feature, *target.mean) - target.radius * target.radius;
    s += softplus_g(e3, beta);
  }
  return 0.5 * s;
}

std::vector<Vec> grad_e3_features(const std::vector<E3Item>& items,
                                  const PerceivedClusterModel& model, double beta) {
  std::vector<Vec> grads;
  grads.reserve(items.size());
  for (const E3Item& item : items) {
    const Perceived a = model.assignment_of(item.sequence_key, item.frame_index);
    const E3Target target = e3_target(model, item.class_id, a);
    const double e3 =
        squared_distance(item.feature, *target.mean) - target.radius * target.radius;
    const double gp = softplus_g_prime(e3, beta);
    Vec g(item.feature.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = gp * (item.feature[i] - (*target.mean)[i]);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

namespace {

Vec predicted_trace(const ForwardTrace& trace) {
  Vec pred(trace.frames.size());
  for (std::size_t t = 0; t < trace.frames.size(); ++t) {
    pred[t] = trace.frames[t].intensity;
  }
  return pred;
}

std::vector<E3Item> items_from_trace(const ForwardTrace& trace, std::size_t sequence_key,
                                     int class_id) {
  std::vector<E3Item> items;
  items.reserve(trace.frames.size());
  for (std::size_t t = 0; t < trace.frames.size(); ++t) {
    items.push_back(E3Item{sequence_key, t, class_id, trace.frames[t].hidden});
  }
  return items;
}

}  // namespace

LossBreakdown evaluate_losses(const ForwardTrace& trace, const Vec& label_onehot,
                              const IntensityTrace& label_trace,
                              const PerceivedClusterModel* model,
                              std::size_t sequence_key, int class_id,
                              const ObjectiveConfig& cfg) {
  LossBreakdown out;
  if (cfg.use_e1) {
    out.e1 = loss_e1(trace.probs, label_onehot);
    out.total += out.e1;
  }
  if (cfg.use_e2) {
    out.e2 = loss_e2(predicted_trace(trace), label_trace);
    out.total += out.e2;
  }
  if (cfg.use_e3) {
    if (model == nullptr) throw ConfigError("evaluate_losses: cluster model required");
    out.e3 = loss_e3(items_from_trace(trace, sequence_key, class_id), *model, cfg.beta);
    out.total += cfg.e3_weight * out.e3;
  }
  return out;
}

ParamGrads evaluate_gradients(const LstmParameters& params, const ForwardTrace& trace,
                              const Vec& label_onehot, const IntensityTrace& label_trace,
                              const PerceivedClusterModel* model,
                              std::size_t sequence_key, int class_id,
                              const ObjectiveConfig& cfg) {
  const std::size_t n_frames = trace.frames.size();
  const std::vector<Vec> no_logits;
  const Vec no_intensity;
  const std::vector<Vec> no_hidden;

  ParamGrads grads = zero_params(params.dims);

  if (cfg.use_e1) {
    std::vector<Vec> d_logits(n_frames);
    d_logits.back() = grad_e1_logits(trace.probs, label_onehot);
    add_scaled(grads, backward(params, trace, d_logits, no_intensity, no_hidden), 1.0);
  }
  if (cfg.use_e2) {
    const Vec pred = predicted_trace(trace);
    const Vec d_intensity = cfg.literal_eq5
                                ? grad_e2_intensity_literal(pred, label_trace, cfg.beta)
                                : grad_e2_intensity(pred, label_trace);
    add_scaled(grads, backward(params, trace, no_logits, d_intensity, no_hidden), 1.0);
  }
  if (cfg.use_e3) {
    if (model == nullptr) throw ConfigError("evaluate_gradients: cluster model required");
    const std::vector<E3Item> items = items_from_trace(trace, sequence_key, class_id);
    const std::vector<Vec> feature_grads = grad_e3_features(items, *model, cfg.beta);
    std::vector<Vec> d_hidden(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
      d_hidden[t] = feature_grads[t];
      for (double& x : d_hidden[t]) x *= cfg.e3_weight;
    }
    add_scaled(grads, backward(params, trace, no_logits, no_intensity, d_hidden), 1.0);
  }
  return grads;
}

double grad_check(const std::function<double(const Vec&)>& loss_fn, const Vec& params_flat,
                  const Vec& analytic_grad, double epsilon, std::uint64_t subsample_seed,
                  std::size_t exhaustive_limit, std::size_t subsample_size) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
    throw ConfigError("grad_check: epsilon must lie in [1e-7, 1e-3]");
  if (params_flat.size() != analytic_grad.size())
    throw ConfigError("grad_check: gradient length mismatch");

  std::vector<std::size_t> indices(params_flat.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  if (params_flat.size() > exhaustive_limit) {
    Rng rng(derive_seed(subsample_seed, 0xfd));
    rng.shuffle(indices);
    indices.resize(std::min(params_flat.size(), std::max<std::size_t>(subsample_size, 200)));
    std::sort(indices.begin(), indices.end());
  }

  Vec perturbed = params_flat;
  double max_rel = 0.0;
  for (std::size_t i : indices) {
    perturbed[i] = params_flat[i] + epsilon;
    const double plus = loss_fn(perturbed);
    perturbed[i] = params_flat[i] - epsilon;
    const double minus = loss_fn(perturbed);
    perturbed[i] = params_flat[i];
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw NumericError("grad_check: non-finite loss");
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double a = analytic_grad[i];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

double lstm_grad_check(const GradCheckCase& check) {
  const LstmDims dims = check.dims;
  const LstmParameters params = init_params(dims, derive_seed(check.seed, 11));

  Rng frame_rng(derive_seed(check.seed, 12));
  std::vector<Vec> frames(check.num_frames, Vec(dims.input_dim));
  for (Vec& f : frames) {
    for (double& x : f) x = frame_rng.next_double();
  }

  Rng label_rng(derive_seed(check.seed, 13));
  // expressive classes only; class 0 carries no expression cluster
  const int cls = 1 + static_cast<int>(label_rng.next_below(dims.num_classes - 1));
  Vec onehot(dims.num_classes, 0.0);
  onehot[static_cast<std::size_t>(cls)] = 1.0;

  IntensityTrace label_trace;
  label_trace.values.resize(check.num_frames);
  Rng trace_rng(derive_seed(check.seed, 14));
  for (double& v : label_trace.values) v = trace_rng.next_double();

  // Frozen synthetic cluster model covering every expressive class.
  PerceivedClusterModel model;
  Rng model_rng(derive_seed(check.seed, 15));
  model.neutral_mean.resize(dims.hidden_dim);
  for (double& x : model.neutral_mean) x = model_rng.next_uniform(-0.5, 0.5);
  for (std::size_t c = 1; c < dims.num_classes; ++c) {
    Vec m(dims.hidden_dim);
    for (double& x : m) x = model_rng.next_uniform(-0.5, 0.5);
    model.class_means[static_cast<int>(c)] = std::move(m);
    model.radii[static_cast<int>(c)] = model_rng.next_uniform(0.25, 1.0);
  }
  for (std::size_t t = 0; t < check.num_frames; ++t) {
    model.assignments[{0, t}] =
        model_rng.next_double() < 0.5 ? Perceived::Neutral : Perceived::Expression;
  }

  const ObjectiveConfig& cfg = check.objectives;
  const auto loss_at = [&](const Vec& flat) {
    const LstmParameters p = unflatten(dims, flat);
    const ForwardTrace trace = forward(p, frames);
    return evaluate_losses(trace, onehot, label_trace, &model, 0, cls, cfg).total;
  };

  const ForwardTrace trace = forward(params, frames);
  const ParamGrads grads =
      evaluate_gradients(params, trace, onehot, label_trace, &model, 0, cls, cfg);

  return grad_check(loss_at, params.flatten(), grads.flatten(), check.epsilon,
                    derive_seed(check.seed, 16));
}

}  // namespace otf
