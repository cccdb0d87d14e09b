#ifndef OTF_OBJECTIVES_HPP
#define OTF_OBJECTIVES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "otf/clustering.hpp"
#include "otf/core_math.hpp"
#include "otf/intensity.hpp"
#include "otf/lstm_net.hpp"

namespace otf {

/// Per-term loss values of one pass. Inactive terms stay 0; total carries
/// the configured weighting (classification and intensity terms weigh 1:1,
/// the cluster term by its phase weight).
struct LossBreakdown {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double total = 0.0;
};

/// Which terms are active and how the cluster term behaves.
struct ObjectiveConfig {
  bool use_e1 = true;
  bool use_e2 = true;
  bool use_e3 = false;
  double e3_weight = 1.0;
  double beta = 10.0;      // softplus sharpness for the cluster term
  bool literal_eq5 = false;  // compatibility switch for the intensity gradient
};

// --- classification term (cross entropy at the last frame) ---

/// -sum_c y_c log(max(yhat_c, 1e-12)). y must be one-hot.
double loss_e1(const Vec& yhat, const Vec& y_onehot);

/// Gradient w.r.t. pre-softmax logits: yhat - y. Entries sum to zero.
Vec grad_e1_logits(const Vec& yhat, const Vec& y_onehot);

// --- intensity term (per-frame Euclidean loss) ---

/// (1/2) sum_t (pred_t - label_t)^2.
double loss_e2(const Vec& pred_trace, const IntensityTrace& label_trace);

/// Exact derivative of loss_e2 w.r.t. the predicted intensities: per-frame
/// pred_t - label_t.
Vec grad_e2_intensity(const Vec& pred_trace, const IntensityTrace& label_trace);

/// Compatibility variant that additionally scales every frame's gradient by
/// sigmoid(beta * e2) with e2 the sequence's squared trace error. This does
/// NOT match finite differences of loss_e2; it exists so the discrepancy can
/// be measured.
Vec grad_e2_intensity_literal(const Vec& pred_trace, const IntensityTrace& label_trace,
                              double beta);

// --- cluster term ---

/// One frame feature as the cluster term sees it.
struct E3Item {
  std::size_t sequence_key = 0;
  std::size_t frame_index = 0;
  int class_id = 0;  // source class of the sequence
  Vec feature;
};

/// Pull target for one item: perceived-expression frames aim at their class
/// mean with radius d_c; perceived-neutral frames aim at the pooled neutral
/// mean, keeping the source class's radius (radius 0 for neutral-class
/// sequences, which have no expression cluster).
struct E3Target {
  const Vec* mean = nullptr;
  double radius = 0.0;
};

E3Target e3_target(const PerceivedClusterModel& model, int class_id, Perceived assignment);

/// (1/2) sum over items of g(|f - m|^2 - d^2, beta). Empty list gives 0.
double loss_e3(const std::vector<E3Item>& items, const PerceivedClusterModel& model,
               double beta);

/// Per-item gradient w.r.t. the feature: g'(e3) * (f - m), with the cluster
/// statistics held constant.
std::vector<Vec> grad_e3_features(const std::vector<E3Item>& items,
                                  const PerceivedClusterModel& model, double beta);

// --- glue used by the trainer and the checker ---

/// Losses of one sequence under the active terms. `model` may be null when
/// the cluster term is off.
LossBreakdown evaluate_losses(const ForwardTrace& trace, const Vec& label_onehot,
                              const IntensityTrace& label_trace,
                              const PerceivedClusterModel* model,
                              std::size_t sequence_key, int class_id,
                              const ObjectiveConfig& cfg);

/// Parameter gradients of the same. Runs one backward pass per active term
/// and sums them in fixed order (E1, E2, E3), so the combined gradient is
/// bitwise equal to the sum of the individual term gradients.
ParamGrads evaluate_gradients(const LstmParameters& params, const ForwardTrace& trace,
                              const Vec& label_onehot, const IntensityTrace& label_trace,
                              const PerceivedClusterModel* model,
                              std::size_t sequence_key, int class_id,
                              const ObjectiveConfig& cfg);

// --- finite-difference checking ---

/// Central-difference check of `analytic_grad` against `loss_fn` around
/// `params_flat`. Checks every coordinate when there are at most
/// `exhaustive_limit` of them, otherwise a seeded subsample of
/// `subsample_size`. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, 1e-8); the maximum is returned. epsilon must lie
/// in [1e-7, 1e-3]. Throws NumericError when the loss comes back non-finite.
double grad_check(const std::function<double(const Vec&)>& loss_fn, const Vec& params_flat,
                  const Vec& analytic_grad, double epsilon,
                  std::uint64_t subsample_seed = 0, std::size_t exhaustive_limit = 500,
                  std::size_t subsample_size = 200);

/// A full randomized fixture (net, frames, labels, frozen cluster model)
/// for checking the recurrent network's gradients end to end.
struct GradCheckCase {
  ObjectiveConfig objectives;
  LstmDims dims{3, 4, 3};
  std::size_t num_frames = 5;
  double epsilon = 1e-5;
  std::uint64_t seed = 1;
};

/// Max relative error of the analytic gradient for the case's active terms.
double lstm_grad_check(const GradCheckCase& check);

}  // namespace otf

#endif
