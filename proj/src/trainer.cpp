#include "otf/trainer.hpp"

#include <chrono>
#include <cmath>

#include "otf/intensity.hpp"

namespace otf {

namespace {

constexpr std::uint64_t kTagInit = 21;
constexpr std::uint64_t kTagShuffle = 22;
constexpr std::uint64_t kTagKmeans = 23;

constexpr double kClipNorm = 5.0;

struct TrainItem {
  FeatureSequence seq;
  Vec onehot;
  IntensityTrace label_trace;
};

std::vector<TrainItem> prepare_items(const Dataset& ds, bool augment) {
  std::vector<const FeatureSequence*> sources;
  std::vector<FeatureSequence> augmented;
  for (const FeatureSequence& s : ds.sequences) sources.push_back(&s);
  if (augment) {
    augmented.reserve(2 * ds.sequences.size());
    for (const FeatureSequence& s : ds.sequences) {
      auto [even, odd] = temporal_augment(s);
      augmented.push_back(std::move(even));
      augmented.push_back(std::move(odd));
    }
    for (const FeatureSequence& s : augmented) sources.push_back(&s);
  }

  const std::size_t n_classes = static_cast<std::size_t>(ds.config.num_classes);
  std::vector<TrainItem> items;
  items.reserve(sources.size());
  for (const FeatureSequence* s : sources) {
    TrainItem item;
    item.seq = *s;
    item.onehot = Vec(n_classes, 0.0);
    item.onehot[static_cast<std::size_t>(s->class_id)] = 1.0;
    item.label_trace = estimate_trace(*s);
    items.push_back(std::move(item));
  }
  return items;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (!(base_lr > 0.0)) throw ConfigError("train config: base_lr must be > 0");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
  if (hidden_dim < 1) throw ConfigError("train config: hidden_dim must be >= 1");
  if (!(beta > 0.0)) throw ConfigError("train config: beta must be > 0");
  if (e3_weight < 0.0) throw ConfigError("train config: e3_weight must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ConfigError("train config: momentum must lie in [0, 1)");
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw ConfigError("lr_schedule: epoch must be >= 0");
  return config.base_lr * std::pow(10.0, -static_cast<double>(epoch / 10));
}

double holdout_accuracy(const LstmParameters& params, const Dataset& ds) {
  if (ds.sequences.empty()) throw ConfigError("holdout_accuracy: empty dataset");
  std::size_t correct = 0;
  for (const FeatureSequence& seq : ds.sequences) {
    const PartialPrediction pred = predict_partial(params, seq.frames);
    if (pred.class_id == seq.class_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.sequences.size());
}

TrainResult train(const Dataset& train_set, const TrainConfig& config,
                  const Dataset* holdout, const LstmParameters* resume_params,
                  int start_epoch, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.sequences.empty()) throw ConfigError("train: empty training set");
  if (start_epoch < 0 || start_epoch > config.epochs)
    throw ConfigError("train: start_epoch out of range");

  const LstmDims dims{static_cast<std::size_t>(train_set.config.feature_dim),
                      static_cast<std::size_t>(config.hidden_dim),
                      static_cast<std::size_t>(train_set.config.num_classes)};

  const std::vector<TrainItem> items = prepare_items(train_set, config.augment);

  TrainResult result;
  result.params = resume_params != nullptr
                      ? *resume_params
                      : init_params(dims, derive_seed(config.seed, kTagInit));
  if (!(result.params.dims == dims))
    throw ConfigError("train: resume checkpoint dimensions do not match");

  LstmParameters velocity = zero_params(dims);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  const ObjectiveConfig phase1_cfg{/*use_e1=*/true, /*use_e2=*/config.use_e2,
                                   /*use_e3=*/false, config.e3_weight, config.beta,
                                   config.literal_eq5};
  const ObjectiveConfig phase3_cfg{/*use_e1=*/false, /*use_e2=*/false,
                                   /*use_e3=*/true, config.e3_weight, config.beta,
                                   config.literal_eq5};

  // One minibatch pass over `order`; returns summed LossBreakdown.
  const auto run_phase = [&](const std::vector<std::size_t>& order,
                             const ObjectiveConfig& cfg,
                             const PerceivedClusterModel* model, double lr, int epoch) {
    LossBreakdown phase_sum;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, order.size());
      ParamGrads batch_grads = zero_params(dims);
      for (std::size_t k = begin; k < end; ++k) {
        const TrainItem& item = items[order[k]];
        const ForwardTrace trace = forward(result.params, item.seq.frames);
        const LossBreakdown lb =
            evaluate_losses(trace, item.onehot, item.label_trace, model, order[k],
                            item.seq.class_id, cfg);
        if (!std::isfinite(lb.total))
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
        phase_sum.e1 += lb.e1;
        phase_sum.e2 += lb.e2;
        phase_sum.e3 += lb.e3;
        phase_sum.total += lb.total;
        add_scaled(batch_grads,
                   evaluate_gradients(result.params, trace, item.onehot,
                                      item.label_trace, model, order[k],
                                      item.seq.class_id, cfg),
                   1.0);
      }
      scale_params(batch_grads, 1.0 / static_cast<double>(end - begin));
      clip_global_norm(batch_grads, kClipNorm);
      if (config.momentum > 0.0) {
        scale_params(velocity, config.momentum);
        add_scaled(velocity, batch_grads, 1.0);
        add_scaled(result.params, velocity, -lr);
      } else {
        add_scaled(result.params, batch_grads, -lr);
      }
      if (!params_finite(result.params))
        throw NumericError("train: non-finite parameters at epoch " +
                           std::to_string(epoch));
    }
    return phase_sum;
  };

  const double n_items = static_cast<double>(items.size());

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    const double epoch_start = now_ms();

    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(config.seed, kTagShuffle,
                                static_cast<std::uint64_t>(epoch), 1));
    shuffle_rng.shuffle(order);

    const LossBreakdown p1 = run_phase(order, phase1_cfg, nullptr, lr, epoch);

    EpochRow row1;
    row1.epoch = epoch;
    row1.phase = "e1e2";
    row1.e1 = p1.e1 / n_items;
    row1.e2 = p1.e2 / n_items;
    row1.total = p1.total / n_items;
    row1.lr = lr;

    if (config.use_e3) {
      // Fresh per-frame features from the weights phase one just produced.
      std::vector<FrameFeature> features;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const ForwardTrace trace = forward(result.params, items[i].seq.frames);
        for (std::size_t t = 0; t < trace.frames.size(); ++t) {
          features.push_back(FrameFeature{i, t, items[i].seq.class_id,
                                          items[i].label_trace.values[t],
                                          trace.frames[t].hidden});
        }
      }
      const PerceivedClusterModel model = build_model(
          features, derive_seed(config.seed, kTagKmeans, static_cast<std::uint64_t>(epoch)));

      std::vector<std::size_t> order3(items.size());
      for (std::size_t i = 0; i < order3.size(); ++i) order3[i] = i;
      Rng shuffle3(derive_seed(config.seed, kTagShuffle,
                               static_cast<std::uint64_t>(epoch), 2));
      shuffle3.shuffle(order3);

      const LossBreakdown p3 = run_phase(order3, phase3_cfg, &model, lr, epoch);

      EpochRow row3;
      row3.epoch = epoch;
      row3.phase = "e3";
      row3.e3 = p3.e3 / n_items;
      row3.total = p3.total / n_items;
      row3.lr = lr;
      if (holdout != nullptr)
        row3.holdout_accuracy = holdout_accuracy(result.params, *holdout);
      row1.wall_ms = 0.0;  // per-epoch time lands on the last row
      row3.wall_ms = now_ms() - epoch_start;
      result.log.rows.push_back(row1);
      result.log.rows.push_back(row3);
      result.final_cluster_model = model;
    } else {
      if (holdout != nullptr)
        row1.holdout_accuracy = holdout_accuracy(result.params, *holdout);
      row1.wall_ms = now_ms() - epoch_start;
      result.log.rows.push_back(row1);
    }

    if (on_epoch) on_epoch(epoch, result.params, result.log);
  }

  return result;
}

}  // namespace otf
