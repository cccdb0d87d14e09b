#ifndef OTF_TRAINER_HPP
#define OTF_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otf/clustering.hpp"
#include "otf/lstm_net.hpp"
#include "otf/objectives.hpp"
#include "otf/synth_data.hpp"

namespace otf {

struct TrainConfig {
  int epochs = 50;
  double base_lr = 1e-4;  // divided by 10 every 10 epochs
  int batch_size = 8;
  int hidden_dim = 32;
  double beta = 10.0;
  double e3_weight = 1.0;
  std::uint64_t seed = 1;
  bool use_e2 = true;       // off = classification-only ablation
  bool use_e3 = true;       // off = skip the cluster phase entirely
  bool literal_eq5 = false;
  double momentum = 0.0;    // plain gradient descent when 0
  bool augment = false;     // add even/odd-frame variants of every sequence

  void validate() const;  // throws ConfigError
};

struct EpochRow {
  int epoch = 0;
  std::string phase;  // "e1e2" or "e3"
  double e1 = 0.0, e2 = 0.0, e3 = 0.0, total = 0.0;
  double lr = 0.0;
  std::optional<double> holdout_accuracy;  // filled on the epoch's last row
  double wall_ms = 0.0;
};

struct TrainLog {
  std::vector<EpochRow> rows;
};

struct TrainResult {
  LstmParameters params;
  TrainLog log;
  std::optional<PerceivedClusterModel> final_cluster_model;
};

/// base_lr * 10^(-floor(epoch / 10)).
double lr_schedule(int epoch, const TrainConfig& config);

using EpochCallback =
    std::function<void(int epoch, const LstmParameters& params, const TrainLog& log)>;

/// Two-phase epoch loop. Phase one runs minibatch gradient descent on the
/// classification + intensity terms; when the cluster term is enabled, each
/// epoch then collects per-frame hidden features from the whole training
/// set, rebuilds the perceived-cluster model, and runs a second minibatch
/// pass on the cluster term with those statistics frozen.
///
/// Deterministic: shuffles and clustering draw from per-epoch substreams of
/// config.seed, so resuming from epoch k (resume_params + start_epoch)
/// reproduces an uninterrupted run bitwise when momentum is 0.
/// Throws NumericError as soon as a loss or parameter turns non-finite.
TrainResult train(const Dataset& train_set, const TrainConfig& config,
                  const Dataset* holdout = nullptr,
                  const LstmParameters* resume_params = nullptr, int start_epoch = 0,
                  const EpochCallback& on_epoch = nullptr);

/// Fraction of sequences whose full-sequence prediction matches the label.
double holdout_accuracy(const LstmParameters& params, const Dataset& ds);

}  // namespace otf

#endif
