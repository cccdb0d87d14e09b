#ifndef OTF_IO_HPP
#define OTF_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "otf/clustering.hpp"
#include "otf/eval_harness.hpp"
#include "otf/lstm_net.hpp"
#include "otf/synth_data.hpp"
#include "otf/trainer.hpp"

namespace otf {

// Dataset file: {"config": {...}, "sequences": [{class_id, subject_id,
// apex_index, frames: [[...], ...]}, ...]}. Doubles round-trip exactly.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Requires every config field to be present; a missing one raises
/// ConfigError naming the field.
GenConfig parse_gen_config_json(const std::string& text);
GenConfig load_gen_config(const std::string& path);
std::string gen_config_to_json(const GenConfig& config);

/// Fields are optional here; absent ones keep their defaults.
TrainConfig parse_train_config_json(const std::string& text);
TrainConfig load_train_config(const std::string& path);
std::string train_config_to_json(const TrainConfig& config);

struct Checkpoint {
  LstmParameters params;
  std::uint64_t seed = 0;    // training seed provenance
  int epochs_trained = 0;
};

// Checkpoint file: format marker, dims, seed, epochs_trained and one flat
// array per parameter block in canonical order.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void save_cluster_model(const PerceivedClusterModel& model, const std::string& path);

// CSV: epoch,phase,e1,e2,e3,total,lr,holdout_accuracy,wall_ms
void write_train_log_csv(const TrainLog& log, const std::string& path);

// CSV: theta,rate,correct,total
void write_threshold_curve_csv(const std::vector<RatePoint>& curve,
                               const std::string& path);

// CSV: class_id,bin,t_center,mean_cosine,count
void write_similarity_curves_csv(
    const std::map<int, std::vector<SimilarityBin>>& curves, const std::string& path);

void write_eval_summary_json(const EvalReport& report, const std::string& path);

/// Run manifest written next to every artifact. `config_json` is the
/// serialized config snapshot; inputs/outputs are (label, path) pairs.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs, double duration_ms);

std::string read_text_file(const std::string& path);  // throws IoError
void write_text_file(const std::string& path, const std::string& content);

}  // namespace otf

#endif
