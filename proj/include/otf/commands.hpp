#ifndef OTF_COMMANDS_HPP
#define OTF_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "otf/io.hpp"
#include "otf/objectives.hpp"
#include "otf/trainer.hpp"

namespace otf {

// Implementation behind each CLI subcommand. Kept callable as a library so
// tests drive the exact code paths the binary does. All of them throw
// ConfigError / NumericError / IoError; the binary maps those to exit codes.

struct GenArgs {
  std::string config_path;  // empty = built-in default config
  std::string out_path;
  std::optional<std::uint64_t> seed_override;
};

void run_gen(const GenArgs& args);
void run_gen_with_config(const GenConfig& config, const std::string& out_path);

struct TrainArgs {
  std::string dataset_path;
  std::string out_dir;
  TrainConfig config;
  int split_folds = 0;  // 0 trains on the full dataset with no holdout
  int split_fold = 0;
  std::optional<std::uint64_t> split_seed;  // defaults to config.seed
  std::string resume_path;                  // continue from this checkpoint
  int checkpoint_every = 0;                 // extra snapshots every N epochs
  bool dump_clusters = false;
};

struct TrainOutcome {
  std::string checkpoint_path;
  std::optional<double> final_holdout_accuracy;
};

TrainOutcome run_train(const TrainArgs& args);

struct GradcheckArgs {
  std::uint64_t seed = 1;
  int num_seeds = 10;
  LstmDims dims{3, 4, 3};
  std::size_t num_frames = 5;
  double epsilon = 1e-5;
  double beta = 10.0;
  bool literal_eq5 = false;
  double threshold = 1e-4;
};

struct GradcheckReport {
  double e1_max = 0.0;
  double e2_max = 0.0;
  double e3_max = 0.0;
  double joint_max = 0.0;      // E1+E2 together
  double literal_e2_max = 0.0;  // deviation of the literal-form gradient
  bool pass = false;
};

GradcheckReport run_gradcheck(const GradcheckArgs& args, std::ostream* out = nullptr);

struct EvalArgs {
  std::string checkpoint_path;
  std::string dataset_path;
  std::string out_dir;
  int bins = 20;
};

EvalReport run_eval(const EvalArgs& args);

struct ExperimentArgs {
  std::string dataset_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;  // at least 2
  TrainConfig base_config;           // use_e2/use_e3 are driven per variant
  int split_folds = 6;
  int split_fold = 0;
  int bins = 20;
};

/// Per-variant results of the ablation experiment. Mid-band is the mean
/// frame recognition rate over thresholds {0.3..0.7}; mid-bin similarity is
/// the count-weighted mean over expressive classes in bins 8..14 of 20.
struct ExperimentSummary {
  std::vector<std::string> variants;  // "e1", "e1e2", "e1e2e3"
  std::map<std::string, std::vector<double>> midband_rate_per_seed;
  std::map<std::string, std::vector<double>> midbin_similarity_per_seed;
  std::map<std::string, double> midband_rate_mean;
  std::map<std::string, double> midbin_similarity_mean;
};

ExperimentSummary run_experiment(const ExperimentArgs& args, std::ostream* out = nullptr);

}  // namespace otf

#endif
