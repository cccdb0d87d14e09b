#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otf/commands.hpp"

namespace {

// exit codes: 0 ok, 1 check failed, 2 config error, 3 numeric error, 4 io error
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct TrainFlagSet {
  CLI::Option* epochs = nullptr;
  CLI::Option* lr = nullptr;
  CLI::Option* batch = nullptr;
  CLI::Option* hidden = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* e3_weight = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* momentum = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otfseq: streaming sequence classifier with intensity-regularized "
               "recurrent training, synthetic data generation and evaluation"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled dataset (JSON)");
  std::string gen_config_path, gen_out;
  otf::GenConfig gc_flags;
  gen->add_option("--config", gen_config_path, "GenConfig JSON file (omit for defaults)");
  gen->add_option("--out", gen_out, "Output dataset path")->required();
  auto* g_classes = gen->add_option("--num-classes", gc_flags.num_classes,
                                    "Classes including neutral");
  auto* g_dim = gen->add_option("--feature-dim", gc_flags.feature_dim, "Feature dimension");
  auto* g_subjects = gen->add_option("--subjects", gc_flags.subjects_count, "Subjects");
  auto* g_per = gen->add_option("--sequences-per", gc_flags.sequences_per_subject_per_class,
                                "Sequences per subject per class");
  auto* g_min = gen->add_option("--min-length", gc_flags.min_length, "Shortest sequence");
  auto* g_max = gen->add_option("--max-length", gc_flags.max_length, "Longest sequence");
  auto* g_noise = gen->add_option("--noise-stddev", gc_flags.noise_stddev,
                                  "Per-frame Gaussian noise");
  auto* g_offset = gen->add_option("--subject-offset-stddev", gc_flags.subject_offset_stddev,
                                   "Per-subject feature offset spread");
  auto* gen_seed_opt = gen->add_option("--seed", gc_flags.seed, "Override the config seed");

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset file");
  std::string train_dataset, train_config_path, train_out, train_resume;
  otf::TrainConfig tc;
  int split_folds = 0, split_fold = 0, checkpoint_every = 0;
  std::uint64_t split_seed = 0;
  bool no_e2 = false, no_e3 = false, literal_eq5 = false, augment = false,
       dump_clusters = false;
  TrainFlagSet tf;
  train_cmd->add_option("--dataset", train_dataset, "Dataset JSON")->required();
  train_cmd->add_option("--config", train_config_path, "TrainConfig JSON (flags override)");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  tf.epochs = train_cmd->add_option("--epochs", tc.epochs, "Training epochs");
  tf.lr = train_cmd->add_option("--lr", tc.base_lr, "Base learning rate (/10 every 10 epochs)");
  tf.batch = train_cmd->add_option("--batch-size", tc.batch_size, "Sequences per minibatch");
  tf.hidden = train_cmd->add_option("--hidden-dim", tc.hidden_dim, "LSTM hidden size");
  tf.beta = train_cmd->add_option("--beta", tc.beta, "Softplus sharpness of the cluster term");
  tf.e3_weight = train_cmd->add_option("--e3-weight", tc.e3_weight, "Cluster term weight");
  tf.seed = train_cmd->add_option("--seed", tc.seed, "Run seed");
  tf.momentum = train_cmd->add_option("--momentum", tc.momentum, "Momentum (0 = plain GD)");
  train_cmd->add_flag("--no-e2", no_e2, "Drop the intensity term (classification only)");
  train_cmd->add_flag("--no-e3", no_e3, "Skip the cluster phase");
  train_cmd->add_flag("--literal-eq5", literal_eq5,
                      "Use the literal-form intensity gradient (compatibility probe)");
  train_cmd->add_flag("--augment", augment, "Add even/odd-frame temporal variants");
  train_cmd->add_flag("--dump-clusters", dump_clusters,
                      "Write the final perceived-cluster model as JSON");
  train_cmd->add_option("--split-folds", split_folds,
                        "Subject-independent folds (0 = train on everything)");
  train_cmd->add_option("--split-fold", split_fold, "Which fold is held out");
  auto* split_seed_opt =
      train_cmd->add_option("--split-seed", split_seed, "Seed for the subject split");
  train_cmd->add_option("--resume", train_resume, "Continue from this checkpoint");
  train_cmd->add_option("--checkpoint-every", checkpoint_every,
                        "Also snapshot every N epochs");

  // --- gradcheck ---
  auto* gc = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against central finite differences");
  otf::GradcheckArgs gargs;
  std::vector<std::size_t> sizes;
  gc->add_option("--seed", gargs.seed, "First fixture seed");
  gc->add_option("--seeds", gargs.num_seeds, "Number of random fixtures per term");
  gc->add_option("--sizes", sizes, "Net sizes: D H Nc Nf")->expected(4);
  gc->add_option("--epsilon", gargs.epsilon, "Finite-difference step");
  gc->add_option("--beta", gargs.beta, "Softplus sharpness");
  gc->add_flag("--literal-eq5", gargs.literal_eq5,
               "Also measure how far the literal-form intensity gradient deviates");

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  otf::EvalArgs eargs;
  ev->add_option("--checkpoint", eargs.checkpoint_path, "Checkpoint JSON")->required();
  ev->add_option("--dataset", eargs.dataset_path, "Dataset JSON")->required();
  ev->add_option("--out", eargs.out_dir, "Output directory")->required();
  ev->add_option("--bins", eargs.bins, "Normalized-time bins for similarity curves");

  // --- experiment ---
  auto* ex = app.add_subcommand(
      "experiment", "Train the E1 / E1+E2 / E1+E2+E3 ablation over several seeds");
  otf::ExperimentArgs xargs;
  ex->add_option("--dataset", xargs.dataset_path, "Dataset JSON")->required();
  ex->add_option("--out", xargs.out_dir, "Output directory")->required();
  ex->add_option("--seeds", xargs.seeds, "Run seeds (at least 2)")->required();
  ex->add_option("--epochs", xargs.base_config.epochs, "Training epochs");
  ex->add_option("--lr", xargs.base_config.base_lr, "Base learning rate");
  ex->add_option("--batch-size", xargs.base_config.batch_size, "Sequences per minibatch");
  ex->add_option("--hidden-dim", xargs.base_config.hidden_dim, "LSTM hidden size");
  ex->add_option("--beta", xargs.base_config.beta, "Softplus sharpness");
  ex->add_option("--e3-weight", xargs.base_config.e3_weight, "Cluster term weight");
  ex->add_option("--momentum", xargs.base_config.momentum, "Momentum (0 = plain GD)");
  bool ex_augment = false;
  ex->add_flag("--augment", ex_augment, "Add even/odd-frame temporal variants");
  ex->add_option("--split-folds", xargs.split_folds, "Subject-independent folds");
  ex->add_option("--split-fold", xargs.split_fold, "Which fold is held out");
  ex->add_option("--bins", xargs.bins, "Similarity curve bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse message
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      otf::GenConfig config;
      if (!gen_config_path.empty()) config = otf::load_gen_config(gen_config_path);
      if (g_classes->count()) config.num_classes = gc_flags.num_classes;
      if (g_dim->count()) config.feature_dim = gc_flags.feature_dim;
      if (g_subjects->count()) config.subjects_count = gc_flags.subjects_count;
      if (g_per->count())
        config.sequences_per_subject_per_class = gc_flags.sequences_per_subject_per_class;
      if (g_min->count()) config.min_length = gc_flags.min_length;
      if (g_max->count()) config.max_length = gc_flags.max_length;
      if (g_noise->count()) config.noise_stddev = gc_flags.noise_stddev;
      if (g_offset->count()) config.subject_offset_stddev = gc_flags.subject_offset_stddev;
      if (gen_seed_opt->count()) config.seed = gc_flags.seed;
      otf::run_gen_with_config(config, gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (*train_cmd) {
      otf::TrainArgs args;
      // config file first, explicit flags on top
      otf::TrainConfig cfg;
      if (!train_config_path.empty()) cfg = otf::load_train_config(train_config_path);
      if (tf.epochs->count()) cfg.epochs = tc.epochs;
      if (tf.lr->count()) cfg.base_lr = tc.base_lr;
      if (tf.batch->count()) cfg.batch_size = tc.batch_size;
      if (tf.hidden->count()) cfg.hidden_dim = tc.hidden_dim;
      if (tf.beta->count()) cfg.beta = tc.beta;
      if (tf.e3_weight->count()) cfg.e3_weight = tc.e3_weight;
      if (tf.seed->count()) cfg.seed = tc.seed;
      if (tf.momentum->count()) cfg.momentum = tc.momentum;
      if (no_e2) cfg.use_e2 = false;
      if (no_e3) cfg.use_e3 = false;
      if (literal_eq5) cfg.literal_eq5 = true;
      if (augment) cfg.augment = true;
      args.config = cfg;
      args.dataset_path = train_dataset;
      args.out_dir = train_out;
      args.split_folds = split_folds;
      args.split_fold = split_fold;
      if (split_seed_opt->count() > 0) args.split_seed = split_seed;
      args.resume_path = train_resume;
      args.checkpoint_every = checkpoint_every;
      args.dump_clusters = dump_clusters;
      const otf::TrainOutcome outcome = otf::run_train(args);
      std::cout << "wrote " << outcome.checkpoint_path;
      if (outcome.final_holdout_accuracy)
        std::cout << "  holdout accuracy " << *outcome.final_holdout_accuracy;
      std::cout << "\n";
      return 0;
    }

    if (*gc) {
      if (!sizes.empty()) {
        gargs.dims = otf::LstmDims{sizes[0], sizes[1], sizes[2]};
        gargs.num_frames = sizes[3];
      }
      const otf::GradcheckReport report = otf::run_gradcheck(gargs, &std::cout);
      return report.pass ? 0 : kExitCheckFailed;
    }

    if (*ev) {
      const otf::EvalReport report = otf::run_eval(eargs);
      std::cout << "sequence accuracy " << report.seq_accuracy.accuracy << " ("
                << report.seq_accuracy.correct << "/" << report.seq_accuracy.total
                << ")\n";
      return 0;
    }

    if (*ex) {
      xargs.base_config.augment = ex_augment;
      const otf::ExperimentSummary summary = otf::run_experiment(xargs, &std::cout);
      for (const auto& v : summary.variants) {
        std::cout << v << ": midband rate " << summary.midband_rate_mean.at(v)
                  << ", mid-bin similarity " << summary.midbin_similarity_mean.at(v)
                  << "\n";
      }
      return 0;
    }
  } catch (const otf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const otf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const otf::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
