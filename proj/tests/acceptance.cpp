// Acceptance suite: every release gate runs here, one line per criterion.
// Exit code 0 only when all of them hold.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "otf/commands.hpp"
#include "otf/eval_harness.hpp"
#include "otf/intensity.hpp"
#include "otf/objectives.hpp"
#include "otf/trainer.hpp"

using namespace otf;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("otfseq_acceptance_" + std::to_string(static_cast<unsigned>(::time(nullptr))));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

// Shared between the two trend criteria; the experiment runs once.
ExperimentSummary g_trend_summary;
bool g_trend_ran = false;

bool ensure_trend_runs(std::string& detail) {
  if (g_trend_ran) return true;
  const fs::path dir = work_dir();

  GenConfig gen;  // default dataset shape
  gen.seed = 1;
  const Dataset ds = generate(gen);
  const std::string ds_path = (dir / "trend_dataset.json").string();
  save_dataset(ds, ds_path);

  ExperimentArgs args;
  args.dataset_path = ds_path;
  args.out_dir = (dir / "trend").string();
  args.seeds = {1, 2, 3, 4, 5};
  args.base_config.epochs = 50;
  args.base_config.base_lr = 0.1;
  args.base_config.batch_size = 4;
  args.base_config.hidden_dim = 16;
  args.base_config.seed = 1;
  args.split_folds = 6;
  args.split_fold = 0;
  g_trend_summary = run_experiment(args);
  g_trend_ran = true;
  (void)detail;
  return true;
}

// --- criteria ---

bool gradient_fidelity(std::string& detail) {
  double worst = 0.0;
  const auto run_term = [&](ObjectiveConfig cfg) {
    double term_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      GradCheckCase gc;
      gc.objectives = cfg;
      gc.dims = LstmDims{3, 4, 3};
      gc.num_frames = 5;
      gc.epsilon = 1e-5;
      gc.seed = seed;
      term_worst = std::max(term_worst, lstm_grad_check(gc));
    }
    return term_worst;
  };
  const double e1 = run_term(ObjectiveConfig{true, false, false, 1.0, 10.0, false});
  const double e2 = run_term(ObjectiveConfig{false, true, false, 1.0, 10.0, false});
  const double e3 = run_term(ObjectiveConfig{false, false, true, 1.0, 10.0, false});
  const double joint = run_term(ObjectiveConfig{true, true, false, 1.0, 10.0, false});
  worst = std::max({e1, e2, e3, joint});
  std::ostringstream os;
  os << "max rel err: E1 " << e1 << ", E2 " << e2 << ", E3 " << e3 << ", E1+E2 "
     << joint;
  detail = os.str();
  return worst < 1e-4;
}

bool intensity_estimator(std::string& detail) {
  GenConfig gen;
  gen.noise_stddev = 0.0;
  gen.subject_offset_stddev = 0.0;
  gen.seed = 4;
  const Dataset ds = generate(gen);
  std::size_t checked = 0;
  for (const FeatureSequence& seq : ds.sequences) {
    const IntensityTrace trace = estimate_trace(seq);
    if (seq.class_id == 0) {
      for (double v : trace.values) {
        if (v != 0.0) {
          detail = "neutral trace not identically zero";
          return false;
        }
      }
      continue;
    }
    if (trace.values[seq.apex_index] != 1.0) {
      detail = "trace at apex differs from 1";
      return false;
    }
    double lo = 1.0;
    for (double v : trace.values) lo = std::min(lo, v);
    if (lo != 0.0) {
      detail = "trace minimum differs from 0";
      return false;
    }
    for (std::size_t t = 1; t < trace.values.size(); ++t) {
      if (trace.values[t] < trace.values[t - 1]) {
        detail = "trace not monotone nondecreasing";
        return false;
      }
    }
    ++checked;
  }
  detail = std::to_string(checked) + " noise-free sequences exact";
  return true;
}

bool causality_streaming(std::string& detail) {
  const LstmDims dims{8, 12, 4};
  Rng rng(99);
  std::size_t frames_checked = 0;
  for (int s = 0; s < 100; ++s) {
    const LstmParameters params = init_params(dims, derive_seed(7, s));
    const std::size_t len = 5 + rng.next_below(12);
    std::vector<Vec> frames(len, Vec(dims.input_dim));
    for (Vec& f : frames) {
      for (double& x : f) x = rng.next_double();
    }
    const ForwardTrace full = forward(params, frames);

    // streaming one frame at a time with retained state
    LstmState state = initial_state(dims);
    for (std::size_t t = 0; t < len; ++t) {
      const FrameState fs = step(params, state, frames[t]);
      if (!(fs.hidden == full.frames[t].hidden) || !(fs.cell == full.frames[t].cell)) {
        detail = "streaming state differs from full pass";
        return false;
      }
    }
    // prefix re-evaluation, bitwise
    for (std::size_t cut = 1; cut <= len; ++cut) {
      const std::vector<Vec> prefix(frames.begin(), frames.begin() + cut);
      const ForwardTrace part = forward(params, prefix);
      if (!(part.frames.back().hidden == full.frames[cut - 1].hidden)) {
        detail = "prefix hidden state differs from full pass";
        return false;
      }
      ++frames_checked;
    }
  }
  detail = std::to_string(frames_checked) + " prefixes bitwise equal";
  return true;
}

bool kmeans_oracle(std::string& detail) {
  double worst_gap = 0.0;
  Rng meta(3);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 4 + meta.next_below(9);  // 4..12
    const std::size_t dim = 1 + meta.next_below(3);
    Rng rng(derive_seed(1000, instance));
    std::vector<Vec> points;
    for (std::size_t i = 0; i < n; ++i) {
      const double center = i % 2 == 0 ? -3.0 : 3.0;
      Vec p(dim);
      for (double& x : p) x = center + rng.next_normal(0.0, 0.4);
      points.push_back(std::move(p));
    }
    const KmeansResult r = kmeans2(points, derive_seed(2000, instance));
    const double best = otf_tests::optimal_two_partition_wcss(points);
    worst_gap = std::max(worst_gap, std::abs(r.wcss - best));
  }
  std::ostringstream os;
  os << "50 instances, worst wcss gap " << worst_gap;
  detail = os.str();
  return worst_gap <= 1e-9;
}

bool learnability(std::string& detail) {
  GenConfig gen;  // defaults: 4 classes incl. neutral, D=8, 12 subjects
  gen.seed = 1;
  const Dataset ds = generate(gen);
  const auto folds = split_subject_independent(ds, 12, 1);  // LOSO

  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.base_lr = 0.1;
  cfg.batch_size = 4;
  cfg.hidden_dim = 16;
  cfg.use_e3 = false;  // classification + intensity only
  cfg.seed = 1;

  const TrainResult result = train(folds[0].first, cfg, &folds[0].second);
  double final_acc = 0.0;
  for (auto it = result.log.rows.rbegin(); it != result.log.rows.rend(); ++it) {
    if (it->holdout_accuracy) {
      final_acc = *it->holdout_accuracy;
      break;
    }
  }
  std::ostringstream os;
  os << "held-out sequence accuracy " << final_acc << " after " << cfg.epochs
     << " epochs (LOSO fold 0)";
  detail = os.str();
  return final_acc >= 0.90;
}

bool fig4_trend(std::string& detail) {
  if (!ensure_trend_runs(detail)) return false;
  const double e1 = g_trend_summary.midband_rate_mean.at("e1");
  const double e1e2 = g_trend_summary.midband_rate_mean.at("e1e2");
  const double e1e2e3 = g_trend_summary.midband_rate_mean.at("e1e2e3");
  std::ostringstream os;
  os << "mid-band rate means over 5 seeds: E1 " << e1 << ", E1+E2 " << e1e2
     << ", E1+E2+E3 " << e1e2e3;
  detail = os.str();
  return e1e2e3 > e1 && e1e2 >= e1;
}

bool fig5_trend(std::string& detail) {
  if (!ensure_trend_runs(detail)) return false;
  const double e1 = g_trend_summary.midbin_similarity_mean.at("e1");
  const double e1e2e3 = g_trend_summary.midbin_similarity_mean.at("e1e2e3");
  std::ostringstream os;
  os << "mid-bin similarity means over 5 seeds: E1 " << e1 << ", E1+E2+E3 "
     << e1e2e3;
  detail = os.str();
  return e1e2e3 > e1;
}

bool determinism(std::string& detail) {
  const fs::path dir = work_dir();
  GenConfig gen;
  gen.subjects_count = 4;
  gen.sequences_per_subject_per_class = 2;
  gen.seed = 8;
  const Dataset ds = generate(gen);
  const std::string ds_path = (dir / "det_dataset.json").string();
  save_dataset(ds, ds_path);

  TrainArgs args;
  args.dataset_path = ds_path;
  args.config.epochs = 5;
  args.config.base_lr = 0.1;
  args.config.batch_size = 4;
  args.config.hidden_dim = 8;
  args.config.use_e3 = true;
  args.config.seed = 3;

  args.out_dir = (dir / "det_a").string();
  const TrainOutcome a = run_train(args);
  args.out_dir = (dir / "det_b").string();
  const TrainOutcome b = run_train(args);

  const std::string bytes_a = read_text_file(a.checkpoint_path);
  const std::string bytes_b = read_text_file(b.checkpoint_path);
  detail = "two train runs, checkpoint bytes " +
           std::string(bytes_a == bytes_b ? "identical" : "differ");
  return bytes_a == bytes_b;
}

bool eq5_erratum_probe(std::string& detail) {
  GradcheckArgs args;
  args.num_seeds = 10;
  args.beta = 1.0;  // soft sharpness makes the per-sequence factor visible
  args.literal_eq5 = true;
  const GradcheckReport report = run_gradcheck(args);
  std::ostringstream os;
  os << "corrected E2 err " << report.e2_max << " (< 1e-4), literal deviation "
     << report.literal_e2_max << " (> 1e-2)";
  detail = os.str();
  return report.e2_max < 1e-4 && report.literal_e2_max > 1e-2;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"gradient-fidelity", gradient_fidelity},
      {"intensity-estimator", intensity_estimator},
      {"causality-streaming", causality_streaming},
      {"kmeans-oracle-equivalence", kmeans_oracle},
      {"learnability", learnability},
      {"fig4-threshold-trend", fig4_trend},
      {"fig5-similarity-trend", fig5_trend},
      {"determinism", determinism},
      {"eq5-erratum-probe", eq5_erratum_probe},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %-28s %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }

  fs::remove_all(work_dir());
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
