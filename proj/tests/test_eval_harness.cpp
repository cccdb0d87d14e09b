#include <cmath>

#include "doctest.h"
#include "otf/eval_harness.hpp"
#include "otf/trainer.hpp"

using namespace otf;

namespace {

Dataset small_dataset(std::uint64_t seed = 9) {
  GenConfig c;
  c.num_classes = 3;
  c.feature_dim = 5;
  c.subjects_count = 3;
  c.sequences_per_subject_per_class = 2;
  c.min_length = 6;
  c.max_length = 12;
  c.noise_stddev = 0.02;
  c.subject_offset_stddev = 0.02;
  c.seed = seed;
  return generate(c);
}

}  // namespace

TEST_CASE("frame labels follow the strict threshold rule") {
  IntensityTrace trace;
  trace.values = {0.0, 0.3, 0.6, 1.0};
  CHECK(frame_labels(trace, 4, 0.5) == std::vector<int>{0, 0, 4, 4});
  // theta 0: everything strictly above zero turns expressive
  CHECK(frame_labels(trace, 4, 0.0) == std::vector<int>{0, 4, 4, 4});
  // theta 1: nothing exceeds 1 strictly
  CHECK(frame_labels(trace, 4, 1.0) == std::vector<int>{0, 0, 0, 0});
  // neutral sequences stay neutral whatever the trace says
  CHECK(frame_labels(trace, 0, 0.2) == std::vector<int>{0, 0, 0, 0});
  CHECK_THROWS_AS(frame_labels(trace, 1, 1.5), ConfigError);
}

TEST_CASE("frame labels are monotone in the threshold") {
  IntensityTrace trace;
  trace.values = {0.05, 0.2, 0.35, 0.5, 0.8, 0.95, 1.0};
  std::vector<int> prev = frame_labels(trace, 2, 0.0);
  for (double theta = 0.1; theta <= 1.0; theta += 0.1) {
    const std::vector<int> cur = frame_labels(trace, 2, theta);
    for (std::size_t t = 0; t < cur.size(); ++t) {
      if (prev[t] == 0) CHECK(cur[t] == 0);  // raising theta never adds expressive
    }
    prev = cur;
  }
}

TEST_CASE("a neutral-everywhere predictor is perfect at theta one") {
  const Dataset ds = small_dataset();
  const LstmParameters zero =
      zero_params(LstmDims{5, 4, 3});  // ties resolve to class 0 everywhere
  const RatePoint at_one = recognition_rate_at(1.0, zero, ds);
  CHECK(at_one.rate == 1.0);
  CHECK(at_one.correct == at_one.total);

  // at theta 0 it is right exactly on the frames labeled neutral
  const RatePoint at_zero = recognition_rate_at(0.0, zero, ds);
  std::size_t expected = 0, total = 0;
  for (const FeatureSequence& s : ds.sequences) {
    const IntensityTrace trace = estimate_trace(s);
    for (double v : trace.values) {
      if (s.class_id == 0 || v <= 0.0) ++expected;
      ++total;
    }
  }
  CHECK(at_zero.correct == expected);
  CHECK(at_zero.total == total);
  CHECK(at_zero.rate == doctest::Approx(static_cast<double>(expected) / total));
}

TEST_CASE("recognition rate agrees with a per-prefix brute force") {
  const Dataset ds = small_dataset(21);
  const LstmParameters params = init_params(LstmDims{5, 6, 3}, 77);
  const double theta = 0.4;
  const RatePoint fast = recognition_rate_at(theta, params, ds);

  std::size_t correct = 0, total = 0;
  for (const FeatureSequence& s : ds.sequences) {
    const IntensityTrace trace = estimate_trace(s);
    const std::vector<int> labels = frame_labels(trace, s.class_id, theta);
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
      const std::vector<Vec> prefix(s.frames.begin(), s.frames.begin() + t + 1);
      if (predict_partial(params, prefix).class_id == labels[t]) ++correct;
      ++total;
    }
  }
  CHECK(fast.correct == correct);
  CHECK(fast.total == total);
}

TEST_CASE("threshold curve covers the grid") {
  const Dataset ds = small_dataset();
  const LstmParameters params = init_params(LstmDims{5, 4, 3}, 5);
  const std::vector<double> grid = default_theta_grid();
  CHECK(grid.size() == 11);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  const auto curve = threshold_curve(params, ds, grid);
  CHECK(curve.size() == grid.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].theta == grid[i]);
    CHECK(curve[i].rate >= 0.0);
    CHECK(curve[i].rate <= 1.0);
    CHECK(curve[i].total > 0);
  }
}

TEST_CASE("similarity curves end at identity") {
  const Dataset ds = small_dataset();  // lengths <= 12, so the last bin is the apex alone
  const LstmParameters params = init_params(LstmDims{5, 6, 3}, 13);
  const auto curves = similarity_curve(params, ds, 20);
  CHECK(curves.size() == 3);
  for (const auto& [cls, curve] : curves) {
    CHECK(curve.size() == 20);
    CHECK(curve.back().count > 0);
    CHECK(curve.back().mean == doctest::Approx(1.0).epsilon(1e-12));
    std::size_t n = 0;
    for (const SimilarityBin& b : curve) n += b.count;
    CHECK(n > 0);
  }
}

TEST_CASE("sequence accuracy matches a hand count") {
  const Dataset ds = small_dataset(31);
  const LstmParameters params = init_params(LstmDims{5, 6, 3}, 99);
  const AccuracyResult acc = sequence_accuracy(params, ds);
  std::size_t correct = 0;
  for (const FeatureSequence& s : ds.sequences) {
    if (predict_partial(params, s.frames).class_id == s.class_id) ++correct;
  }
  CHECK(acc.correct == correct);
  CHECK(acc.total == ds.sequences.size());
  CHECK(acc.accuracy == doctest::Approx(static_cast<double>(correct) / acc.total));

  // the all-ties network predicts class 0 everywhere
  const LstmParameters zero = zero_params(LstmDims{5, 4, 3});
  const AccuracyResult zero_acc = sequence_accuracy(zero, ds);
  std::size_t neutral_count = 0;
  for (const FeatureSequence& s : ds.sequences) {
    if (s.class_id == 0) ++neutral_count;
  }
  CHECK(zero_acc.correct == neutral_count);
}

TEST_CASE("evaluation rejects empty inputs") {
  Dataset empty;
  const LstmParameters params = init_params(LstmDims{5, 4, 3}, 1);
  CHECK_THROWS_AS(sequence_accuracy(params, empty), ConfigError);
  CHECK_THROWS_AS(recognition_rate_at(0.5, params, empty), ConfigError);
  CHECK_THROWS_AS(similarity_curve(params, empty, 20), ConfigError);
}
