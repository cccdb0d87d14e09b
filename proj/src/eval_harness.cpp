#include "otf/eval_harness.hpp"

#include <algorithm>
#include <cmath>

namespace otf {

std::vector<int> frame_labels(const IntensityTrace& trace, int class_id, double theta) {
  if (theta < 0.0 || theta > 1.0) throw ConfigError("frame_labels: theta out of [0,1]");
  std::vector<int> labels(trace.values.size(), 0);
  if (class_id == 0) return labels;
  for (std::size_t t = 0; t < trace.values.size(); ++t) {
    if (trace.values[t] > theta) labels[t] = class_id;
  }
  return labels;
}

namespace {

int argmax_class(const Vec& logits) {
  int best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

RatePoint recognition_rate_at(double theta, const LstmParameters& params,
                              const Dataset& test_set) {
  if (test_set.sequences.empty())
    throw ConfigError("recognition_rate_at: empty test set");
  RatePoint point;
  point.theta = theta;
  for (const FeatureSequence& seq : test_set.sequences) {
    const IntensityTrace trace = estimate_trace(seq);
    const std::vector<int> labels = frame_labels(trace, seq.class_id, theta);
    const ForwardTrace fwd = forward(params, seq.frames);
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
      const int predicted = argmax_class(fwd.frames[t].logits);
      if (predicted == labels[t]) ++point.correct;
      ++point.total;
    }
  }
  point.rate = static_cast<double>(point.correct) / static_cast<double>(point.total);
  return point;
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

std::vector<RatePoint> threshold_curve(const LstmParameters& params,
                                       const Dataset& test_set,
                                       const std::vector<double>& grid) {
  std::vector<RatePoint> curve;
  curve.reserve(grid.size());
  for (double theta : grid) {
    curve.push_back(recognition_rate_at(theta, params, test_set));
  }
  return curve;
}

std::map<int, std::vector<SimilarityBin>> similarity_curve(const LstmParameters& params,
                                                           const Dataset& test_set,
                                                           int bins) {
  if (bins < 1) throw ConfigError("similarity_curve: bins must be >= 1");
  if (test_set.sequences.empty())
    throw ConfigError("similarity_curve: empty test set");

  struct Accum {
    std::vector<double> sum;
    std::vector<std::size_t> count;
  };
  std::map<int, Accum> per_class;

  for (const FeatureSequence& seq : test_set.sequences) {
    Accum& acc = per_class[seq.class_id];
    if (acc.sum.empty()) {
      acc.sum.assign(static_cast<std::size_t>(bins), 0.0);
      acc.count.assign(static_cast<std::size_t>(bins), 0);
    }
    const ForwardTrace fwd = forward(params, seq.frames);
    const Vec& last_hidden = fwd.frames.back().hidden;
    const std::size_t n = seq.frames.size();
    for (std::size_t t = 0; t < n; ++t) {
      const double tau =
          n == 1 ? 1.0 : static_cast<double>(t) / static_cast<double>(n - 1);
      const std::size_t bin = std::min(static_cast<std::size_t>(tau * bins),
                                       static_cast<std::size_t>(bins - 1));
      acc.sum[bin] += cosine_similarity(fwd.frames[t].hidden, last_hidden);
      acc.count[bin] += 1;
    }
  }

  std::map<int, std::vector<SimilarityBin>> curves;
  for (const auto& [cls, acc] : per_class) {
    std::vector<SimilarityBin> curve(static_cast<std::size_t>(bins));
    for (std::size_t b = 0; b < curve.size(); ++b) {
      curve[b].t_center = (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
      curve[b].count = acc.count[b];
      curve[b].mean = acc.count[b] > 0
                          ? acc.sum[b] / static_cast<double>(acc.count[b])
                          : 0.0;
    }
    curves[cls] = std::move(curve);
  }
  return curves;
}

AccuracyResult sequence_accuracy(const LstmParameters& params, const Dataset& test_set) {
  if (test_set.sequences.empty())
    throw ConfigError("sequence_accuracy: empty test set");
  AccuracyResult res;
  for (const FeatureSequence& seq : test_set.sequences) {
    const PartialPrediction pred = predict_partial(params, seq.frames);
    if (pred.class_id == seq.class_id) ++res.correct;
    ++res.total;
  }
  res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.total);
  return res;
}

EvalReport evaluate(const LstmParameters& params, const Dataset& test_set,
                    const std::vector<double>& theta_grid, int bins) {
  EvalReport report;
  report.seq_accuracy = sequence_accuracy(params, test_set);
  report.curve = threshold_curve(params, test_set, theta_grid);
  report.similarity = similarity_curve(params, test_set, bins);
  return report;
}

}  // namespace otf
