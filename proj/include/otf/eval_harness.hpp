#ifndef OTF_EVAL_HARNESS_HPP
#define OTF_EVAL_HARNESS_HPP

#include <map>
#include <vector>

#include "otf/intensity.hpp"
#include "otf/lstm_net.hpp"
#include "otf/synth_data.hpp"

namespace otf {

/// Threshold-derived per-frame labels: frame t gets the sequence's class
/// when its estimated intensity is strictly above theta, otherwise neutral
/// (class 0). Neutral-class sequences are neutral throughout. Monotone in
/// theta: raising it never flips a neutral frame to expressive.
std::vector<int> frame_labels(const IntensityTrace& trace, int class_id, double theta);

struct RatePoint {
  double theta = 0.0;
  double rate = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Frame-level recognition at one threshold. Every frame of every test
/// sequence is predicted from the prefix ending at that frame (one forward
/// pass per sequence; the recurrence is causal so per-frame logits equal
/// per-prefix evaluation) and compared against frame_labels.
RatePoint recognition_rate_at(double theta, const LstmParameters& params,
                              const Dataset& test_set);

std::vector<double> default_theta_grid();  // 0.0, 0.1, ..., 1.0

std::vector<RatePoint> threshold_curve(const LstmParameters& params,
                                       const Dataset& test_set,
                                       const std::vector<double>& grid);

struct SimilarityBin {
  double t_center = 0.0;  // center of the normalized-time bin
  double mean = 0.0;      // mean cosine similarity, 0 when count == 0
  std::size_t count = 0;
};

/// Per class: cosine similarity between each frame's hidden feature and the
/// last frame's, on a normalized time axis split into `bins` bins, averaged
/// over all sequences of that class.
std::map<int, std::vector<SimilarityBin>> similarity_curve(const LstmParameters& params,
                                                           const Dataset& test_set,
                                                           int bins = 20);

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Full-sequence prediction vs sequence label.
AccuracyResult sequence_accuracy(const LstmParameters& params, const Dataset& test_set);

struct EvalReport {
  AccuracyResult seq_accuracy;
  std::vector<RatePoint> curve;
  std::map<int, std::vector<SimilarityBin>> similarity;
};

EvalReport evaluate(const LstmParameters& params, const Dataset& test_set,
                    const std::vector<double>& theta_grid, int bins = 20);

}  // namespace otf

#endif
