#ifndef OTF_SYNTH_DATA_HPP
#define OTF_SYNTH_DATA_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "otf/core_math.hpp"

namespace otf {

/// One labeled sequence of per-frame feature vectors. Class 0 is the neutral
/// class; non-neutral sequences ramp from a shared neutral prototype to their
/// class prototype, so the apex (peak) frame is always the last one.
struct FeatureSequence {
  std::vector<Vec> frames;  // each of dim D, entries in [0,1]
  int class_id = 0;
  int subject_id = 0;
  std::size_t apex_index = 0;
};

bool operator==(const FeatureSequence& a, const FeatureSequence& b);

struct GenConfig {
  int num_classes = 4;  // including neutral (class 0)
  int feature_dim = 8;
  int subjects_count = 12;
  int sequences_per_subject_per_class = 3;
  int min_length = 10;
  int max_length = 20;
  double noise_stddev = 0.05;
  double subject_offset_stddev = 0.05;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

bool operator==(const GenConfig& a, const GenConfig& b);

struct Dataset {
  GenConfig config;
  std::vector<FeatureSequence> sequences;
};

bool operator==(const Dataset& a, const Dataset& b);

/// Prototype vectors, index 0 = neutral, index c = class c. Drawn uniformly
/// on [0.2, 0.8]^D with a minimum pairwise distance of 0.15*sqrt(D) enforced
/// by rejection (100 retries per prototype, then ConfigError). Deterministic
/// by config seed; generate() uses exactly these.
std::vector<Vec> draw_prototypes(const GenConfig& config);

/// Generate the full dataset. Non-neutral sequence frames follow
///   clamp_[0,1](p_0 + s(t) * (p_c - p_0) + u_subject + noise)
/// where s is a linear ramp from 0 to 1 after a per-sequence random onset
/// delay; neutral sequences keep s = 0 throughout. Every sequence draws from
/// its own substream of the config seed, so the output is identical whether
/// sequences are produced serially or in parallel.
Dataset generate(const GenConfig& config);

/// Even-index and odd-index frame subsequences (in that order), labels and
/// subject preserved, apex remapped to the new last frame. Requires at least
/// 4 frames.
std::pair<FeatureSequence, FeatureSequence> temporal_augment(const FeatureSequence& seq);

/// Subject-independent folds: subjects are shuffled by `seed` and dealt into
/// `folds` groups; fold i tests on group i and trains on the rest. No
/// subject_id ever appears on both sides of a partition.
std::vector<std::pair<Dataset, Dataset>> split_subject_independent(const Dataset& ds,
                                                                   int folds,
                                                                   std::uint64_t seed);

}  // namespace otf

#endif
