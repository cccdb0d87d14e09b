#include "otf/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otf {

namespace {

// Substream tags; keep stable, they define the generated bytes.
constexpr std::uint64_t kTagPrototypes = 1;
constexpr std::uint64_t kTagSubject = 2;
constexpr std::uint64_t kTagSequence = 3;

constexpr double kProtoLo = 0.2;
constexpr double kProtoHi = 0.8;
// Subject offsets are clamped to this band so a noise-free ramp stays inside
// [0,1] and is never bent by the final clamp.
constexpr double kOffsetCap = 0.15;

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace

bool operator==(const FeatureSequence& a, const FeatureSequence& b) {
  return a.class_id == b.class_id && a.subject_id == b.subject_id &&
         a.apex_index == b.apex_index && a.frames == b.frames;
}

bool operator==(const GenConfig& a, const GenConfig& b) {
  return a.num_classes == b.num_classes && a.feature_dim == b.feature_dim &&
         a.subjects_count == b.subjects_count &&
         a.sequences_per_subject_per_class == b.sequences_per_subject_per_class &&
         a.min_length == b.min_length && a.max_length == b.max_length &&
         a.noise_stddev == b.noise_stddev &&
         a.subject_offset_stddev == b.subject_offset_stddev && a.seed == b.seed;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.config == b.config && a.sequences == b.sequences;
}

void GenConfig::validate() const {
  if (num_classes < 2) throw ConfigError("gen config: num_classes must be >= 2");
  if (feature_dim < 2) throw ConfigError("gen config: feature_dim must be >= 2");
  if (subjects_count < 1) throw ConfigError("gen config: subjects_count must be >= 1");
  if (sequences_per_subject_per_class < 1)
    throw ConfigError("gen config: sequences_per_subject_per_class must be >= 1");
  if (min_length < 4) throw ConfigError("gen config: min_length must be >= 4");
  if (max_length < min_length)
    throw ConfigError("gen config: max_length must be >= min_length");
  if (noise_stddev < 0.0) throw ConfigError("gen config: noise_stddev must be >= 0");
  if (subject_offset_stddev < 0.0)
    throw ConfigError("gen config: subject_offset_stddev must be >= 0");
}

std::vector<Vec> draw_prototypes(const GenConfig& config) {
  config.validate();
  const std::size_t dim = static_cast<std::size_t>(config.feature_dim);
  const double min_dist = 0.15 * std::sqrt(static_cast<double>(dim));
  Rng rng(derive_seed(config.seed, kTagPrototypes));

  std::vector<Vec> protos;
  protos.reserve(static_cast<std::size_t>(config.num_classes));
  for (int c = 0; c < config.num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      Vec p(dim);
      for (double& x : p) x = rng.next_uniform(kProtoLo, kProtoHi);
      placed = true;
      for (const Vec& q : protos) {
        if (std::sqrt(squared_distance(p, q)) < min_dist) {
          placed = false;
          break;
        }
      }
      if (placed) protos.push_back(std::move(p));
    }
    if (!placed)
      throw ConfigError("draw_prototypes: could not place prototype for class " +
                        std::to_string(c) + " after 100 attempts");
  }
  return protos;
}

namespace {

FeatureSequence generate_sequence(const GenConfig& config, const std::vector<Vec>& protos,
                                  const Vec& subject_offset, int subject, int cls,
                                  int index) {
  Rng rng(derive_seed(config.seed, kTagSequence,
                      static_cast<std::uint64_t>(subject) * 0x10000ULL +
                          static_cast<std::uint64_t>(cls),
                      static_cast<std::uint64_t>(index)));

  const std::size_t len =
      static_cast<std::size_t>(config.min_length) +
      static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(config.max_length - config.min_length + 1)));
  const std::size_t max_onset = static_cast<std::size_t>(0.3 * static_cast<double>(len));
  const std::size_t onset = static_cast<std::size_t>(rng.next_below(max_onset + 1));

  const Vec& p0 = protos[0];
  const Vec& pc = protos[static_cast<std::size_t>(cls)];
  const std::size_t dim = p0.size();

  FeatureSequence seq;
  seq.class_id = cls;
  seq.subject_id = subject;
  seq.apex_index = len - 1;
  seq.frames.reserve(len);

  for (std::size_t t = 0; t < len; ++t) {
    double s = 0.0;
    if (cls != 0 && t > onset) {
      s = static_cast<double>(t - onset) / static_cast<double>(len - 1 - onset);
    }
    Vec frame(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double noise =
          config.noise_stddev > 0.0 ? rng.next_normal(0.0, config.noise_stddev) : 0.0;
      frame[d] = clamp01(p0[d] + s * (pc[d] - p0[d]) + subject_offset[d] + noise);
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace

Dataset generate(const GenConfig& config) {
  config.validate();
  const std::vector<Vec> protos = draw_prototypes(config);
  const std::size_t dim = static_cast<std::size_t>(config.feature_dim);

  Dataset ds;
  ds.config = config;
  ds.sequences.reserve(static_cast<std::size_t>(config.subjects_count) *
                       static_cast<std::size_t>(config.num_classes) *
                       static_cast<std::size_t>(config.sequences_per_subject_per_class));

  for (int subject = 0; subject < config.subjects_count; ++subject) {
    Vec offset(dim, 0.0);
    Rng subject_rng(derive_seed(config.seed, kTagSubject, static_cast<std::uint64_t>(subject)));
    for (double& x : offset) {
      const double u = config.subject_offset_stddev > 0.0
                           ? subject_rng.next_normal(0.0, config.subject_offset_stddev)
                           : 0.0;
      x = std::clamp(u, -kOffsetCap, kOffsetCap);
    }
    for (int cls = 0; cls < config.num_classes; ++cls) {
      for (int k = 0; k < config.sequences_per_subject_per_class; ++k) {
        ds.sequences.push_back(generate_sequence(config, protos, offset, subject, cls, k));
      }
    }
  }
  return ds;
}

std::pair<FeatureSequence, FeatureSequence> temporal_augment(const FeatureSequence& seq) {
  if (seq.frames.size() < 4)
    throw ConfigError("temporal_augment: sequence must have at least 4 frames");
  FeatureSequence even, odd;
  even.class_id = odd.class_id = seq.class_id;
  even.subject_id = odd.subject_id = seq.subject_id;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    (t % 2 == 0 ? even : odd).frames.push_back(seq.frames[t]);
  }
  even.apex_index = even.frames.size() - 1;
  odd.apex_index = odd.frames.size() - 1;
  return {std::move(even), std::move(odd)};
}

std::vector<std::pair<Dataset, Dataset>> split_subject_independent(const Dataset& ds,
                                                                   int folds,
                                                                   std::uint64_t seed) {
  if (folds < 1) throw ConfigError("split: folds must be >= 1");
  if (folds > ds.config.subjects_count)
    throw ConfigError("split: folds exceeds subject count");

  std::vector<int> subjects(static_cast<std::size_t>(ds.config.subjects_count));
  for (std::size_t i = 0; i < subjects.size(); ++i) subjects[i] = static_cast<int>(i);
  Rng rng(derive_seed(seed, 0x5b1f7));
  rng.shuffle(subjects);

  std::vector<std::vector<int>> groups(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    groups[i % static_cast<std::size_t>(folds)].push_back(subjects[i]);
  }

  std::vector<std::pair<Dataset, Dataset>> out;
  out.reserve(static_cast<std::size_t>(folds));
  for (const auto& test_subjects : groups) {
    Dataset train, test;
    train.config = test.config = ds.config;
    for (const FeatureSequence& seq : ds.sequences) {
      const bool in_test = std::find(test_subjects.begin(), test_subjects.end(),
                                     seq.subject_id) != test_subjects.end();
      (in_test ? test : train).sequences.push_back(seq);
    }
    out.emplace_back(std::move(train), std::move(test));
  }
  return out;
}

}  // namespace otf
