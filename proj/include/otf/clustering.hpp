#ifndef OTF_CLUSTERING_HPP
#define OTF_CLUSTERING_HPP

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "otf/core_math.hpp"

namespace otf {

struct KmeansResult {
  std::vector<int> labels;         // 0 or 1 per point
  std::array<Vec, 2> centroids;
  double wcss = 0.0;               // within-cluster sum of squared distances
  int iterations = 0;
};

/// Two-cluster Lloyd's algorithm with seeded k-means++ initialization.
/// Deterministic by seed: assignment ties go to the lower centroid index and
/// reductions run in input order. Iterates until assignments stabilize or
/// max_iterations. Throws NumericError when all points are identical.
KmeansResult kmeans2(const std::vector<Vec>& points, std::uint64_t seed,
                     int max_iterations = 100);

enum class Perceived { Neutral, Expression };

/// One frame's feature as seen by the cluster builder: where it came from
/// (sequence key + frame index), its sequence's class and estimated
/// intensity at that frame.
struct FrameFeature {
  std::size_t sequence_key = 0;
  std::size_t frame_index = 0;
  int class_id = 0;
  double intensity = 0.0;
  Vec feature;
};

/// Per-class perceived clusters: mean m_c of the perceived-expression
/// cluster for every expressive class, the pooled perceived-neutral mean
/// m_0, radii d_c = |m_c - m_0| / 2, and the frozen per-frame assignments.
struct PerceivedClusterModel {
  std::map<int, Vec> class_means;                                  // m_c
  Vec neutral_mean;                                                // m_0
  std::map<int, double> radii;                                     // d_c
  std::map<std::pair<std::size_t, std::size_t>, Perceived> assignments;
  std::map<int, std::size_t> expression_counts;  // per expressive class
  std::map<int, std::size_t> neutral_counts;

  bool has_class(int class_id) const { return class_means.count(class_id) != 0; }
  Perceived assignment_of(std::size_t sequence_key, std::size_t frame_index) const;
};

/// Cluster every expressive class's frame features into two groups; the
/// group with the lower mean estimated intensity becomes perceived-neutral.
/// m_0 pools perceived-neutral frames of all classes together with every
/// frame of neutral-class sequences. Neutral-class frames are always
/// assigned perceived-neutral. Throws NumericError for a class whose
/// features are all identical, ConfigError for an expressive class with
/// fewer than 2 frames.
PerceivedClusterModel build_model(const std::vector<FrameFeature>& frames,
                                  std::uint64_t seed);

}  // namespace otf

#endif
