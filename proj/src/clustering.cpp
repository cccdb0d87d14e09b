#include "otf/clustering.hpp"

#include <cmath>
#include <string>

namespace otf {

namespace {

Vec mean_of(const std::vector<const Vec*>& members) {
  Vec m(members.front()->size(), 0.0);
  for (const Vec* v : members) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += (*v)[i];
  }
  for (double& x : m) x /= static_cast<double>(members.size());
  return m;
}

double wcss_of(const std::vector<Vec>& points, const std::vector<int>& labels,
               const std::array<Vec, 2>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    s += squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
  }
  return s;
}

}  // namespace

KmeansResult kmeans2(const std::vector<Vec>& points, std::uint64_t seed,
                     int max_iterations) {
  if (points.size() < 2) throw ConfigError("kmeans2: need at least 2 points");
  if (max_iterations < 1) throw ConfigError("kmeans2: max_iterations must be >= 1");

  Rng rng(seed);
  std::array<Vec, 2> centroids;

  // k-means++ seeding: second centroid drawn proportional to squared
  // distance from the first, which keeps it off duplicate points.
  centroids[0] = points[rng.next_below(points.size())];
  Vec d2(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    d2[i] = squared_distance(points[i], centroids[0]);
    total += d2[i];
  }
  if (total == 0.0) throw NumericError("kmeans2: all points identical");
  double u = rng.next_double() * total;
  std::size_t pick = points.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    cum += d2[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  centroids[1] = points[pick];

  std::vector<int> labels(points.size(), 0);
  int iterations = 0;
  for (; iterations < max_iterations; ++iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double da = squared_distance(points[i], centroids[0]);
      const double db = squared_distance(points[i], centroids[1]);
      const int label = db < da ? 1 : 0;  // tie goes to cluster 0
      if (label != labels[i]) {
        labels[i] = label;
        changed = true;
      }
    }
    if (!changed && iterations > 0) break;  // centroids already match members

    std::vector<const Vec*> members[2];
    for (std::size_t i = 0; i < points.size(); ++i) {
      members[labels[i]].push_back(&points[i]);
    }
    // A drained cluster takes the point farthest from the survivor.
    for (int k = 0; k < 2; ++k) {
      if (!members[k].empty()) continue;
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(1 - k)]);
        if (d > best) {
          best = d;
          far = i;
        }
      }
      labels[far] = k;
      changed = true;
      members[k].push_back(&points[far]);
      members[1 - k].clear();
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] == 1 - k) members[1 - k].push_back(&points[i]);
      }
    }
    centroids[0] = mean_of(members[0]);
    centroids[1] = mean_of(members[1]);
    if (!changed) break;
  }

  KmeansResult result;
  result.labels = std::move(labels);
  result.centroids = std::move(centroids);
  result.iterations = iterations;
  result.wcss = wcss_of(points, result.labels, result.centroids);
  return result;
}

Perceived PerceivedClusterModel::assignment_of(std::size_t sequence_key,
                                               std::size_t frame_index) const {
  const auto it = assignments.find({sequence_key, frame_index});
  if (it == assignments.end())
    throw ConfigError("cluster model: no assignment for requested frame");
  return it->second;
}

PerceivedClusterModel build_model(const std::vector<FrameFeature>& frames,
                                  std::uint64_t seed) {
  if (frames.empty()) throw ConfigError("build_model: no frames");

  // Group expressive frames by class, in input order.
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].class_id != 0) by_class[frames[i].class_id].push_back(i);
  }

  PerceivedClusterModel model;
  std::vector<const Vec*> neutral_pool;

  for (const auto& [cls, indices] : by_class) {
    if (indices.size() < 2)
      throw ConfigError("build_model: class " + std::to_string(cls) +
                        " has fewer than 2 frames");
    std::vector<Vec> points;
    points.reserve(indices.size());
    for (std::size_t i : indices) points.push_back(frames[i].feature);

    KmeansResult km;
    try {
      km = kmeans2(points, derive_seed(seed, static_cast<std::uint64_t>(cls)));
    } catch (const NumericError&) {
      throw NumericError("build_model: class " + std::to_string(cls) +
                         " has identical features");
    }

    // The cluster whose members sit at lower estimated intensity is the
    // perceived-neutral one.
    double mean_int[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t j = 0; j < indices.size(); ++j) {
      mean_int[km.labels[j]] += frames[indices[j]].intensity;
      ++count[km.labels[j]];
    }
    for (int k = 0; k < 2; ++k) {
      if (count[k] == 0) throw NumericError("build_model: empty cluster");
      mean_int[k] /= static_cast<double>(count[k]);
    }
    const int neutral_cluster = mean_int[0] <= mean_int[1] ? 0 : 1;

    model.class_means[cls] = km.centroids[static_cast<std::size_t>(1 - neutral_cluster)];
    model.expression_counts[cls] = 0;
    model.neutral_counts[cls] = 0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const FrameFeature& f = frames[indices[j]];
      const bool is_neutral = km.labels[j] == neutral_cluster;
      model.assignments[{f.sequence_key, f.frame_index}] =
          is_neutral ? Perceived::Neutral : Perceived::Expression;
      ++(is_neutral ? model.neutral_counts[cls] : model.expression_counts[cls]);
    }
  }

  // Pool m_0 from perceived-neutral expressive frames plus every frame of
  // neutral-class sequences.
  for (const FrameFeature& f : frames) {
    if (f.class_id == 0) {
      model.assignments[{f.sequence_key, f.frame_index}] = Perceived::Neutral;
      neutral_pool.push_back(&f.feature);
    } else if (model.assignments.at({f.sequence_key, f.frame_index}) == Perceived::Neutral) {
      neutral_pool.push_back(&f.feature);
    }
  }
  if (neutral_pool.empty())
    throw NumericError("build_model: no perceived-neutral frames to pool");
  model.neutral_mean = mean_of(neutral_pool);

  for (const auto& [cls, mean] : model.class_means) {
    model.radii[cls] = std::sqrt(squared_distance(mean, model.neutral_mean)) / 2.0;
  }
  return model;
}

}  // namespace otf
