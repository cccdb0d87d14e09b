#include "otf/intensity.hpp"

#include <algorithm>

namespace otf {

double cosine_similarity(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw ConfigError("cosine_similarity: dimension mismatch");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0)
    throw NumericError("cosine_similarity: zero-norm input");
  return dot(a, b) / (na * nb);
}

IntensityTrace estimate_trace(const FeatureSequence& seq) {
  if (seq.frames.empty()) throw ConfigError("estimate_trace: empty sequence");
  if (seq.apex_index >= seq.frames.size())
    throw ConfigError("estimate_trace: apex_index out of range");

  IntensityTrace trace;
  if (seq.class_id == 0) {
    trace.values.assign(seq.frames.size(), 0.0);
    return trace;
  }

  const Vec& apex = seq.frames[seq.apex_index];
  Vec raw(seq.frames.size());
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    raw[t] = cosine_similarity(seq.frames[t], apex);
  }
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo)
    throw NumericError("estimate_trace: constant similarity in non-neutral sequence");

  trace.values.resize(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    trace.values[t] = (raw[t] - lo) / (hi - lo);
  }
  return trace;
}

}  // namespace otf
