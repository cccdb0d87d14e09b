#ifndef OTF_INTENSITY_HPP
#define OTF_INTENSITY_HPP

#include "otf/core_math.hpp"
#include "otf/synth_data.hpp"

namespace otf {

/// Per-frame estimated expression intensity in [0,1], one value per frame of
/// the source sequence. Non-neutral traces reach exactly 1 at the apex frame
/// and exactly 0 at their minimum; neutral-class traces are identically 0.
struct IntensityTrace {
  Vec values;
};

/// cos(a,b) = a.b / (|a||b|). Throws NumericError when either norm is zero.
double cosine_similarity(const Vec& a, const Vec& b);

/// Cosine similarity of every frame against the apex frame, then min-max
/// normalized. Raw similarities enter the normalization as-is (negatives are
/// not clipped). Neutral-class sequences get an all-zero trace. Throws
/// NumericError when a non-neutral sequence has constant similarity
/// (degenerate: min == max).
IntensityTrace estimate_trace(const FeatureSequence& seq);

}  // namespace otf

#endif
