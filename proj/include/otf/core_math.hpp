#ifndef OTF_CORE_MATH_HPP
#define OTF_CORE_MATH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "otf/errors.hpp"

namespace otf {

using Vec = std::vector<double>;

/// Dense row-major matrix. Plain storage, no view tricks; every kernel in
/// this module runs sequential fixed-order loops so results are
/// bit-reproducible across runs.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
};

bool operator==(const Mat& a, const Mat& b);

// --- activations ---

/// Overflow-safe logistic function.
double sigmoid(double x);

/// sigmoid'(x) expressed through the already-computed sigmoid value s.
inline double sigmoid_prime_from_value(double s) { return s * (1.0 - s); }

/// Numerically stable softmax (max subtraction). Throws ConfigError on empty
/// input. Output entries are positive and sum to 1 within 1e-12.
Vec softmax(const Vec& z);

/// Smoothed hinge g(omega) = (1/beta) * log(1 + exp(beta*omega)), computed in
/// a branch-on-sign form so neither tail overflows. Throws ConfigError for
/// beta <= 0. Satisfies |g(omega) - max(0, omega)| <= ln(2)/beta.
double softplus_g(double omega, double beta);

/// g'(omega) = sigmoid(beta * omega).
double softplus_g_prime(double omega, double beta);

// --- vector/matrix kernels ---

double dot(const Vec& a, const Vec& b);
Vec matvec(const Mat& a, const Vec& x);             // a * x
Vec matvec_transposed(const Mat& a, const Vec& x);  // a^T * x
void add_outer(Mat& a, const Vec& u, const Vec& v, double scale = 1.0);  // a += scale * u v^T
Vec hadamard(const Vec& a, const Vec& b);
double l2_norm(const Vec& a);
double squared_distance(const Vec& a, const Vec& b);
void axpy(Vec& y, double alpha, const Vec& x);  // y += alpha * x

bool all_finite(const Vec& v);

// --- deterministic RNG ---

/// splitmix64 generator. State update per draw:
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB;  return z ^ (z >> 31)
/// The same seed yields the same stream on every platform. Not shared
/// between threads; derive substreams with derive_seed instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  double next_uniform(double lo, double hi);

  /// Box-Muller from two uniform draws; always consumes exactly two draws.
  double next_normal(double mean, double stddev);

  /// Uniform integer in [0, n). Rejection sampled, so unbiased.
  std::uint64_t next_below(std::uint64_t n);

  /// Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Fold (seed, a, b, c) into one 64-bit substream seed via repeated
/// splitmix64 finalization. Used to give every sequence / subject / epoch its
/// own independent deterministic stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace otf

#endif
