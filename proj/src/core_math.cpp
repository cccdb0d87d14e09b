#include "otf/core_math.hpp"

#include <cmath>
#include <cstdlib>

namespace otf {

bool operator==(const Mat& a, const Mat& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec softmax(const Vec& z) {
  if (z.empty()) throw ConfigError("softmax: empty input");
  double m = z[0];
  for (double v : z) m = v > m ? v : m;
  Vec out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double softplus_g(double omega, double beta) {
  if (!(beta > 0.0)) throw ConfigError("softplus_g: beta must be > 0");
  const double bw = beta * omega;
  // log(1+e^x) = max(0,x) + log1p(e^{-|x|})
  if (bw > 0.0) {
    return omega + std::log1p(std::exp(-bw)) / beta;
  }
  return std::log1p(std::exp(bw)) / beta;
}

double softplus_g_prime(double omega, double beta) {
  if (!(beta > 0.0)) throw ConfigError("softplus_g_prime: beta must be > 0");
  return sigmoid(beta * omega);
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    const double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Vec matvec_transposed(const Mat& a, const Vec& x) {
  Vec y(a.cols, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) y[c] += row[c] * x[r];
  }
  return y;
}

void add_outer(Mat& a, const Vec& u, const Vec& v, double scale) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double ur = scale * u[r];
    double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) row[c] += ur * v[c];
  }
}

Vec hadamard(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double l2_norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double squared_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(Vec& y, double alpha, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double Rng::next_normal(double mean, double stddev) {
  // u1 in (0,1] keeps the log finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  return mean + stddev * r * std::cos(theta);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw ConfigError("Rng::next_below: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

namespace {
std::uint64_t splitmix_fold(std::uint64_t h, std::uint64_t w) {
  h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  std::uint64_t z = h;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = seed;
  h = splitmix_fold(h, a);
  h = splitmix_fold(h, b);
  h = splitmix_fold(h, c);
  return h;
}

}  // namespace otf
