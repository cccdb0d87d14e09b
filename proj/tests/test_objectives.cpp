#include <cmath>

#include "doctest.h"
#include "otf/objectives.hpp"

using namespace otf;

TEST_CASE("cross entropy values") {
  Vec y(7, 0.0);
  y[2] = 1.0;
  Vec perfect(7, 0.0);
  perfect[2] = 1.0;
  CHECK(loss_e1(perfect, y) == 0.0);

  const Vec uniform(7, 1.0 / 7.0);
  CHECK(loss_e1(uniform, y) == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  Vec half(7, 0.5 / 6.0);
  half[2] = 0.5;
  CHECK(loss_e1(half, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(loss_e1(Vec(3, 0.3), Vec(4, 0.0)), ConfigError);

  // the floor keeps a zero-probability true class finite
  Vec zeroed(2, 0.0);
  zeroed[0] = 1.0;
  Vec ytrue(2, 0.0);
  ytrue[1] = 1.0;
  CHECK(std::isfinite(loss_e1(zeroed, ytrue)));
}

TEST_CASE("cross entropy logit gradient") {
  const Vec yhat{0.3, 0.7};
  const Vec y{1.0, 0.0};
  const Vec g = grad_e1_logits(yhat, y);
  CHECK(g[0] == doctest::Approx(-0.7));
  CHECK(g[1] == doctest::Approx(0.7));

  Vec same{0.0, 1.0};
  const Vec zero = grad_e1_logits(same, same);
  CHECK(zero == Vec{0.0, 0.0});

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Vec z(5);
    for (double& v : z) v = rng.next_uniform(-3, 3);
    const Vec p = softmax(z);
    Vec onehot(5, 0.0);
    onehot[rng.next_below(5)] = 1.0;
    const Vec grad = grad_e1_logits(p, onehot);
    double sum = 0.0;
    for (double v : grad) sum += v;
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("intensity loss values") {
  IntensityTrace label;
  label.values = {0.0, 1.0};
  CHECK(loss_e2({0.0, 1.0}, label) == 0.0);
  CHECK(loss_e2({1.0, 0.0}, label) == doctest::Approx(1.0));

  IntensityTrace zero;
  zero.values = {0.0};
  CHECK(loss_e2({0.5}, zero) == doctest::Approx(0.125));
  CHECK_THROWS_AS(loss_e2({0.5, 0.5}, zero), ConfigError);
}

TEST_CASE("intensity gradient, exact and literal form") {
  IntensityTrace label;
  label.values = {0.0, 1.0};
  const Vec g = grad_e2_intensity({1.0, 0.0}, label);
  CHECK(g == Vec{1.0, -1.0});
  CHECK(grad_e2_intensity({0.0, 1.0}, label) == Vec{0.0, 0.0});

  // literal form scales by sigmoid(beta * e2), e2 = squared trace error
  const double beta = 2.0;
  const double e2 = 2.0;  // (1-0)^2 + (0-1)^2
  const Vec lit = grad_e2_intensity_literal({1.0, 0.0}, label, beta);
  const double factor = sigmoid(beta * e2);
  CHECK(lit[0] == doctest::Approx(factor * 1.0).epsilon(1e-14));
  CHECK(lit[1] == doctest::Approx(factor * -1.0).epsilon(1e-14));
}

namespace {

PerceivedClusterModel toy_model(std::size_t dim, std::size_t n_frames, double radius) {
  PerceivedClusterModel model;
  model.neutral_mean = Vec(dim, 0.0);
  model.class_means[1] = Vec(dim, 1.0);
  model.radii[1] = radius;
  for (std::size_t t = 0; t < n_frames; ++t) {
    model.assignments[{0, t}] = Perceived::Expression;
  }
  return model;
}

}  // namespace

TEST_CASE("cluster loss at the centers and at the boundary") {
  const std::size_t dim = 3;
  const std::size_t n = 4;
  PerceivedClusterModel model = toy_model(dim, n, 1.0);

  // every feature exactly at m_c with d_c = 1: each term is g(-1)
  std::vector<E3Item> at_center;
  for (std::size_t t = 0; t < n; ++t) {
    at_center.push_back(E3Item{0, t, 1, Vec(dim, 1.0)});
  }
  const double beta = 10.0;
  const double per_term = softplus_g(-1.0, beta);
  CHECK(per_term == doctest::Approx(std::log1p(std::exp(-10.0)) / 10.0).epsilon(1e-12));
  CHECK(per_term == doctest::Approx(4.54e-6).epsilon(1e-2));
  CHECK(loss_e3(at_center, model, beta) ==
        doctest::Approx(static_cast<double>(n) * per_term / 2.0).epsilon(1e-12));

  // feature at distance exactly d_c: term is g(0) = ln 2, halved
  PerceivedClusterModel unit = toy_model(1, 1, 1.0);
  unit.class_means[1] = Vec{0.0};
  const std::vector<E3Item> boundary{E3Item{0, 0, 1, Vec{1.0}}};
  CHECK(loss_e3(boundary, unit, 1.0) ==
        doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));

  CHECK(loss_e3({}, model, beta) == 0.0);
}

TEST_CASE("cluster gradient saturation and zero displacement") {
  const std::size_t dim = 2;
  PerceivedClusterModel model = toy_model(dim, 2, 2.0);

  const std::vector<E3Item> at_mean{E3Item{0, 0, 1, Vec(dim, 1.0)}};
  const std::vector<Vec> g0 = grad_e3_features(at_mean, model, 10.0);
  CHECK(g0[0] == Vec{0.0, 0.0});

  // deep inside the radius with a sharp beta the pull vanishes
  const std::vector<E3Item> inside{E3Item{0, 1, 1, Vec{1.1, 1.0}}};
  const std::vector<Vec> g1 = grad_e3_features(inside, model, 100.0);
  CHECK(std::abs(g1[0][0]) < 1e-10);

  // unknown class
  const std::vector<E3Item> missing{E3Item{0, 0, 9, Vec(dim, 0.0)}};
  PerceivedClusterModel with_assignment = model;
  with_assignment.assignments[{0, 0}] = Perceived::Expression;
  CHECK_THROWS_AS(loss_e3(missing, with_assignment, 10.0), ConfigError);
  // unknown frame
  const std::vector<E3Item> unknown{E3Item{42, 7, 1, Vec(dim, 0.0)}};
  CHECK_THROWS_AS(loss_e3(unknown, model, 10.0), ConfigError);
}

TEST_CASE("perceived-neutral items pull toward the pooled neutral mean") {
  PerceivedClusterModel model = toy_model(2, 1, 1.0);
  model.assignments[{0, 0}] = Perceived::Neutral;
  const Vec f{0.4, -0.2};
  const std::vector<E3Item> items{E3Item{0, 0, 1, f}};
  const std::vector<Vec> g = grad_e3_features(items, model, 10.0);
  // direction is f - m_0 = f
  const double e3 = dot(f, f) - 1.0;
  const double gp = softplus_g_prime(e3, 10.0);
  CHECK(g[0][0] == doctest::Approx(gp * f[0]).epsilon(1e-14));
  CHECK(g[0][1] == doctest::Approx(gp * f[1]).epsilon(1e-14));

  // a neutral-class frame uses radius 0
  PerceivedClusterModel m2 = toy_model(2, 1, 1.0);
  m2.assignments[{3, 0}] = Perceived::Neutral;
  const std::vector<E3Item> neutral_item{E3Item{3, 0, 0, f}};
  const double expect = softplus_g(dot(f, f), 5.0) / 2.0;
  CHECK(loss_e3(neutral_item, m2, 5.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("generic grad_check sanity on a quadratic") {
  // loss = 0.5 * |x - c|^2, gradient x - c
  const Vec c{1.0, -2.0, 0.5};
  const auto loss = [&](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += (x[i] - c[i]) * (x[i] - c[i]);
    return 0.5 * s;
  };
  const Vec x{0.3, 0.4, -0.9};
  Vec grad(3);
  for (std::size_t i = 0; i < 3; ++i) grad[i] = x[i] - c[i];
  CHECK(grad_check(loss, x, grad, 1e-5) < 1e-10);

  // a wrong gradient is caught
  Vec off = grad;
  off[1] += 0.1;
  CHECK(grad_check(loss, x, off, 1e-5) > 1e-2);

  CHECK_THROWS_AS(grad_check(loss, x, grad, 1e-1), ConfigError);
  CHECK_THROWS_AS(grad_check(loss, x, grad, 1e-8), ConfigError);

  const auto bad = [](const Vec&) { return std::nan(""); };
  CHECK_THROWS_AS(grad_check(bad, x, grad, 1e-5), NumericError);
}

TEST_CASE("network gradients per term pass the checker") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    GradCheckCase gc;
    gc.seed = seed;

    gc.objectives = ObjectiveConfig{true, false, false, 1.0, 10.0, false};
    CHECK(lstm_grad_check(gc) < 1e-4);

    gc.objectives = ObjectiveConfig{false, true, false, 1.0, 10.0, false};
    CHECK(lstm_grad_check(gc) < 1e-4);

    gc.objectives = ObjectiveConfig{false, false, true, 1.0, 10.0, false};
    CHECK(lstm_grad_check(gc) < 1e-4);

    gc.objectives = ObjectiveConfig{true, true, false, 1.0, 10.0, false};
    CHECK(lstm_grad_check(gc) < 1e-4);
  }
}

TEST_CASE("cluster gradient is beta robust") {
  GradCheckCase gc;
  gc.objectives = ObjectiveConfig{false, false, true, 1.0, 1.0, false};
  CHECK(lstm_grad_check(gc) < 1e-4);
  gc.objectives.beta = 100.0;
  CHECK(lstm_grad_check(gc) < 1e-4);
}

TEST_CASE("all three terms summed still match finite differences") {
  GradCheckCase gc;
  gc.objectives = ObjectiveConfig{true, true, true, 0.7, 10.0, false};
  gc.seed = 17;
  CHECK(lstm_grad_check(gc) < 1e-4);
}

TEST_CASE("literal-form intensity gradient fails finite differences") {
  // with a soft sharpness the per-sequence factor sits well below 1
  GradCheckCase gc;
  gc.objectives = ObjectiveConfig{false, true, false, 1.0, 1.0, true};
  CHECK(lstm_grad_check(gc) > 1e-2);

  gc.objectives.literal_eq5 = false;
  CHECK(lstm_grad_check(gc) < 1e-4);
}

TEST_CASE("combined gradient is bitwise the sum of term gradients") {
  const LstmDims dims{3, 4, 3};
  const LstmParameters params = init_params(dims, 55);
  Rng rng(56);
  std::vector<Vec> frames(6, Vec(3));
  for (Vec& f : frames) {
    for (double& x : f) x = rng.next_double();
  }
  const ForwardTrace trace = forward(params, frames);
  Vec onehot(3, 0.0);
  onehot[1] = 1.0;
  IntensityTrace label;
  label.values = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};

  const ObjectiveConfig both{true, true, false, 1.0, 10.0, false};
  const ObjectiveConfig only_e1{true, false, false, 1.0, 10.0, false};
  const ObjectiveConfig only_e2{false, true, false, 1.0, 10.0, false};

  const Vec combined =
      evaluate_gradients(params, trace, onehot, label, nullptr, 0, 1, both).flatten();
  ParamGrads sum =
      evaluate_gradients(params, trace, onehot, label, nullptr, 0, 1, only_e1);
  add_scaled(sum, evaluate_gradients(params, trace, onehot, label, nullptr, 0, 1, only_e2),
             1.0);
  CHECK(combined == sum.flatten());
}

TEST_CASE("loss breakdown totals respect the active terms") {
  const LstmDims dims{3, 4, 3};
  const LstmParameters params = init_params(dims, 90);
  Rng rng(91);
  std::vector<Vec> frames(5, Vec(3));
  for (Vec& f : frames) {
    for (double& x : f) x = rng.next_double();
  }
  const ForwardTrace trace = forward(params, frames);
  Vec onehot(3, 0.0);
  onehot[2] = 1.0;
  IntensityTrace label;
  label.values = {0.0, 0.25, 0.5, 0.75, 1.0};

  const ObjectiveConfig cfg{true, true, false, 1.0, 10.0, false};
  const LossBreakdown lb =
      evaluate_losses(trace, onehot, label, nullptr, 0, 2, cfg);
  CHECK(lb.e1 >= 0.0);
  CHECK(lb.e2 >= 0.0);
  CHECK(lb.e3 == 0.0);
  CHECK(lb.total == doctest::Approx(lb.e1 + lb.e2).epsilon(1e-15));
}
