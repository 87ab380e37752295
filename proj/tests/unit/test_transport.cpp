#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dnar/transport.hpp"
#include "support.hpp"

using namespace dnar;
using namespace dnar::transport;

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Minimum over all permutations of the mean cost f(|x_i - y_p(i)|).
template <class F>
double brute_force(const DiscreteMeasure& a, const DiscreteMeasure& b, F f) {
  std::vector<std::size_t> p(a.size());
  std::iota(p.begin(), p.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += f(dist(a.point(i), b.point(p[i])));
    best = std::min(best, s / static_cast<double>(p.size()));
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

DiscreteMeasure random_uniform(std::mt19937_64& rng, int n, int d, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  for (auto& z : pts) z = g(rng);
  return DiscreteMeasure::uniform(d, pts);
}

DiscreteMeasure random_weighted(std::mt19937_64& rng, int n, int d, double scale) {
  auto mu = random_uniform(rng, n, d, scale);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double s = 0.0;
  for (auto& w : mu.weights) s += (w = u(rng));
  for (auto& w : mu.weights) w /= s;
  return mu;
}

// W_p^p on the line through the quantile functions.
double quantile_cost(const DiscreteMeasure& a, const DiscreteMeasure& b, double p) {
  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<std::pair<double, double>> v;
    for (std::size_t i = 0; i < m.size(); ++i) v.emplace_back(m.points[i], m.weights[i]);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto x = sorted(a), y = sorted(b);
  std::size_t i = 0, j = 0;
  double ca = x[0].second, cb = y[0].second, level = 0.0, s = 0.0;
  while (i < x.size() && j < y.size()) {
    const double next = std::min(ca, cb);
    s += (next - level) * std::pow(std::abs(x[i].first - y[j].first), p);
    level = next;
    if (ca <= next + 1e-15 && ++i < x.size()) ca += x[i].second;
    if (cb <= next + 1e-15 && ++j < y.size()) cb += y[j].second;
  }
  return s;
}

FiberedMeasure two_fibers(const std::vector<double>& x0, const std::vector<double>& x1, double m0 = 0.4,
                          double w0 = -1.0, double w1 = 2.0) {
  FiberedMeasure f;
  f.fibers.push_back({{w0}, m0, DiscreteMeasure::uniform(1, x0)});
  f.fibers.push_back({{w1}, 1.0 - m0, DiscreteMeasure::uniform(1, x1)});
  return f;
}

}  // namespace

TEST_CASE("w2, w1 and dbl equal the permutation brute force") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 6, d = 1 + trial % 3;
    const auto a = random_uniform(rng, n, d, 1.5), b = random_uniform(rng, n, d, 1.5);
    const double w2c = brute_force(a, b, [](double r) { return r * r; });
    CHECK(w2(a, b).squared == doctest::Approx(w2c).epsilon(1e-12));
    CHECK(w1(a, b).distance == doctest::Approx(brute_force(a, b, [](double r) { return r; })).epsilon(1e-12));
    CHECK(dbl(a, b) ==
          doctest::Approx(brute_force(a, b, [](double r) { return std::min(r, 2.0); })).epsilon(1e-12));
  }
}

TEST_CASE("one-dimensional weighted distances match the quantile formula") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_weighted(rng, 2 + trial % 7, 1, 1.0), b = random_weighted(rng, 1 + trial % 5, 1, 1.0);
    CHECK(w2(a, b).squared == doctest::Approx(quantile_cost(a, b, 2.0)).epsilon(1e-10));
    CHECK(w1(a, b).distance == doctest::Approx(quantile_cost(a, b, 1.0)).epsilon(1e-10));
  }
}

TEST_CASE("general transport: plan marginals and certificate") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_weighted(rng, 5, 2, 1.0), b = random_weighted(rng, 7, 2, 1.0);
    const auto r = w2(a, b);
    const auto rows = r.transport.plan.row_sums(a.size());
    const auto cols = r.transport.plan.col_sums(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(rows[i] == doctest::Approx(a.weights[i]).epsilon(1e-12));
    for (std::size_t j = 0; j < b.size(); ++j) CHECK(cols[j] == doctest::Approx(b.weights[j]).epsilon(1e-12));
    double plan_cost = 0.0;
    for (const auto& e : r.transport.plan.entries) {
      CHECK(e.mass >= 0.0);
      plan_cost += e.mass * std::pow(dist(a.point(e.row), b.point(e.col)), 2);
    }
    CHECK(plan_cost == doctest::Approx(r.squared).epsilon(1e-10));
    const auto& c = r.transport.certificate;
    REQUIRE(c.available);
    CHECK(std::abs(c.gap()) <= 1e-9);
    CHECK(c.max_dual_violation <= 1e-9);
  }
}

TEST_CASE("dbl agrees with the dual LP and sits below w1 and w2") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_weighted(rng, 1 + trial % 6, 2, 2.0), b = random_weighted(rng, 1 + trial % 4, 2, 2.0);
    const double d = dbl(a, b);
    CHECK(d == doctest::Approx(dbl_lp(a, b)).epsilon(1e-8));
    CHECK(d <= w1(a, b).distance + 1e-9);
    CHECK(w1(a, b).distance <= w2(a, b).distance + 1e-9);
    CHECK(d <= 2.0 + 1e-12);
  }
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_weighted(rng, 3, 2, 1.0), b = random_weighted(rng, 4, 2, 1.0),
               c = random_weighted(rng, 2, 2, 1.0);
    CHECK(w2(a, a).distance <= 1e-9);
    CHECK(w2(a, b).distance == doctest::Approx(w2(b, a).distance).epsilon(1e-10));
    CHECK(w2(a, c).distance <= w2(a, b).distance + w2(b, c).distance + 1e-9);
    CHECK(w1(a, c).distance <= w1(a, b).distance + w1(b, c).distance + 1e-9);
    CHECK(dbl(a, c) <= dbl(a, b) + dbl(b, c) + 1e-9);
  }
}

TEST_CASE("Dirac masses") {
  const auto a = DiscreteMeasure::dirac({0.0, 0.0}), b = DiscreteMeasure::dirac({3.0, 4.0});
  CHECK(w2(a, b).distance == doctest::Approx(5.0));
  CHECK(w1(a, b).distance == doctest::Approx(5.0));
  CHECK(dbl(a, b) == doctest::Approx(2.0));
  CHECK(w1(a, b, 1.0).distance == doctest::Approx(1.0));
}

TEST_CASE("fibered distance") {
  const auto a = two_fibers({0.0, 1.0}, {2.0});
  const auto b = two_fibers({0.5, 1.5}, {4.0});
  // 0.4 * 0.25 + 0.6 * 4
  CHECK(fibered_w2(a, b) == doctest::Approx(std::sqrt(0.4 * 0.25 + 0.6 * 4.0)));
  CHECK(adapted_w2(a, b) <= fibered_w2(a, b) + 1e-12);
  CHECK(fibered_w2(a, a) == 0.0);

  SUBCASE("mismatched marginals") {
    const auto c = two_fibers({0.5, 1.5}, {4.0}, 0.5);
    CHECK(code_of([&] { fibered_w2(a, c); }) == ErrorCode::MarginalMismatch);
    CHECK(std::isfinite(adapted_w2(a, c)));
    const auto e = two_fibers({0.5, 1.5}, {4.0}, 0.4, -1.0, 3.0);
    CHECK(code_of([&] { fibered_w2(a, e); }) == ErrorCode::MarginalMismatch);
  }
  SUBCASE("adapted distance of shifted omegas") {
    // Same conditionals, omegas shifted by 1: the diagonal pairing costs
    // exactly |delta omega|^2 = 1.
    const auto c = two_fibers({0.0, 1.0}, {2.0}, 0.4, 0.0, 3.0);
    CHECK(adapted_w2(a, c) == doctest::Approx(1.0));
  }
}

TEST_CASE("empirical measures and moments") {
  particle::Ensemble e(1, 4);
  e.x = {0.0, 1.0, 1.0, 2.0};
  e.omega = {1.0, -1.0, 1.0, 1.0};
  const auto pos = empirical_positions(e);
  CHECK(pos.size() == 4);
  CHECK(pos.weights[0] == 0.25);
  const auto fib = empirical_fibered(e);
  REQUIRE(fib.fibers.size() == 2);
  double total = 0.0;
  for (const auto& f : fib.fibers) total += f.mass;
  CHECK(total == doctest::Approx(1.0));

  const auto m = moments(fib);
  REQUIRE(m.rho.size() == 3);
  CHECK(m.rho.weights[1] == doctest::Approx(0.5));
  // At x = 1 the omegas are +-1 with mass 1/4 each: mean 0, Pi = 1/2.
  CHECK(m.momentum[1] == doctest::Approx(0.0));
  CHECK(m.pressure[1] == doctest::Approx(0.5));
  CHECK(m.pressure[0] == 0.0);
  CHECK(m.max_abs_pressure() == doctest::Approx(0.5));
  CHECK(m.total_momentum()[0] == doctest::Approx(0.5));

  const auto phase = empirical_phase(e);
  CHECK(phase.dim == 2);
  CHECK(phase.point(1)[1] == -1.0);
}

TEST_CASE("pushforward, merging and grid measures") {
  const auto mu = DiscreteMeasure::uniform(1, {0.0, 1.0, 1.0, 3.0});
  const auto merged = merge_duplicates(mu);
  CHECK(merged.size() == 3);
  CHECK(merged.weights[1] == doctest::Approx(0.5));
  const auto img = pushforward(mu, 2, [](std::span<const double> p, std::span<double> o) {
    o[0] = p[0];
    o[1] = p[0] * p[0];
  });
  CHECK(img.point(3)[1] == 9.0);
  // Translating by h moves every distance by exactly h.
  const auto shifted = pushforward(mu, 1, [](std::span<const double> p, std::span<double> o) { o[0] = p[0] + 0.3; });
  CHECK(w2(mu, shifted).distance == doctest::Approx(0.3));

  hydro::GridField1D g{2.0, {0.0, 1.0, 3.0, 0.0}, {0, 0, 0, 0}, 0.0};
  const auto gm = grid_to_measure(g);
  REQUIRE(gm.size() == 2);
  CHECK(gm.points[0] == doctest::Approx(0.75));
  CHECK(gm.weights[1] == doctest::Approx(0.75));
  g.rho = {0, 0, 0, 0};
  CHECK(code_of([&] { grid_to_measure(g); }) == ErrorCode::NonNormalizable);
}

TEST_CASE("coarsening bounds the distance change") {
  std::mt19937_64 rng(6);
  const auto mu = random_weighted(rng, 500, 1, 1.0);
  const auto c = coarsen_1d(mu, 40);
  CHECK(c.measure.size() <= 40);
  CHECK(std::accumulate(c.measure.weights.begin(), c.measure.weights.end(), 0.0) == doctest::Approx(1.0));
  CHECK(w1(mu, c.measure).distance <= c.error_bound + 1e-12);
  CHECK(dbl(mu, c.measure) <= c.error_bound + 1e-12);
  CHECK(coarsen_1d(mu, 1000).error_bound == 0.0);
}

TEST_CASE("measure validation") {
  DiscreteMeasure m{1, {0.0, 1.0}, {0.5, 0.6}};
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidArgument);
  m.weights = {1.0, 0.0};
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidArgument);
  m.weights = {0.5, 0.5};
  m.points[1] = NAN;
  CHECK_THROWS(m.validate());
  const auto a = DiscreteMeasure::uniform(1, {0.0}), b = DiscreteMeasure::uniform(2, {0.0, 0.0});
  CHECK(code_of([&] { w2(a, b); }) == ErrorCode::DimensionMismatch);
}
