#include <doctest.h>

#include <cmath>
#include <functional>

#include "ncentre/symbolic.hpp"

using namespace ncentre;

namespace {

CentreConfig triangle() { return CentreConfig(2, {{Vec3(0, 0, 0), 1.0}, {Vec3(2, 0, 0), 1.0}, {Vec3(0.8, 1.7, 0), 1.0}}); }
CentreConfig pair() { return CentreConfig(2, {{Vec3(-1, 0, 0), 1.0}, {Vec3(1, 0, 0), 1.0}}); }

// Brute force over all n^m words.
std::uint64_t brute_count(int n, int m) {
  std::uint64_t count = 0;
  Word w(m, 1);
  std::function<void(int)> rec = [&](int i) {
    if (i == m) {
      bool ok = true;
      for (int j = 0; j < m; ++j) ok = ok && w[j] != w[(j + 1) % m];
      count += ok;
      return;
    }
    for (int a = 1; a <= n; ++a) {
      w[i] = a;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

// Largest distance from a guess state to the orbit, position plus relative momentum.
double guess_distance(const CentreConfig& cfg, const Word& w, double E) {
  const auto o = find_periodic_orbit(cfg, w, E);
  const auto tr = integrate(cfg, o.initial_state(cfg), o.period, IntegratorSettings{});
  double worst = 0.0;
  for (const auto& g : polygon_guess(cfg, w, E)) {
    double best = INFINITY;
    for (const auto& y : tr.samples) best = std::min(best, (y.q - g.q).norm() + (y.p - g.p).norm() / g.p.norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("words") {
  CHECK(admissible({1, 2, 3}, 3));
  CHECK_FALSE(admissible({1, 2, 1}, 3));  // wraps to 1,1
  CHECK_FALSE(admissible({1, 4}, 3));
  CHECK_FALSE(admissible({1}, 3));
  CHECK(canonical_rotation({3, 1, 2}) == Word{1, 2, 3});
  CHECK_FALSE(primitive({1, 2, 1, 2}));
  CHECK(primitive({1, 2, 1, 3}));
  CHECK(to_string({1, 2, 3}) == "(1,2,3)");
}

TEST_CASE("symbol metric") {
  CHECK(symbol_metric({1, 2}, {1, 2}) == 0.0);
  CHECK(symbol_metric({1, 2}, {2, 1}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(symbol_metric_window({1, 2, 3, 1, 2}, {1, 2, 1, 1, 2}) == 1.0);
  CHECK(symbol_metric_window({1, 2, 3}, {2, 1, 2}) == 2.0);
  // Periodic words differing only at i = 0 cannot exist; with period 3 the
  // differences at 3j sum to 1 + 2 (1/8 + 1/64 + ...) = 9/7.
  CHECK(symbol_metric({1, 2, 3}, {2, 2, 3}) == doctest::Approx(9.0 / 7.0).epsilon(1e-15));
  CHECK(symbol_metric({1, 2}, {1, 2, 1, 2}) == 0.0);
  CHECK(symbol_metric({1, 2}, {2, 1}) == symbol_metric({2, 1}, {1, 2}));
}

TEST_CASE("periodic word counts") {
  CHECK(count_periodic_words(3, 2) == 6);
  CHECK(count_periodic_words(3, 3) == 6);
  CHECK(count_periodic_words(2, 3) == 0);
  for (int n = 2; n <= 5; ++n)
    for (int m = 1; m <= 8; ++m) CHECK(count_periodic_words(n, m) == brute_count(n, m));

  // Cyclic classes of length dividing m account for every periodic word.
  for (int n = 2; n <= 4; ++n)
    for (int m = 2; m <= 6; ++m) {
      std::uint64_t total = 0;
      for (int k = 2; k <= m; ++k)
        if (m % k == 0) total += k * cyclic_classes(n, k).size();
      CHECK(total == count_periodic_words(n, m));
    }
  CHECK(cyclic_classes(3, 2).size() == 3);
  CHECK(cyclic_classes(3, 3).size() == 2);
  CHECK(cyclic_classes(2, 3).empty());
}

TEST_CASE("polygon guess") {
  const auto cfg = triangle();
  const auto g = polygon_guess(cfg, {1, 2}, 10.0);
  REQUIRE(g.size() == 2);
  for (const auto& x : g) {
    CHECK(energy(cfg, x) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(std::abs(x.q.y()) < 1e-15);  // on the segment s_1 s_2
    CHECK(x.q.x() > 0.0);
    CHECK(x.q.x() < 2.0);
  }
  CHECK(g[0].p.x() > 0.0);
  CHECK(g[1].p.x() < 0.0);
  CHECK_THROWS_AS(polygon_guess(cfg, {1, 1}, 10.0), Error);

  // The realized orbit closes in on the polygon as E grows.
  const double a = guess_distance(cfg, {1, 2, 3}, 10.0);
  const double b = guess_distance(cfg, {1, 2, 3}, 20.0);
  const double c = guess_distance(cfg, {1, 2, 3}, 40.0);
  CHECK(b < a);
  CHECK(c < b);
}

TEST_CASE("two-centre bounce orbit") {
  const auto cfg = pair();
  const auto o = find_periodic_orbit(cfg, {1, 2}, 10.0);
  CHECK(o.residual < 1e-9);
  for (const auto& x : o.section_states) {
    CHECK(std::abs(x.q.y()) < 1e-9);
    CHECK(std::abs(x.p.y()) < 1e-7);
  }
  const auto h = hyperbolicity_report(o);
  CHECK(h.hyperbolic);
  CHECK(h.pairing_error < 1e-6);
  for (double u : h.unit_distances) CHECK(u < 1e-4);
}

TEST_CASE("three-centre orbits") {
  const auto cfg = triangle();
  const auto o = find_periodic_orbit(cfg, {1, 2, 3}, 10.0);
  CHECK(o.residual < 1e-9);
  REQUIRE(o.section_states.size() == 3);
  REQUIRE(o.multipliers.size() == 2);
  for (int i = 0; i < 3; ++i) {
    const auto& x = o.section_states[i];
    CHECK(nearest_centre(cfg, x.q) == i);
    const Vec3 r = x.q - cfg.centre(i).position;
    CHECK(std::abs(r.dot(x.p)) < 1e-8 * r.norm() * x.p.norm());
  }
  const auto h = hyperbolicity_report(o);
  CHECK(h.hyperbolic);
  CHECK(h.pairing_error < 1e-6);
  for (double u : h.unit_distances) CHECK(u < 1e-4);

  SUBCASE("closure") {
    const auto tr = integrate(cfg, o.initial_state(cfg), o.period, IntegratorSettings{});
    const PhaseState& end = tr.samples.back();
    CHECK((end.q - o.initial_state(cfg).q).norm() < 1e-7);
    CHECK((end.p - o.initial_state(cfg).p).norm() < 1e-6);
    CHECK(closure_residual(cfg, o, {2.5e-5, 1e-12}) < 1e-7);
  }
  SUBCASE("rotated word is the same orbit") {
    const auto r = find_periodic_orbit(cfg, {2, 3, 1}, 10.0);
    CHECK(r.period == doctest::Approx(o.period).epsilon(1e-9));
    CHECK(std::abs(r.multipliers[0]) == doctest::Approx(std::abs(o.multipliers[0])).epsilon(1e-4));
  }
  SUBCASE("expansion grows with energy") {
    const auto hi = find_periodic_orbit(cfg, {1, 2, 3}, 40.0);
    CHECK(hyperbolicity_report(hi).expansion_per_bounce > h.expansion_per_bounce);
    CHECK(hi.period < o.period);
  }
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(find_periodic_orbit(triangle(), {1, 1}, 10.0), Error);
  try {
    find_periodic_orbit(triangle(), {1, 1}, 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Inadmissible);
  }
  CentreConfig space(3, {{Vec3(0, 0, 0), 1.0}, {Vec3(2, 0, 0), 1.0}});
  CHECK_THROWS_AS(find_periodic_orbit(space, {1, 2}, 10.0), Error);
  CHECK_THROWS_AS(find_periodic_orbit(pair(), {1, 2}, -1.0), Error);

  ShootingSettings s;
  s.max_iterations = 1;
  s.tol = 1e-14;
  try {
    find_periodic_orbit(triangle(), {1, 2, 1, 3}, 10.0, s);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("entropy") {
  SUBCASE("two centres") {
    const auto r = entropy_estimate(pair(), 10.0, 3);
    CHECK(r.complete());
    CHECK(r.orbits.size() == 1);
    CHECK(r.h_est == 0.0);
  }
  SUBCASE("three centres") {
    const auto r = entropy_estimate(triangle(), 10.0, 4, {}, 2);
    CHECK(r.complete());
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
      CHECK(row.realized == row.attempted);
      CHECK(row.realized_words == row.admissible_words);
      CHECK(row.admissible_words == count_periodic_words(3, row.m));
    }
    CHECK(r.orbits.size() == 8);
    CHECK(r.h_est > 0.0);
    for (const auto& o : r.orbits) CHECK(hyperbolicity_report(o).hyperbolic);
  }
}
