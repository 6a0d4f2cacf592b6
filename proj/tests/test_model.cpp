#include <random>

#include "doctest.h"
#include "ncentre/model.hpp"
#include "oracles.hpp"

using namespace ncentre;

namespace {

CentreConfig single(double Z = 1.0) { return CentreConfig(3, {{Vec3::Zero(), Z}}); }

CentreConfig pair_on_x() { return CentreConfig(3, {{Vec3(-1, 0, 0), 1.0}, {Vec3(1, 0, 0), 1.0}}); }

CentreConfig random_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0), charge(-1.5, 2.0);
  std::vector<Centre> cs;
  for (int k = 0; k < n; ++k) {
    double z = charge(rng);
    if (std::abs(z) < 0.1) z = 0.5;
    cs.push_back({Vec3(pos(rng), pos(rng), pos(rng)), z});
  }
  return CentreConfig(3, cs);
}

}  // namespace

TEST_CASE("potential closed-form values") {
  CHECK(potential(single(), Vec3(1, 0, 0)) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(potential(pair_on_x(), Vec3::Zero()) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("potential matches term-by-term summation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto cfg = random_config(rng, 1 + trial % 5);
    const Vec3 q(u(rng), u(rng), u(rng));
    long double sum = 0.0L;
    for (const auto& c : cfg.centres()) sum -= c.charge / static_cast<long double>((q - c.position).norm());
    CHECK(potential(cfg, q) == doctest::Approx(static_cast<double>(sum)).epsilon(1e-13));
  }
}

TEST_CASE("gradient: radial, cancellation and finite differences") {
  CHECK((grad_potential(single(), Vec3(1, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK(grad_potential(pair_on_x(), Vec3::Zero()).norm() < 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto cfg = random_config(rng, 3);
    const Vec3 q(u(rng), u(rng), u(rng));
    double dmin = 1e9;
    for (const auto& c : cfg.centres()) dmin = std::min(dmin, (q - c.position).norm());
    if (dmin < 0.2) continue;
    const double h = 1e-5 * dmin;
    Vec3 fd;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = h;
      fd[i] = (potential(cfg, q + e) - potential(cfg, q - e)) / (2 * h);
    }
    const Vec3 g = grad_potential(cfg, q);
    CHECK((g - fd).norm() < 1e-6 * g.norm());
  }
}

TEST_CASE("energy values") {
  PhaseState x{Vec3(1, 0, 0), Vec3::Zero(), 0.0};
  CHECK(energy(single(), x) == doctest::Approx(-1.0));
  x.p = Vec3(0, 2, 0);
  CHECK(energy(single(), x) == doctest::Approx(1.0));
}

TEST_CASE("collision guard and validation") {
  CHECK_THROWS_AS(potential(single(), Vec3(1e-12, 0, 0)), Error);
  try {
    potential(single(), Vec3::Zero());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CollisionPoint);
  }
  CHECK_THROWS_AS(CentreConfig(3, {{Vec3::Zero(), 1.0}, {Vec3::Zero(), 2.0}}), Error);
  CHECK_THROWS_AS(CentreConfig(3, {{Vec3::Zero(), 0.0}}), Error);
  CHECK_THROWS_AS(CentreConfig(3, {}), Error);
  CHECK_THROWS_AS(CentreConfig(2, {{Vec3(0, 0, 1), 1.0}}), Error);
  CHECK_THROWS_AS(virial_radius(single(), 0.0), Error);
}

TEST_CASE("virial radius satisfies its defining inequality") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> e_dist(0.2, 20.0), stretch(1.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto cfg = random_config(rng, 1 + trial % 4);
    const double E = e_dist(rng);
    const double R = virial_radius(cfg, E);
    CHECK(R >= 2.0 * cfg.max_centre_norm());
    int violations = 0;
    for (int s = 0; s < 1000; ++s) {
      // Shell sample and a sample further out: the inequality must hold for |q| >= R.
      const double r = (s % 2 == 0) ? R : R * stretch(rng);
      const Vec3 q = r * oracle::random_unit(rng, 3);
      const double kinetic = E - potential(cfg, q);
      if (kinetic <= 0.0) continue;  // energetically forbidden point
      const Vec3 p = std::sqrt(2.0 * kinetic) * oracle::random_unit(rng, 3);
      const double rate = p.squaredNorm() + q.dot(oracle::force(cfg, q));
      if (!(rate > 0.5 * E)) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("virial radius for a single centre at the origin") {
  // <q, grad V> = -V, so the rate is 2E - V > 2E for every radius.
  const double R = virial_radius(single(), 1.0);
  CHECK(R >= 1.0);
  CHECK(virial_rate(single(), Vec3(R, 0, 0), 1.0) > 2.0);
}

TEST_CASE("virial radius is nonincreasing in energy") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto cfg = random_config(rng, 3);
    double prev = virial_radius(cfg, 0.05);
    for (double E = 0.1; E < 50.0; E *= 1.7) {
      const double R = virial_radius(cfg, E);
      CHECK(R <= prev);
      prev = R;
    }
  }
}

TEST_CASE("escape check") {
  auto cfg = pair_on_x();
  const double E = 1.0;
  const double R = virial_radius(cfg, E);
  const Vec3 q(R, 0, 0);
  const double k = std::sqrt(2.0 * (E - potential(cfg, q)));
  CHECK(escape_check(cfg, {q, Vec3(k, 0, 0), 0}, E));
  CHECK_FALSE(escape_check(cfg, {q, Vec3(-k, 0, 0), 0}, E));
  CHECK(escape_check(cfg, {q, Vec3(-k, 0, 0), 0}, E, /*backward=*/true));
  CHECK_FALSE(escape_check(cfg, {0.5 * q, Vec3(k, 0, 0), 0}, E));
  CHECK(escape_lower_bound(2.0, 2.0, 0.0) == doctest::Approx(2.0));
}
