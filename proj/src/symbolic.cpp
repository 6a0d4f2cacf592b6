#include "ncentre/symbolic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <thread>

namespace ncentre {

bool admissible(const Word& w, int n) {
  if (w.size() < 2) return false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 1 || w[i] > n) return false;
    if (w[i] == w[(i + 1) % w.size()]) return false;
  }
  return true;
}

Word canonical_rotation(const Word& w) {
  Word best = w;
  Word r = w;
  for (std::size_t i = 1; i < w.size(); ++i) {
    std::rotate(r.begin(), r.begin() + 1, r.end());
    if (r < best) best = r;
  }
  return best;
}

bool primitive(const Word& w) {
  const std::size_t m = w.size();
  for (std::size_t p = 1; p < m; ++p) {
    if (m % p) continue;
    bool repeats = true;
    for (std::size_t i = p; i < m && repeats; ++i) repeats = w[i] == w[i - p];
    if (repeats) return false;
  }
  return true;
}

std::string to_string(const Word& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

double symbol_metric(const Word& u, const Word& v) {
  if (u.empty() || v.empty()) throw Error(ErrorCode::ValidationError, "empty word");
  const std::size_t L = std::lcm(u.size(), v.size());
  const auto differs = [&](std::size_t i) { return u[i % u.size()] != v[i % v.size()]; };
  // Both tails are geometric in the common period L.
  double ahead = 0.0, behind = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    if (differs(i)) ahead += std::ldexp(1.0, -static_cast<int>(i));
    if (differs((L - 1 - i) % L)) behind += std::ldexp(1.0, -static_cast<int>(i + 1));
  }
  return (ahead + behind) / (1.0 - std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(L, 1000))));
}

double symbol_metric_window(const Word& u, const Word& v) {
  if (u.size() != v.size() || u.size() % 2 == 0)
    throw Error(ErrorCode::ValidationError, "windows must have equal odd length");
  const int w = static_cast<int>(u.size()) / 2;
  double d = 0.0;
  for (int i = -w; i <= w; ++i)
    if (u[i + w] != v[i + w]) d += std::ldexp(1.0, -std::abs(i));
  return d;
}

std::uint64_t count_periodic_words(int n, int m) {
  if (n < 2 || m < 1) throw Error(ErrorCode::ValidationError, "need n >= 2 and m >= 1");
  std::uint64_t a = 1;
  for (int i = 0; i < m; ++i) a *= static_cast<std::uint64_t>(n - 1);
  return m % 2 ? a - (n - 1) : a + (n - 1);
}

std::vector<Word> cyclic_classes(int n, int m) {
  std::vector<Word> out;
  if (m < 2) return out;
  Word w(m, 1);
  // Odometer over all words; keep admissible primitive canonical ones.
  while (true) {
    if (admissible(w, n) && primitive(w) && canonical_rotation(w) == w) out.push_back(w);
    int i = m - 1;
    while (i >= 0 && w[i] == n) w[i--] = 1;
    if (i < 0) break;
    ++w[i];
  }
  return out;
}

std::vector<PhaseState> polygon_guess(const CentreConfig& cfg, const Word& w, double E) {
  if (!admissible(w, static_cast<int>(cfg.size()))) throw Error(ErrorCode::Inadmissible, to_string(w));
  if (!(E > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "polygon guess needs E > 0");
  std::vector<PhaseState> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 a = cfg.centre(w[i] - 1).position;
    const Vec3 b = cfg.centre(w[(i + 1) % w.size()] - 1).position;
    const Vec3 q = 0.5 * (a + b);
    out.push_back({q, std::sqrt(2.0 * (E - potential(cfg, q))) * (b - a).normalized(), 0.0});
  }
  return out;
}

void ShootingSettings::validate() const {
  integrator.validate();
  if (section_radius < 0.0) throw Error(ErrorCode::ValidationError, "section radius must be >= 0");
  if (!(tol > 0.0) || !(fd_step > 0.0)) throw Error(ErrorCode::ValidationError, "tolerances must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::ValidationError, "max_iterations must be >= 1");
}

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

PhaseState section_state(const CentreConfig& cfg, double E, double rho, const SectionPoint& z) {
  const Vec3 u(std::cos(z.theta), std::sin(z.theta), 0.0);
  const Vec3 e(-u.y(), u.x(), 0.0);
  const Vec3 q = cfg.centre(z.centre).position + rho * u;
  const double v2 = 2.0 * (E - potential(cfg, q));
  const double vt = z.L / rho;
  if (!(v2 > vt * vt)) throw Error(ErrorCode::NoConvergence, "section point off the energy shell");
  return {q, std::sqrt(v2 - vt * vt) * u + vt * e, 0.0};
}

SectionPoint section_point(const CentreConfig& cfg, int centre, const PhaseState& x) {
  const Vec3 r = x.q - cfg.centre(centre).position;
  return {centre, std::atan2(r.y(), r.x()), r.x() * x.p.y() - r.y() * x.p.x()};
}

struct Segment {
  SectionPoint end;
  double time = 0.0;
  PhaseState pericentre;
  int pericentre_centre = -1;
  int pericentres = 0;
};

// Refines the outgoing crossing |q - s| = rho inside the step leaving sample a.
PhaseState refine_crossing(const CentreConfig& cfg, const Trajectory& tr, std::size_t a, const Vec3& s, double rho,
                           int order) {
  const PhaseState& xa = tr.samples[a];
  const PhaseState& xb = tr.samples[a + 1];
  const double ra = (xa.q - s).norm(), rb = (xb.q - s).norm();
  double dt = (xb.t - xa.t) * (rho - ra) / (rb - ra);
  PhaseState y = xa;
  for (int it = 0; it < 30; ++it) {
    y = composed_step(cfg, xa, dt, tr.split_centres[a], order);
    const Vec3 r = y.q - s;
    const double g = r.squaredNorm() - rho * rho;
    const double step = g / (2.0 * r.dot(y.p));
    dt -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(dt))) break;
  }
  return composed_step(cfg, xa, dt, tr.split_centres[a], order);
}

// Zero radial velocity about s near the event time, refined from the sample before it.
PhaseState refine_pericentre(const CentreConfig& cfg, const Trajectory& tr, const FlowEvent& ev, int order) {
  const Vec3 s = cfg.centre(ev.centre).position;
  if (ev.collision || (ev.state.q - s).norm() < 1e-6) return ev.state;
  std::size_t a = 0;
  while (a + 2 < tr.samples.size() && tr.samples[a + 1].t <= ev.t) ++a;
  const PhaseState& xa = tr.samples[a];
  double dt = ev.t - xa.t;
  for (int it = 0; it < 30; ++it) {
    const PhaseState y = composed_step(cfg, xa, dt, tr.split_centres[a], order);
    const Vec3 r = y.q - s;
    const double g = r.dot(y.p);
    const double dg = y.p.squaredNorm() - r.dot(grad_potential(cfg, y.q));
    const double step = g / dg;
    dt -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(dt))) break;
  }
  return composed_step(cfg, xa, dt, tr.split_centres[a], order);
}

struct Problem {
  const CentreConfig& cfg;
  double E;
  double rho;
  const ShootingSettings& s;
  double chunk;
  double max_time;
};

// From an outgoing crossing to the next outgoing crossing at any centre.
std::optional<Segment> segment(const Problem& P, const SectionPoint& z) {
  PhaseState x;
  try {
    x = section_state(P.cfg, P.E, P.rho, z);
  } catch (const Error&) {
    return std::nullopt;
  }
  const double t0 = x.t;
  Segment seg;
  StopRule stop;
  bool first = true;
  while (x.t - t0 < P.max_time) {
    const auto tr = integrate_partial(P.cfg, x, P.chunk, P.s.integrator, stop);
    if (tr.status != FlowStatus::Completed) return std::nullopt;
    for (std::size_t a = 0; a + 1 < tr.samples.size(); ++a) {
      for (std::size_t c = 0; c < P.cfg.size(); ++c) {
        const Vec3 sc = P.cfg.centre(c).position;
        if (first && a == 0) continue;
        if ((tr.samples[a].q - sc).norm() < P.rho && (tr.samples[a + 1].q - sc).norm() >= P.rho) {
          const PhaseState y = refine_crossing(P.cfg, tr, a, sc, P.rho, P.s.integrator.order);
          for (const auto& ev : tr.events) {
            if (ev.kind != EventKind::Pericentre || ev.t > y.t) continue;
            ++seg.pericentres;
            seg.pericentre_centre = ev.centre;
            seg.pericentre = refine_pericentre(P.cfg, tr, ev, P.s.integrator.order);
          }
          seg.end = section_point(P.cfg, static_cast<int>(c), y);
          seg.time = y.t - t0;
          return seg;
        }
      }
    }
    for (const auto& ev : tr.events)
      if (ev.kind == EventKind::Pericentre) ++seg.pericentres, seg.pericentre_centre = ev.centre;
    if (seg.pericentres > 1) return std::nullopt;
    // Continue from the last step; pericentres seen so far stay counted.
    x = tr.back();
    first = false;
    if (seg.pericentres == 1) {
      // The pericentre state must be recomputed when the crossing shows up in a later chunk.
      seg.pericentre = tr.events.back().state;
    }
  }
  return std::nullopt;
}

struct Evaluation {
  Eigen::VectorXd residual;
  std::vector<Segment> segments;
};

std::optional<Evaluation> evaluate(const Problem& P, const Word& w, const std::vector<SectionPoint>& z) {
  const std::size_t m = w.size();
  Evaluation ev;
  ev.residual.resize(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    auto seg = segment(P, z[i]);
    const int next = w[(i + 1) % m] - 1;
    if (!seg || seg->end.centre != next || seg->pericentres != 1 || seg->pericentre_centre != next) return std::nullopt;
    ev.residual(2 * i) = wrap(seg->end.theta - z[(i + 1) % m].theta);
    ev.residual(2 * i + 1) = (seg->end.L - z[(i + 1) % m].L) / P.rho;
    ev.segments.push_back(*seg);
  }
  return ev;
}

// d(theta', L'/rho) / d(theta, L/rho) of one section map, central differences.
std::optional<Eigen::Matrix2d> section_jacobian(const Problem& P, const SectionPoint& z, int next, double h) {
  Eigen::Matrix2d D;
  for (int j = 0; j < 2; ++j) {
    SectionPoint a = z, b = z;
    if (j == 0) a.theta += h, b.theta -= h;
    else a.L += h * P.rho, b.L -= h * P.rho;
    const auto sa = segment(P, a), sb = segment(P, b);
    if (!sa || !sb || sa->end.centre != next || sb->end.centre != next) return std::nullopt;
    D(0, j) = wrap(sa->end.theta - sb->end.theta) / (2.0 * h);
    D(1, j) = (sa->end.L - sb->end.L) / P.rho / (2.0 * h);
  }
  return D;
}

std::optional<Eigen::Matrix2d> section_jacobian(const Problem& P, const SectionPoint& z, int next) {
  return section_jacobian(P, z, next, P.s.fd_step);
}

// One Richardson level on top of section_jacobian, for the multipliers.
std::optional<Eigen::Matrix2d> refined_jacobian(const Problem& P, const SectionPoint& z, int next) {
  const auto coarse = section_jacobian(P, z, next, 4.0 * P.s.fd_step);
  const auto fine = section_jacobian(P, z, next, 2.0 * P.s.fd_step);
  if (!coarse || !fine) return std::nullopt;
  return Eigen::Matrix2d((4.0 * *fine - *coarse) / 3.0);
}

std::vector<SectionPoint> initial_guess(const CentreConfig& cfg, const Word& w, double E, double rho) {
  const std::size_t m = w.size();
  std::vector<SectionPoint> z;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = cfg.centre(w[i] - 1);
    const Vec3 in = (c.position - cfg.centre(w[(i + m - 1) % m] - 1).position).normalized();
    const Vec3 out = (cfg.centre(w[(i + 1) % m] - 1).position - c.position).normalized();
    const double v = std::sqrt(2.0 * E);
    // Coulomb deflection chi from the polygon turn: b = Z / (v^2 tan(chi/2)).
    const double chi = std::acos(std::clamp(in.dot(out), -1.0, 1.0));
    const double turn = in.x() * out.y() - in.y() * out.x();
    double b = chi > kPi - 1e-12 ? 0.0 : c.charge / (v * v * std::tan(0.5 * chi));
    b *= turn >= 0.0 ? -1.0 : 1.0;  // an attracting centre bends the orbit towards itself
    const Vec3 n(-out.y(), out.x(), 0.0);
    const Vec3 r = rho * out + b * n;
    z.push_back({w[i] - 1, std::atan2(r.y(), r.x()), -b * v});
  }
  return z;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(M).eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  return out;
}

using Vec4 = Eigen::Vector4d;

Vec4 flat(const PhaseState& x) { return Vec4(x.q.x(), x.q.y(), x.p.x(), x.p.y()); }

PhaseState moved(const PhaseState& x, const Vec4& d) {
  PhaseState y = x;
  y.q += Vec3(d(0), d(1), 0.0);
  y.p += Vec3(d(2), d(3), 0.0);
  return y;
}

// Fixed-time flow Jacobian over one segment, central differences.
Eigen::Matrix4d segment_monodromy(const CentreConfig& cfg, const PhaseState& x, double T, const IntegratorSettings& s) {
  const StopRule quiet{false, 0.0, false};
  Eigen::Matrix4d J;
  for (int j = 0; j < 4; ++j) {
    const double h = 1e-5 * (j < 2 ? 1.0 : std::max(1.0, x.p.norm()));
    Vec4 d = Vec4::Zero();
    d(j) = h;
    const PhaseState a = integrate(cfg, moved(x, d), T, s, quiet).back();
    const PhaseState b = integrate(cfg, moved(x, -d), T, s, quiet).back();
    J.col(j) = (flat(a) - flat(b)) / (2.0 * h);
  }
  return J;
}

Vec4 flow_vector(const CentreConfig& cfg, const PhaseState& x) {
  const Vec3 g = grad_potential(cfg, x.q);
  return Vec4(x.p.x(), x.p.y(), -g.x(), -g.y());
}

Vec4 energy_covector(const CentreConfig& cfg, const PhaseState& x) {
  const Vec3 g = grad_potential(cfg, x.q);
  return Vec4(g.x(), g.y(), x.p.x(), x.p.y());
}

Problem make_problem(const CentreConfig& cfg, double E, const ShootingSettings& s, double& rho) {
  rho = s.section_radius > 0.0 ? s.section_radius : 0.2 * cfg.min_pair_distance();
  double extent = 0.0;
  for (const auto& a : cfg.centres())
    for (const auto& b : cfg.centres()) extent = std::max(extent, (a.position - b.position).norm());
  const double v = std::sqrt(2.0 * E);
  return Problem{cfg, E, rho, s, 2.0 * extent / v, 20.0 * extent / v};
}

}  // namespace

PhaseState PeriodicOrbit::initial_state(const CentreConfig& cfg) const {
  return section_state(cfg, energy, section_radius, crossings.at(0));
}

PeriodicOrbit find_periodic_orbit(const CentreConfig& cfg, const Word& w, double E, const ShootingSettings& s) {
  s.validate();
  if (!admissible(w, static_cast<int>(cfg.size()))) throw Error(ErrorCode::Inadmissible, to_string(w));
  if (cfg.dimension() != 2) throw Error(ErrorCode::ValidationError, "periodic orbit search needs a planar configuration");
  if (!(E > 0.0)) throw Error(ErrorCode::NonpositiveEnergy, "periodic orbit search needs E > 0");

  PeriodicOrbit orbit;
  orbit.word = w;
  orbit.energy = E;
  const Problem P = make_problem(cfg, E, s, orbit.section_radius);
  const std::size_t m = w.size();

  auto z = initial_guess(cfg, w, E, P.rho);
  auto ev = evaluate(P, w, z);
  if (!ev) throw Error(ErrorCode::WrongItinerary, "initial guess for " + to_string(w) + " misses the itinerary");
  double res = ev->residual.lpNorm<Eigen::Infinity>();
  orbit.residual_trace.push_back(res);

  for (int it = 0; it < s.max_iterations && res >= s.tol; ++it) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto D = section_jacobian(P, z[i], w[(i + 1) % m] - 1);
      if (!D) throw Error(ErrorCode::NoConvergence, "section map undefined near iterate " + std::to_string(it));
      J.block<2, 2>(2 * i, 2 * i) = *D;
      J.block<2, 2>(2 * i, 2 * ((i + 1) % m)) -= Eigen::Matrix2d::Identity();
    }
    const Eigen::VectorXd dz = J.fullPivLu().solve(-ev->residual);

    // Backtracking on the max-norm residual.
    bool moved = false;
    for (double lambda = 1.0; lambda > 1e-4; lambda *= 0.5) {
      auto trial = z;
      for (std::size_t i = 0; i < m; ++i) {
        trial[i].theta = wrap(trial[i].theta + lambda * dz(2 * i));
        trial[i].L += lambda * dz(2 * i + 1) * P.rho;
      }
      auto tev = evaluate(P, w, trial);
      if (!tev) continue;
      const double tres = tev->residual.lpNorm<Eigen::Infinity>();
      if (tres < (1.0 - 1e-4 * lambda) * res) {
        z = std::move(trial);
        ev = std::move(tev);
        res = tres;
        moved = true;
        break;
      }
    }
    orbit.residual_trace.push_back(res);
    if (!moved) break;
  }
  orbit.residual = res;
  const auto& tr = orbit.residual_trace;
  if (tr.size() >= 3) orbit.weak_contraction = tr[tr.size() - 2] > s.weak_contraction * tr[tr.size() - 3];
  if (res >= s.tol)
    throw Error(ErrorCode::NoConvergence, to_string(w) + " residual " + std::to_string(res) + " after " +
                                              std::to_string(tr.size() - 1) + " iterations");

  orbit.crossings = z;
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  double det = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& seg = ev->segments[i];
    orbit.segment_times.push_back(seg.time);
    orbit.period += seg.time;
    // Pericentre of segment i belongs to letter i + 1; rotate so that entry i is letter i.
    const auto D = refined_jacobian(P, z[i], w[(i + 1) % m] - 1);
    if (!D) throw Error(ErrorCode::NoConvergence, "section map undefined at the converged orbit");
    M = *D * M;
    det *= D->determinant();
  }
  orbit.section_states.resize(m);
  for (std::size_t i = 0; i < m; ++i) orbit.section_states[(i + 1) % m] = ev->segments[i].pericentre;

  for (std::size_t i = 0; i < m; ++i)
    if (nearest_centre(cfg, orbit.section_states[i].q) != w[i] - 1)
      throw Error(ErrorCode::WrongItinerary, to_string(w) + " pericentre " + std::to_string(i) + " off its centre");

  // The small multiplier from the determinant: eigenvalue extraction loses it
  // once lambda_max * eps is comparable to 1 / lambda_max, and so does det M.
  orbit.multipliers = eigenvalues(M);
  orbit.multipliers[1] = det / orbit.multipliers[0];
  // Trivial multipliers, segment by segment: each segment Jacobian must carry
  // the flow vector at its start to the one at its end, and pull the energy
  // covector back. Products over a whole period would amplify the
  // difference error by the expansion of the orbit.
  orbit.flow_multiplier = orbit.energy_multiplier = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const PhaseState a = section_state(cfg, E, P.rho, z[i]);
    const PhaseState b = section_state(cfg, E, P.rho, z[(i + 1) % m]);
    const Eigen::Matrix4d J = segment_monodromy(cfg, a, orbit.segment_times[i], s.integrator);
    const Vec4 fa = flow_vector(cfg, a), fb = flow_vector(cfg, b);
    const Vec4 na = energy_covector(cfg, a), nb = energy_covector(cfg, b);
    orbit.flow_multiplier *= fb.dot(J * fa) / fb.squaredNorm();
    orbit.energy_multiplier *= nb.dot(J * na) / na.squaredNorm();
  }
  return orbit;
}

double closure_residual(const CentreConfig& cfg, const PeriodicOrbit& orbit, const IntegratorSettings& integrator) {
  ShootingSettings s;
  s.integrator = integrator;
  s.section_radius = orbit.section_radius;
  double rho = 0.0;
  const Problem P = make_problem(cfg, orbit.energy, s, rho);
  const auto ev = evaluate(P, orbit.word, orbit.crossings);
  if (!ev) return std::numeric_limits<double>::infinity();
  return ev->residual.lpNorm<Eigen::Infinity>();
}

HyperbolicityReport hyperbolicity_report(const PeriodicOrbit& orbit) {
  HyperbolicityReport r;
  if (orbit.multipliers.size() != 2) return r;
  r.lambda_max = std::abs(orbit.multipliers[0]);
  r.lambda_min = std::abs(orbit.multipliers[1]);
  r.pairing_error = std::abs(r.lambda_max * r.lambda_min - 1.0);
  r.unit_distances = {std::abs(orbit.flow_multiplier - 1.0), std::abs(orbit.energy_multiplier - 1.0)};
  r.expansion_per_bounce = std::log(r.lambda_max) / orbit.word.size();
  r.hyperbolic = r.lambda_max > 1.5;
  return r;
}

EntropyReport entropy_estimate(const CentreConfig& cfg, double E, int m_max, const ShootingSettings& settings,
                               int jobs) {
  const int n = static_cast<int>(cfg.size());
  if (n < 2) throw Error(ErrorCode::ValidationError, "entropy needs at least two centres");
  if (m_max < 2) throw Error(ErrorCode::ValidationError, "m_max must be >= 2");

  std::vector<Word> words;
  for (int m = 2; m <= m_max; ++m)
    for (auto& w : cyclic_classes(n, m)) words.push_back(std::move(w));

  std::vector<std::optional<PeriodicOrbit>> found(words.size());
  std::vector<std::string> errors(words.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next++) < words.size();) {
      try {
        found[i] = find_periodic_orbit(cfg, words[i], E, settings);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  EntropyReport r;
  r.energy = E;
  for (int m = 2; m <= m_max; ++m) {
    EntropyRow row;
    row.m = m;
    row.admissible_words = count_periodic_words(n, m);
    double time = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int len = static_cast<int>(words[i].size());
      if (found[i] && m % len == 0) row.realized_words += len;
      if (len != m) continue;
      ++row.attempted;
      if (found[i]) {
        ++row.realized;
        time += found[i]->period / m;
      }
    }
    if (row.realized > 0) {
      row.mean_bounce_time = time / row.realized;
      r.h_est = std::max(r.h_est, std::log(static_cast<double>(row.realized)) / (m * row.mean_bounce_time));
    }
    r.rows.push_back(row);
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (found[i]) r.orbits.push_back(std::move(*found[i]));
    else r.failures.emplace_back(words[i], errors[i]);
  }
  return r;
}

}  // namespace ncentre
