#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ncentre/cli.hpp"
#include "ncentre/integrals.hpp"
#include "ncentre/symbolic.hpp"

namespace py = pybind11;
using namespace ncentre;

namespace {

// Rows of (t, q.., p..) as one float array.
py::array_t<double> samples_array(const Trajectory& tr) {
  py::array_t<double> out({static_cast<py::ssize_t>(tr.samples.size()), py::ssize_t{7}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const auto& x = tr.samples[i];
    a(i, 0) = x.t;
    for (int k = 0; k < 3; ++k) {
      a(i, 1 + k) = x.q(k);
      a(i, 4 + k) = x.p(k);
    }
  }
  return out;
}

template <class F>
std::string to_text(F write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "n-centre Coulomb scattering, Gevrey integrals and symbolic dynamics";

  py::enum_<ErrorCode> code(m, "ErrorCode");
  for (int i = 0; i <= static_cast<int>(ErrorCode::ValidationError); ++i) {
    const auto c = static_cast<ErrorCode>(i);
    code.value(std::string(to_string(c)).c_str(), c);
  }
  // Raised as ncentre.Error(message) with the code in args[1].
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object args = py::make_tuple(e.what(), e.code());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  // model
  py::class_<Centre>(m, "Centre")
      .def(py::init([](const Vec3& position, double charge) { return Centre{position, charge}; }), py::arg("position"),
           py::arg("charge") = 1.0)
      .def_readwrite("position", &Centre::position)
      .def_readwrite("charge", &Centre::charge);

  py::class_<CentreConfig>(m, "CentreConfig")
      .def(py::init<int, std::vector<Centre>, double>(), py::arg("dimension"), py::arg("centres"),
           py::arg("collision_guard") = 1e-10)
      .def_property_readonly("dimension", &CentreConfig::dimension)
      .def_property_readonly("centres", &CentreConfig::centres)
      .def_property_readonly("total_charge", &CentreConfig::total_charge)
      .def("__len__", &CentreConfig::size);

  py::class_<PhaseState>(m, "PhaseState")
      .def(py::init([](const Vec3& q, const Vec3& p, double t) { return PhaseState{q, p, t}; }), py::arg("q"),
           py::arg("p"), py::arg("t") = 0.0)
      .def_readwrite("q", &PhaseState::q)
      .def_readwrite("p", &PhaseState::p)
      .def_readwrite("t", &PhaseState::t)
      .def("__repr__", [](const PhaseState& x) {
        std::ostringstream s;
        s << "PhaseState(q=[" << x.q.transpose() << "], p=[" << x.p.transpose() << "], t=" << x.t << ")";
        return s.str();
      });

  m.def("potential", &potential, py::arg("cfg"), py::arg("q"));
  m.def("grad_potential", &grad_potential, py::arg("cfg"), py::arg("q"));
  m.def("energy", &energy, py::arg("cfg"), py::arg("x"));
  m.def("virial_radius", &virial_radius, py::arg("cfg"), py::arg("E"));
  m.def("escape_check", &escape_check, py::arg("cfg"), py::arg("x"), py::arg("E"), py::arg("backward") = false);
  m.def("escape_lower_bound", &escape_lower_bound, py::arg("q0"), py::arg("E"), py::arg("t"));

  // kepler
  py::class_<KeplerElements>(m, "KeplerElements")
      .def_readonly("energy", &KeplerElements::energy)
      .def_readonly("angular_momentum", &KeplerElements::angular_momentum)
      .def_readonly("runge_lenz", &KeplerElements::runge_lenz)
      .def_readonly("pericentre_time", &KeplerElements::pericentre_time)
      .def_readonly("pericentre_distance", &KeplerElements::pericentre_distance);
  m.def("osculating_elements", &osculating_elements, py::arg("charge"), py::arg("centre"), py::arg("x"),
        py::arg("min_runge_lenz") = 0.0);
  m.def("kepler_propagate", &kepler_propagate, py::arg("charge"), py::arg("centre"), py::arg("x"), py::arg("dt"),
        py::arg("guard") = 1e-10);

  // flow
  py::class_<IntegratorSettings>(m, "IntegratorSettings")
      .def(py::init<>())
      .def_readwrite("step", &IntegratorSettings::step)
      .def_readwrite("energy_tol", &IntegratorSettings::energy_tol)
      .def_readwrite("collision_guard", &IntegratorSettings::collision_guard)
      .def_readwrite("order", &IntegratorSettings::order)
      .def_readwrite("max_steps", &IntegratorSettings::max_steps);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("samples", &samples_array, "rows of t, q_x, q_y, q_z, p_x, p_y, p_z")
      .def_property_readonly("final", [](const Trajectory& tr) { return tr.back(); })
      .def_property_readonly("steps", [](const Trajectory& tr) { return tr.stats.steps; })
      .def_property_readonly("max_energy_drift", [](const Trajectory& tr) { return tr.stats.max_energy_drift; })
      .def_property_readonly("min_centre_distance",
                             [](const Trajectory& tr) { return tr.stats.min_centre_distance; })
      .def("to_csv", [](const Trajectory& tr, const CentreConfig& cfg) {
        return to_text([&](std::ostream& s) { write_trajectory_csv(s, cfg, tr); });
      });
  m.def(
      "integrate",
      [](const CentreConfig& cfg, const PhaseState& x, double duration, const IntegratorSettings& s) {
        return integrate(cfg, x, duration, s);
      },
      py::arg("cfg"), py::arg("x"), py::arg("duration"), py::arg("settings") = IntegratorSettings{});

  // scattering
  py::enum_<OrbitClass>(m, "OrbitClass")
      .value("Scattering", OrbitClass::Scattering)
      .value("TrappedForward", OrbitClass::TrappedForward)
      .value("TrappedBackward", OrbitClass::TrappedBackward)
      .value("BoundedToHorizon", OrbitClass::BoundedToHorizon)
      .value("CollisionFlagged", OrbitClass::CollisionFlagged);

  py::class_<ScatterSettings>(m, "ScatterSettings")
      .def(py::init<>())
      .def_readwrite("integrator", &ScatterSettings::integrator)
      .def_readwrite("horizon", &ScatterSettings::horizon)
      .def_readwrite("j_min", &ScatterSettings::j_min)
      .def_readwrite("j_max", &ScatterSettings::j_max)
      .def_readwrite("richardson_levels", &ScatterSettings::richardson_levels)
      .def_readwrite("tau_tol", &ScatterSettings::tau_tol);

  py::class_<ScatterData>(m, "ScatterData")
      .def_property_readonly("kind", [](const ScatterData& s) { return s.classification.kind; })
      .def_readonly("energy", &ScatterData::energy)
      .def_readonly("p_plus", &ScatterData::p_plus)
      .def_readonly("p_minus", &ScatterData::p_minus)
      .def_readonly("tau", &ScatterData::tau)
      .def_readonly("tau_err", &ScatterData::tau_err)
      .def_readonly("tau_ladder", &ScatterData::tau_ladder)
      .def_readonly("radii", &ScatterData::radii)
      .def_readonly("ladder_monotone", &ScatterData::ladder_monotone)
      .def_readonly("converged", &ScatterData::converged)
      .def_readonly("failure", &ScatterData::failure);

  m.def(
      "classify", [](const CentreConfig& cfg, const PhaseState& x, const ScatterSettings& s) {
        return classify(cfg, x, s).kind;
      },
      py::arg("cfg"), py::arg("x"), py::arg("settings") = ScatterSettings{});
  m.def("scatter", &scatter, py::arg("cfg"), py::arg("x"), py::arg("settings") = ScatterSettings{});

  // integrals
  py::class_<GevreyParams>(m, "GevreyParams")
      .def(py::init<>())
      .def_readwrite("g", &GevreyParams::g)
      .def_readwrite("C2", &GevreyParams::C2)
      .def_readwrite("energy_min", &GevreyParams::energy_min)
      .def_readwrite("energy_max", &GevreyParams::energy_max);

  py::class_<GevreyValues>(m, "GevreyValues")
      .def_readonly("kind", &GevreyValues::kind)
      .def_readonly("ambiguous", &GevreyValues::ambiguous)
      .def_readonly("tau", &GevreyValues::tau)
      .def_readonly("value", &GevreyValues::value)
      .def_readonly("log_abs", &GevreyValues::log_abs)
      .def_readonly("sign", &GevreyValues::sign);

  m.def("gevrey_integrals", &gevrey_integrals, py::arg("cfg"), py::arg("x"), py::arg("params") = GevreyParams{},
        py::arg("settings") = ScatterSettings{});
  m.def(
      "gevrey_brackets",
      [](const CentreConfig& cfg, const PhaseState& x, const GevreyParams& params, const ScatterSettings& s) {
        const auto r = gevrey_brackets(cfg, params, {x}, s);
        py::dict out;
        for (std::size_t j = 0; j < r.pairs.size(); ++j) out[py::make_tuple(r.pairs[j].first, r.pairs[j].second)] =
            r.values[0][j].relative();
        return out;
      },
      py::arg("cfg"), py::arg("x"), py::arg("params") = GevreyParams{}, py::arg("settings") = ScatterSettings{},
      "relative brackets {f_a, f_b} at x, keyed by (a, b)");
  m.def("two_centre_constant", &two_centre_constant, py::arg("cfg"), py::arg("x"));

  // symbolic
  m.def("admissible", &admissible, py::arg("word"), py::arg("n"));
  m.def("count_periodic_words", &count_periodic_words, py::arg("n"), py::arg("m"));
  m.def("cyclic_classes", &cyclic_classes, py::arg("n"), py::arg("m"));
  m.def("symbol_metric", &symbol_metric, py::arg("u"), py::arg("v"));

  py::class_<ShootingSettings>(m, "ShootingSettings")
      .def(py::init<>())
      .def_readwrite("integrator", &ShootingSettings::integrator)
      .def_readwrite("section_radius", &ShootingSettings::section_radius)
      .def_readwrite("tol", &ShootingSettings::tol)
      .def_readwrite("max_iterations", &ShootingSettings::max_iterations);

  py::class_<PeriodicOrbit>(m, "PeriodicOrbit")
      .def_readonly("word", &PeriodicOrbit::word)
      .def_readonly("energy", &PeriodicOrbit::energy)
      .def_readonly("period", &PeriodicOrbit::period)
      .def_readonly("residual", &PeriodicOrbit::residual)
      .def_readonly("multipliers", &PeriodicOrbit::multipliers)
      .def_readonly("section_states", &PeriodicOrbit::section_states)
      .def("initial_state", &PeriodicOrbit::initial_state);

  py::class_<HyperbolicityReport>(m, "HyperbolicityReport")
      .def_readonly("lambda_max", &HyperbolicityReport::lambda_max)
      .def_readonly("lambda_min", &HyperbolicityReport::lambda_min)
      .def_readonly("pairing_error", &HyperbolicityReport::pairing_error)
      .def_readonly("expansion_per_bounce", &HyperbolicityReport::expansion_per_bounce)
      .def_readonly("hyperbolic", &HyperbolicityReport::hyperbolic);

  m.def("find_periodic_orbit", &find_periodic_orbit, py::arg("cfg"), py::arg("word"), py::arg("E"),
        py::arg("settings") = ShootingSettings{});
  m.def("hyperbolicity_report", &hyperbolicity_report, py::arg("orbit"));

  py::class_<EntropyReport>(m, "EntropyReport")
      .def_readonly("energy", &EntropyReport::energy)
      .def_readonly("h_est", &EntropyReport::h_est)
      .def_readonly("orbits", &EntropyReport::orbits)
      .def_readonly("failures", &EntropyReport::failures)
      .def("complete", &EntropyReport::complete);
  m.def("entropy_estimate", &entropy_estimate, py::arg("cfg"), py::arg("E"), py::arg("m_max"),
        py::arg("settings") = ShootingSettings{}, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

  // run configurations and batch outputs
  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("energy", &RunConfig::energy)
      .def_property_readonly("dimension", [](const RunConfig& c) { return c.dimension; })
      .def("centre_config", &RunConfig::centre_config)
      .def("dump", [](const RunConfig& c) { return dump_config(c); })
      .def_property_readonly("sha256", &config_hash);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def(
      "scatter_csv",
      [](const RunConfig& c, int jobs) {
        const auto rows = run_scatter_batch(c, jobs);
        return to_text([&](std::ostream& s) { write_scatter_csv(s, c, rows); });
      },
      py::arg("config"), py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
  m.def(
      "classify_csv",
      [](const RunConfig& c, int jobs) {
        const auto rows = run_classify_batch(c, jobs);
        return to_text([&](std::ostream& s) { write_classify_csv(s, c, rows); });
      },
      py::arg("config"), py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
}
