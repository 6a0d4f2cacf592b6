import math

import numpy as np
import pytest

import ncentre as nc


def three_centres():
    return nc.CentreConfig(3, [nc.Centre([1, 0, 0]), nc.Centre([-0.5, 0.8, 0.1]), nc.Centre([-0.4, -0.9, -0.2])])


def launch(cfg, E, b):
    q = np.array([-20.0, b, 0.3 * b])
    k = math.sqrt(2 * (E - nc.potential(cfg, q)))
    return nc.PhaseState(q, [k, 0, 0])


def test_potential_and_errors():
    cfg = nc.CentreConfig(3, [nc.Centre([0, 0, 0], 2.0)])
    assert nc.potential(cfg, [2, 0, 0]) == pytest.approx(-1.0)
    with pytest.raises(nc.Error) as e:
        nc.potential(cfg, [0, 0, 0])
    assert e.value.args[1] == nc.ErrorCode.CollisionPoint
    with pytest.raises(nc.Error):
        nc.CentreConfig(3, [])


def test_one_centre_flow_matches_kepler():
    cfg = nc.CentreConfig(3, [nc.Centre([0.2, -0.1, 0.3])])
    x0 = nc.PhaseState([1.5, 0.4, -0.2], [-0.3, 1.2, 0.2])
    tr = nc.integrate(cfg, x0, 5.0)
    s = tr.samples
    assert s.shape[1] == 7 and s[0, 0] == 0.0
    exact = nc.kepler_propagate(1.0, [0.2, -0.1, 0.3], x0, tr.final.t)
    assert np.max(np.abs(exact.q - tr.final.q)) < 1e-9
    assert tr.to_csv(cfg).startswith("t,")


def test_scatter_and_integrals():
    cfg = three_centres()
    x = launch(cfg, 1.5, 0.7)
    assert nc.classify(cfg, x) == nc.OrbitClass.Scattering
    s = nc.scatter(cfg, x)
    assert s.converged
    assert np.linalg.norm(s.p_plus) == pytest.approx(math.sqrt(3.0), rel=1e-8)
    g = nc.gevrey_integrals(cfg, x)
    assert g.value[0] == pytest.approx(nc.energy(cfg, x))
    assert len(g.value) == 3


def test_symbolic():
    assert nc.count_periodic_words(3, 4) == 18
    assert [list(w) for w in nc.cyclic_classes(3, 3)] == [[1, 2, 3], [1, 3, 2]]
    cfg = nc.CentreConfig(2, [nc.Centre([-1, 0, 0]), nc.Centre([1, 0, 0])])
    o = nc.find_periodic_orbit(cfg, [1, 2], 10.0)
    assert o.residual < 1e-9
    assert nc.hyperbolicity_report(o).hyperbolic
    with pytest.raises(nc.Error) as e:
        nc.find_periodic_orbit(cfg, [1, 1], 10.0)
    assert e.value.args[1] == nc.ErrorCode.Inadmissible


def test_config_and_batch():
    text = "centres:\n  - {position: [0, 0, 0], charge: 1}\nenergy: 2\nbatch: {b_min: 0.5, b_max: 3, count: 4}\n"
    c = nc.parse_config(text)
    assert len(c.sha256) == 64
    assert nc.parse_config(c.dump()).sha256 == c.sha256
    one = nc.scatter_csv(c, 1)
    assert one == nc.scatter_csv(c, 4)
    rows = [r for r in one.splitlines() if not r.startswith("#")]
    assert rows[0].startswith("id,") and len(rows) == 5
    with pytest.raises(nc.Error) as e:
        nc.parse_config(text + "bogus: 1\n")
    assert e.value.args[1] == nc.ErrorCode.ParseError
