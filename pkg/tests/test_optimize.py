import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from rfsense import closed_form as cf
from rfsense import optimize as op
from rfsense.model import ConfigurationError, SystemParams, Topology
from rfsense.scattering import UnstableModelError
from rfsense.tables import to_csv, Table

T4 = Topology.FOUR_MODE


def test_golden_section_quadratic():
    x, fx = op.golden_section(lambda x: (x - 1.234) ** 2 + 2.0, 0.0, 5.0, rtol=1e-10)
    # the parabola is flat to rounding within ~sqrt(eps) of the minimum
    assert x == pytest.approx(1.234, abs=1e-7)
    assert fx == pytest.approx(2.0)
    x, fx = op.golden_section(lambda x: -abs(x - 0.3), -1.0, 1.0, rtol=1e-12, maximize=True)
    assert x == pytest.approx(0.3, abs=1e-9)


def test_golden_section_against_scipy():
    f = lambda x: math.cosh(x - 0.7) + 0.1 * x ** 3
    x, _ = op.golden_section(f, -1.0, 2.0, rtol=1e-12)
    ref = minimize_scalar(f, bounds=(-1.0, 2.0), method="bounded", options={"xatol": 1e-12})
    assert x == pytest.approx(ref.x, abs=1e-7)


@pytest.mark.parametrize("topo,want,tol", [
    (Topology.FOUR_MODE, 4.43, 5e-3),
    (Topology.THREE_MODE_HIGH, 5.33, 5e-3),
    (Topology.THREE_MODE_LOW, 1.74, 1e-2),
])
def test_anchor_maxima(topo, want, tol, base):
    best = op.maximize_over_gamma2(base, topo)
    assert best.r == pytest.approx(want, rel=tol)
    xi = cf.noise_params(base, topo).xi
    assert best.w == pytest.approx(cf.w_opt(xi), abs=1e-3)
    assert best.r == pytest.approx(cf.r_max(xi), rel=5e-3)


def test_four_mode_optimum_location(base):
    best = op.maximize_over_gamma2(base, T4)
    assert best.gamma2 == pytest.approx(0.9391 * 60.5, abs=0.1)


def test_no_enhancement_above_threshold(base):
    p = base.replace(eta=1e-5)
    assert cf.noise_params(p, T4).xi > cf.XI_BAR
    best = op.maximize_over_gamma2(p, T4)
    assert best.gamma2 == 0.0
    assert best.r == 1.0


def test_zero_optical_cooperativity(base):
    best = op.maximize_over_gamma2(base.replace(gamma1=0.0), T4)
    assert math.isfinite(best.r) and best.r >= 1.0


def test_bracket_validation(base):
    with pytest.raises(ValueError):
        op.maximize_over_gamma2(base, T4, bracket=(0.0, 100.0))
    with pytest.raises(ValueError):
        op.maximize_over_gamma2(base, T4, bracket=(1.0, 1e4))


def test_all_unstable_bracket_raises(base, monkeypatch):
    def broken(*args, **kwargs):
        raise UnstableModelError(1.0)

    monkeypatch.setattr(op, "snr_value", broken)
    with pytest.raises(UnstableModelError):
        op.maximize_over_gamma2(base, T4)


def test_minimize_denominator_examples():
    # at xi = 1/9 the closed-form optimum w = 1/3 is a stationary inflection
    # point; the global minimum over w >= 0 is at the origin
    assert cf.w_opt_local(1 / 9) == pytest.approx(1 / 3)
    assert op._denominator_slope(1 / 3, 1 / 9) == pytest.approx(0.0, abs=1e-14)
    assert op._denominator_slope(0.3, 1 / 9) > 0 and op._denominator_slope(0.36, 1 / 9) > 0
    assert op.minimize_denominator(1 / 9) == (0.0, 1.0)
    assert cf.denominator(1 / 3, 1 / 9) == pytest.approx(256 / 243)
    w, d = op.minimize_denominator(0.05)
    assert w == pytest.approx(cf.w_opt(0.05), abs=1e-8)
    assert d == pytest.approx(cf.denominator_min(0.05), rel=1e-12)
    assert op.minimize_denominator(0.2) == (0.0, 1.0)


def test_xi_bar_bisection():
    assert op.find_xi_bar_numeric() == pytest.approx(cf.xi_bar(), abs=1e-10)
    g = lambda x: cf.denominator(cf.w_opt_local(x), x) - 1.0
    assert g(0.05) < 0
    assert g(0.11) > 0


def test_axis_validation():
    with pytest.raises(ConfigurationError):
        op.Axis("nope", 0.0, 1.0, 3)
    with pytest.raises(ConfigurationError):
        op.Axis("gamma2", 2.0, 1.0, 3)
    with pytest.raises(ConfigurationError):
        op.Axis("gamma2", 0.0, 1.0, 3, "log")
    assert list(op.Axis("gamma2", 1.0, 100.0, 3, "log").values()) == pytest.approx([1, 10, 100])


def test_sweep_shape_and_order():
    spec = op.SweepSpec(axis1=op.Axis("gamma2", 0.0, 100.0, 4),
                        axis2=op.Axis("temperature", 0.05, 0.2, 3),
                        quantities=("r", "w"))
    res = op.run_sweep(spec)
    assert len(res.rows) == 12
    assert res.columns == ["gamma2", "temperature", "r", "w", "stable"]
    # axis2 is the outer loop
    assert list(res.column("temperature")[:4]) == [0.05] * 4
    assert list(res.column("gamma2")[:4]) == pytest.approx([0, 100 / 3, 200 / 3, 100])
    assert not np.isnan(res.column("r")).any()
    assert res.metadata["revision"]


def test_single_point_sweep_matches_api(base):
    spec = op.SweepSpec(axis1=op.Axis("gamma2", 20.0, 20.0, 1), quantities=("r", "r_max", "u"))
    res = op.run_sweep(spec)
    assert len(res.rows) == 1
    p = base.replace(gamma2=20.0)
    from rfsense.measurement import snr_matrix
    assert res.column("r")[0] == snr_matrix(p, T4).r
    assert res.column("u")[0] == cf.noise_params(p, T4).u


def test_failed_points_are_flagged():
    # eta outside (0, 1] cannot be built; the sweep continues with a flagged row
    spec = op.SweepSpec(axis1=op.Axis("eta", 0.5, 1.5, 3), quantities=("r",))
    res = op.run_sweep(spec)
    assert list(res.column("stable")) == [1.0, 1.0, 0.0]
    assert math.isnan(res.column("r")[2])


def test_sweep_deterministic_and_parallel_equal():
    spec = op.SweepSpec(axis1=op.Axis("gamma1", 1.0, 100.0, 6, "log"),
                        quantities=("r", "r_max", "xi"), gamma2_rule="w_opt")
    a = op.run_sweep(spec)
    b = op.run_sweep(spec)
    c = op.run_sweep(spec, workers=2)
    as_csv = lambda r: to_csv(Table(r.columns, r.rows))
    assert as_csv(a) == as_csv(b) == as_csv(c)


def test_gamma2_rules():
    spec = op.SweepSpec(axis1=op.Axis("gamma1", 10.0, 100.0, 3), quantities=("w", "w_opt"),
                        gamma2_rule="w_opt")
    res = op.run_sweep(spec)
    assert np.allclose(res.column("w"), res.column("w_opt"))
    spec = op.SweepSpec(axis1=op.Axis("gamma1", 10.0, 100.0, 3), quantities=("s22_abs",),
                        gamma2_rule="matched")
    assert np.all(op.run_sweep(spec).column("s22_abs") < 1e-9)
    with pytest.raises(ConfigurationError):
        op.SweepSpec(axis1=op.Axis("gamma1", 10.0, 100.0, 3), quantities=("w",), gamma2_rule="x")


def test_unknown_quantity():
    with pytest.raises(ConfigurationError):
        op.SweepSpec(axis1=op.Axis("gamma1", 10.0, 100.0, 3), quantities=("bogus",))


def test_four_mode_sweep_keeps_midpoint():
    spec = op.SweepSpec(axis1=op.Axis("omega_2", 6e6, 9e6, 3), quantities=("r",))
    res = op.run_sweep(spec)
    assert all(res.column("stable") == 1.0)


def test_peaks_of_r_vs_gamma2(base):
    peaks = {}
    for topo in Topology:
        spec = op.SweepSpec(axis1=op.Axis("gamma2", 0.1, 1e3, 200, "log"), quantities=("r",),
                            topology=topo)
        res = op.run_sweep(spec)
        r = res.column("r")
        g = res.column("gamma2")
        i = int(np.argmax(r))
        peaks[topo] = r[i]
        want = cf.gamma2_for_w(cf.w_opt(cf.noise_params(base, topo).xi), base, topo)
        # peak sits within one grid step of the analytic location
        assert g[max(i - 1, 0)] <= want <= g[min(i + 1, len(g) - 1)]
    assert peaks[Topology.THREE_MODE_HIGH] > peaks[T4] > peaks[Topology.THREE_MODE_LOW]


def test_temperature_sweep_robust():
    base = SystemParams(eta=None, zeta=100.0)
    spec = op.SweepSpec(axis1=op.Axis("temperature", 1e-3, 10.0, 200, "log"),
                        quantities=("r_max",), base=base)
    res = op.run_sweep(spec)
    T, r = res.column("temperature"), res.column("r_max")
    band = (T >= 0.05) & (T <= 5.0)
    assert r[band].max() / r[band].min() < 2.0


def test_oracle_speed(base):
    t0 = time.perf_counter()
    for topo in Topology:
        op.maximize_over_gamma2(base, topo)
    assert time.perf_counter() - t0 < 1.0
