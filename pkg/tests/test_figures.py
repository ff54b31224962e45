import math

import numpy as np
import pytest

from rfsense import closed_form as cf
from rfsense.figures import FIGURES, make_figure
from rfsense.model import SystemParams


def table(name, points=None, **kw):
    return dict(make_figure(name, points=points, **kw))


def test_rmax_vs_xi():
    t = table("rmax-vs-xi")["rmax-vs-xi"]
    r = np.array(t.column("r_max"))
    assert len(r) == 200
    assert np.all(np.diff(r) < 0)
    assert np.all(np.array(t.column("r_max_minus_r_im")) >= 0)
    assert np.allclose(t.column("w_numeric"), t.column("w_opt"), atol=1e-8)
    assert np.allclose(t.column("r_max_numeric"), r, rtol=1e-9)


def test_r_vs_phi_marker_is_matched():
    t = table("r-vs-phi", points=41)["r-vs-phi"]
    marker = [row for row in t.rows if row[-1] == 1.0]
    assert len(marker) == 1
    row = dict(zip(t.columns, marker[0]))
    assert row["w_nonreciprocal"] == pytest.approx(1.0, abs=1e-12)
    assert row["r_nonreciprocal"] == pytest.approx(row["r_im_nonreciprocal"], rel=1e-9)
    assert row["s12_abs_nonreciprocal"] < 1e-10
    phis = t.column("phi")
    assert all(-math.pi < x < math.pi for x in phis)
    assert len(phis) == 42


def test_r_vs_phi_delta_opt_curve():
    t = table("r-vs-phi", points=21)["r-vs-phi"]
    zero = [dict(zip(t.columns, r)) for r in t.rows if r[0] == 0.0][0]
    assert zero["delta_opt"] == 0.0
    assert zero["r_delta0"] == pytest.approx(4.43, rel=5e-3)
    # tracking the optimal detuning never does worse than zero detuning at fixed gamma2
    for r in t.rows:
        d = dict(zip(t.columns, r))
        assert d["r_max_delta_opt"] >= 1.0


def test_rmax_vs_gamma1_numeric_dots_on_lines():
    tabs = dict(make_figure("rmax-vs-gamma1", points=5))
    assert len(tabs["rmax-vs-gamma1"].rows) == 5
    dots = tabs["rmax-vs-gamma1-numeric"]
    assert len(dots.rows) == 5
    for topo in ("FourMode", "ThreeModeHigh", "ThreeModeLow"):
        num = np.array(dots.column(f"r_opt_numeric_{topo}"))
        closed = np.array(dots.column(f"r_max_{topo}"))
        assert np.allclose(num, closed, rtol=5e-3)


def test_rmax_vs_gamma1_anchor_values():
    from rfsense.figures import _per_topology
    from rfsense.optimize import Axis
    t = _per_topology(Axis("gamma1", 60.0, 60.0, 1), SystemParams(), ("r_max",))
    row = dict(zip(t.columns, t.rows[0]))
    assert row["r_max_ThreeModeHigh"] == pytest.approx(5.33, rel=5e-3)
    assert row["r_max_FourMode"] == pytest.approx(4.43, rel=5e-3)
    assert row["r_max_ThreeModeLow"] == pytest.approx(1.74, rel=1e-2)


def test_heatmaps_long_format():
    t = table("rmax-heatmap-eta", points=5)["rmax-heatmap-eta"]
    assert len(t.rows) == 25
    assert t.columns[:2] == ["temperature", "eta"]
    # r_max exceeds one exactly when eta is above its threshold
    for r in t.rows:
        d = dict(zip(t.columns, r))
        if d["eta"] > d["eta_threshold"] * 1.001:
            assert d["r_max"] > 1.0
        elif d["eta"] < d["eta_threshold"] * 0.999:
            assert d["r_max"] == 1.0
    z = table("rmax-heatmap-zeta", points=4)["rmax-heatmap-zeta"]
    assert len(z.rows) == 16 and "zeta_threshold" in z.columns


def test_snr_curves():
    t = table("snr-vs-temperature", points=20)["snr-vs-temperature"]
    snr = np.array(t.column("snr_max_per_unit_FourMode"))
    snr0 = np.array(t.column("snr0_closed_per_unit_FourMode"))
    assert np.all(snr >= snr0 * (1 - 1e-12))
    assert t.column("r_max_FourMode")[0] == 1.0  # 1e-4 K: no enhancement
    z = table("snr-vs-zeta", points=10)["snr-vs-zeta"]
    eta = np.array(z.column("eta_FourMode"))
    assert np.all(np.diff(eta) < 0)


def test_r_vs_gamma2_ordering():
    t = table("r-vs-gamma2", points=120)["r-vs-gamma2"]
    peaks = {k: max(t.column(f"r_{k}")) for k in ("FourMode", "ThreeModeHigh", "ThreeModeLow")}
    assert peaks["ThreeModeHigh"] > peaks["FourMode"] > peaks["ThreeModeLow"]
    # matrix and closed-form curves agree to the size of the small corrections
    assert np.allclose(t.column("r_FourMode"), t.column("r_closed_FourMode"), rtol=1e-9)


def test_every_figure_has_header():
    for name in FIGURES:
        for stem, t in make_figure(name, points=3):
            assert t.comments[0] == f"figure: {stem}"
            assert any(c.startswith("revision:") for c in t.comments)
