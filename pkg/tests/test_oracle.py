import math

import numpy as np
import pytest

from rparallel.measures import PAIRS
from rparallel.oracle import (
    TangentBallScene,
    analytic_consistency_check,
    analytic_curve,
    analytic_mu,
    analytic_nu,
    analytic_table,
    d_mu00_dr,
)

S3 = TangentBallScene(3, 100.0)
S2 = TangentBallScene(2, 100.0)


def test_3d_at_r_equals_R():
    assert analytic_mu(S3, 100, "00") == pytest.approx(2.0944e6, rel=1e-4)
    assert analytic_mu(S3, 100, "01") == pytest.approx(31415.9, abs=0.05)
    assert analytic_mu(S3, 100, "10") == pytest.approx(62831.9, abs=0.05)
    assert analytic_mu(S3, 100, "11") == pytest.approx(628.32, abs=0.005)


def test_2d_at_r_equals_2R():
    assert analytic_mu(S2, 200, "00") == pytest.approx(math.pi * 1e4, rel=1e-15)
    assert analytic_mu(S2, 200, "01") == 0.0
    assert analytic_mu(S2, 200, "10") == pytest.approx(2 * math.pi * 100, rel=1e-15)
    assert analytic_mu(S2, 200, "11") == 1.0


def test_2d_point_counts():
    assert analytic_mu(S2, 0, "11") == 1.0
    assert analytic_mu(S2, 50, "11") == 2.0
    assert analytic_mu(S2, 250, "11") == 0.0


def test_zero_radius_volume():
    assert analytic_mu(S3, 0, "00") == 0.0
    assert analytic_mu(S2, 0, "00") == 0.0


def test_negative_radius():
    with pytest.raises(ValueError):
        analytic_mu(S3, -1, "00")


def test_bad_scene():
    with pytest.raises(ValueError):
        TangentBallScene(4, 1.0)
    with pytest.raises(ValueError):
        TangentBallScene(3, 0.0)


@pytest.mark.parametrize("pair", ["00", "01", "10"])
def test_continuity_at_2R_3d(pair):
    R = S3.R
    left = analytic_mu(S3, 2 * R * (1 - 1e-13), pair)
    at = analytic_mu(S3, 2 * R, pair)
    assert left == pytest.approx(at, rel=1e-12, abs=1e-12 * analytic_mu(S3, 2 * R, "00"))


@pytest.mark.parametrize("pair", ["00", "01", "10"])
def test_continuity_at_2R_2d(pair):
    # the circle meets the level line in a chord of length ~ 2 sqrt(2 R delta), so the
    # left limit is approached at a square-root rate
    R = S2.R
    at = analytic_mu(S2, 2 * R, pair)
    gaps = [abs(analytic_mu(S2, 2 * R - d, pair) - at) for d in (1e-4, 1e-8, 1e-12)]
    for d, g in zip((1e-4, 1e-8, 1e-12), gaps):
        assert g <= 2 * math.sqrt(2 * R * d) * (1 + 1e-6)
    assert gaps[0] >= gaps[1] >= gaps[2]


def test_mu11_jumps_are_the_documented_exceptions():
    R = S3.R
    assert analytic_mu(S3, 2 * R * (1 - 1e-6), "11") > 1.0
    assert analytic_mu(S3, 2 * R, "11") == 0.0
    assert analytic_mu(S2, 2 * R * (1 - 1e-6), "11") == 2.0
    assert analytic_mu(S2, 2 * R, "11") == 1.0


@pytest.mark.parametrize("scene", [S3, S2])
def test_nonnegative_and_monotone(scene):
    r = np.linspace(0, 5 * scene.R, 2001)
    for p in PAIRS:
        assert np.all(analytic_curve(scene, r, p) >= 0)
    assert np.all(np.diff(analytic_curve(scene, r, "00")) >= 0)


def test_nu_is_zero():
    for p in PAIRS:
        assert analytic_nu(S3, 10.0, p) == 0.0


def test_consistency_3d_exact():
    rep = analytic_consistency_check(S3, np.linspace(1, 199, 199))
    assert rep.max_rel_deviation <= 1e-12 and rep.ok


def test_consistency_2d():
    rep = analytic_consistency_check(S2, np.arange(1, 200, dtype=float))
    assert rep.max_rel_deviation <= 1e-9


def test_2d_derivative_matches_numeric_differentiation():
    # independent check of the symbolic 2D derivative by central differences of the closed form
    for r in (1.0, 37.0, 100.0, 163.0, 199.0):
        h = 1e-5
        num = (analytic_mu(S2, r + h, "00") - analytic_mu(S2, r - h, "00")) / (2 * h)
        assert d_mu00_dr(S2, r) == pytest.approx(num, rel=1e-7)


def test_plateau_both_sides_zero():
    rep = analytic_consistency_check(S3, [250.0, 300.0])
    assert rep.max_abs_deviation == 0.0 and np.all(rep.mu01 == 0)


def test_table_schema():
    t = analytic_table(S3, [10.0, 20.0])
    assert list(t) == ["r", "mu00", "mu01", "mu10", "mu11", "N0", "N1", "nu00", "nu01", "nu10", "nu11"]
    assert np.all(np.isinf(t["N0"])) and np.all(t["nu11"] == 0)
    assert t["mu10"][1] == pytest.approx(2 * math.pi * 100 * 20)
