import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from distgaps.construction import DistanceClass
from distgaps.errors import ConfigError, ConvergenceError
from distgaps.nobonds import (
    BondSpec,
    JansonInstance,
    MuNuEstimate,
    check_nobonds,
    count_bonds,
    empirical_no_bond_prob,
    estimate_mu_nu,
    janson_exact,
    mu_scaling_survey,
    random_janson_instance,
)
from distgaps.poisson import Seed
from distgaps.regions import Disk, Rectangle

UNIT_SQUARE = Rectangle(0.5, 0.5)


def rect_pair_volume(a: float, b: float, s: float) -> float:
    """Closed form for Int_{X^2} 1[|x-y| <= s] on an a x b rectangle, s <= min(a,b)."""
    assert s <= min(a, b)
    return math.pi * a * b * s * s - (4.0 / 3.0) * (a + b) * s**3 + 0.5 * s**4


def mu_rect_exact(a: float, b: float, eps: float, lo: float, hi: float) -> float:
    return 0.5 * eps * eps * (rect_pair_volume(a, b, hi) - rect_pair_volume(a, b, lo))


# ---------------------------------------------------------------------------
# discrete Janson
# ---------------------------------------------------------------------------


def test_janson_single_edge():
    res = janson_exact(JansonInstance((0.5, 0.5), ((0, 1),)))
    assert res.m_lower == pytest.approx(0.75, rel=1e-15)
    assert res.nu == 0.0
    assert res.p_exact == pytest.approx(0.75, rel=1e-15)
    assert res.bounds_hold


def test_janson_no_edges():
    res = janson_exact(JansonInstance((0.3, 0.2, 0.1), ()))
    assert res.m_lower == 1.0
    assert res.p_exact == pytest.approx(1.0, rel=1e-15)
    assert res.nu == 0.0
    assert res.bounds_hold


def test_janson_triangle_hand_check():
    # triangle on {0,1,2} with p = 0.2 each: survivors are subsets with at
    # most one vertex... any two vertices induce an edge, so
    # p_exact = P[|S| <= 1] = (1-p)^3 + 3 p (1-p)^2
    p = 0.2
    res = janson_exact(JansonInstance((p, p, p), ((0, 1), (0, 2), (1, 2))))
    want = (1 - p) ** 3 + 3 * p * (1 - p) ** 2
    assert res.p_exact == pytest.approx(want, rel=1e-12)
    assert res.m_lower == pytest.approx((1 - p * p) ** 3, rel=1e-12)
    assert res.nu == pytest.approx(3 * p**3, rel=1e-12)
    assert res.bounds_hold


def test_janson_ground_set_cap():
    with pytest.raises(ConfigError):
        JansonInstance(tuple([0.1] * 21), ())


def test_janson_vee_count_star():
    # star K_{1,3} centered at 0: three vees through the center
    p = (0.3, 0.2, 0.25, 0.15)
    res = janson_exact(JansonInstance(p, ((0, 1), (0, 2), (0, 3))))
    want_nu = p[0] * (p[1] * p[2] + p[1] * p[3] + p[2] * p[3])
    assert res.nu == pytest.approx(want_nu, rel=1e-12)
    assert res.bounds_hold


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=200)
def test_janson_bounds_hold_random(seed):
    rng = np.random.default_rng(seed)
    res = janson_exact(random_janson_instance(rng, max_ground_set=10))
    assert res.bounds_hold


# ---------------------------------------------------------------------------
# mu / nu estimation
# ---------------------------------------------------------------------------


def test_mu_zero_when_geometry_forbids():
    est = estimate_mu_nu(Disk(0.4), 1.0, BondSpec(1.0, 2.0), 10_000, Seed(1))
    assert est.mu == 0.0 and est.nu == 0.0
    assert est.mu_stderr == 0.0


def test_mu_matches_rectangle_closed_form():
    est = estimate_mu_nu(UNIT_SQUARE, 5.0, BondSpec(0.4, 0.5), 400_000, Seed(2))
    want = mu_rect_exact(1.0, 1.0, 5.0, 0.4, 0.5)
    assert abs(est.mu - want) <= 4.0 * est.mu_stderr


def test_mu_nu_exact_when_bond_covers_region():
    # bond [0, 2) covers the whole unit square, so mu = (eps^2/2) Area^2 and
    # nu = (eps^3/2) Area^3 exactly
    est = estimate_mu_nu(UNIT_SQUARE, 3.0, BondSpec(0.0, 2.0), 50_000, Seed(3))
    assert abs(est.mu - 0.5 * 9.0) <= 4.0 * est.mu_stderr + 1e-12
    assert abs(est.nu - 0.5 * 27.0) <= 4.0 * est.nu_stderr + 1e-12


def test_mu_quadratic_in_density():
    a = estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 200_000, Seed(4))
    b = estimate_mu_nu(UNIT_SQUARE, 4.0, BondSpec(0.3, 0.4), 200_000, Seed(5))
    rel = math.sqrt((a.mu_stderr / a.mu) ** 2 + (b.mu_stderr / b.mu) ** 2)
    assert b.mu / a.mu == pytest.approx(4.0, rel=4 * rel + 1e-3)


def test_mu_stderr_scales_as_sqrt_samples():
    a = estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 50_000, Seed(6))
    b = estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 200_000, Seed(7))
    assert b.mu_stderr == pytest.approx(0.5 * a.mu_stderr, rel=0.3)


def test_mu_determinism():
    a = estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 20_000, Seed(8))
    b = estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 20_000, Seed(8))
    assert a.mu == b.mu and a.nu == b.nu


def test_mu_requires_min_samples():
    with pytest.raises(ConfigError):
        estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(0.3, 0.4), 100, Seed(1))


def test_mu_signals_no_hits():
    # square of side 1 with a bond interval [1.35, 1.40): the bbox diagonal
    # sqrt(2) admits corner pairs, but annulus partners essentially never
    # land inside, so the estimator must refuse rather than report 0
    with pytest.raises(ConvergenceError):
        estimate_mu_nu(UNIT_SQUARE, 2.0, BondSpec(1.41, 1.42), 10_000, Seed(9))


def test_mu_canonical_bond_on_strip_matches_pinned_bracket():
    # strip at n=1e6 with the canonical bond [100, 100 + 1/16): the closed
    # form gives mu/(eps^2 * n * min(j, n^(3/7)) * 2^-k) = 11.2424; the
    # bracket below is that value +/- 2%
    n, eps, j, k = 10**6, 1e-3, 100.0, 4
    est = estimate_mu_nu(
        Rectangle(n ** (3.0 / 7.0), 0.99 * n ** (4.0 / 7.0)),
        eps, BondSpec(j, j + 2.0**-k), 1_000_000, Seed(21),
    )
    norm = eps**2 * n * min(j, n ** (3.0 / 7.0)) * 2.0**-k
    ratio = est.mu / norm
    assert 11.02 <= ratio <= 11.47
    want = mu_rect_exact(2.0 * n ** (3.0 / 7.0), 2.0 * 0.99 * n ** (4.0 / 7.0),
                         eps, j, j + 2.0**-k)
    assert abs(est.mu - want) <= 4.0 * est.mu_stderr


# ---------------------------------------------------------------------------
# empirical zero-bond probability and the bracket check
# ---------------------------------------------------------------------------


def test_no_bond_prob_density_zero():
    p, ci = empirical_no_bond_prob(UNIT_SQUARE, 0.0, BondSpec(0.1, 0.2), 200, Seed(1))
    assert p == 1.0
    assert ci < 0.05


def test_no_bond_prob_impossible_bond():
    p, _ = empirical_no_bond_prob(Disk(0.4), 3.0, BondSpec(1.0, 2.0), 200, Seed(2))
    assert p == 1.0


def test_count_bonds_brute_and_grid_agree(rng_session):
    pts = rng_session.uniform(0.0, 12.0, size=(2000, 2))
    bond = BondSpec(0.5, 0.9)
    brute = 0
    lo2, hi2 = bond.lo**2, bond.hi**2
    for r in range(len(pts) - 1):
        d2 = ((pts[r + 1:] - pts[r]) ** 2).sum(axis=1)
        brute += int(((d2 >= lo2) & (d2 < hi2)).sum())
    assert count_bonds(pts, bond) == brute


def test_check_nobonds_trivial_cases():
    v = check_nobonds(MuNuEstimate(0.0, 0.0, 0.0, 0.0, 1), 1.0, 0.0)
    assert v.passed and v.lower == 1.0 and v.upper == 1.0

    v = check_nobonds(MuNuEstimate(2.0, 0.1, 0.0, 0.0, 1), math.exp(-1.95), 1e-3)
    assert v.passed

    v = check_nobonds(MuNuEstimate(2.0, 0.01, 0.0, 0.0, 1), 0.5, 0.01)
    assert not v.passed


def test_nobonds_end_to_end_unit_square():
    bond = BondSpec(0.4, 0.5)
    est = estimate_mu_nu(UNIT_SQUARE, 5.0, bond, 400_000, Seed(10))
    p_hat, ci = empirical_no_bond_prob(UNIT_SQUARE, 5.0, bond, 3000, Seed(11))
    verdict = check_nobonds(est, p_hat, ci)
    assert verdict.passed
    # the exp(-mu) side must sit near the closed-form prediction
    want_mu = mu_rect_exact(1.0, 1.0, 5.0, 0.4, 0.5)
    assert est.mu == pytest.approx(want_mu, rel=0.01)


# ---------------------------------------------------------------------------
# scaling survey (smoke here; full tolerance grid in acceptance)
# ---------------------------------------------------------------------------


def test_survey_shapes_and_ratio_sanity():
    rows = mu_scaling_survey(
        10**5, 1e-3, DistanceClass.MODERATE, [(8.0, 3), (16.0, 3)], 200_000, Seed(12)
    )
    assert len(rows) == 2
    for r in rows:
        assert r.mu > 0 and r.mu_stderr / r.mu < 0.05
        assert 5.0 < r.ratio < 20.0      # order-level agreement
        assert r.nu_over_mu > 0


def test_survey_rejects_extra_large():
    with pytest.raises(ConfigError):
        mu_scaling_survey(10**5, 1e-3, DistanceClass.EXTRA_LARGE, [(8.0, 3)], 10_000, Seed(1))
