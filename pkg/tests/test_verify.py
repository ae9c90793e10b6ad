"""Inequality verification layer: equality cases, sweeps, suites."""

import math

import numpy as np
import pytest
from scipy.special import j0, j1, jn_zeros

from finsler_sharp import verify as V
from finsler_sharp.constants import (
    eta,
    l1_extremal_height,
    l1_norm_limit,
    morrey_l1_constant,
    morrey_support_constant,
    support_energy_limit,
)
from finsler_sharp.manifold import euclidean_instance, minkowski_instance
from finsler_sharp.norms import WulffShape, lp_norm
from finsler_sharp.rearrange import (
    RadialTestFunction,
    l1_extremal_profile,
    morrey_extremal_profile,
    profile_from_descriptor,
    random_decreasing_profile,
    scale_profile,
)

R_GRID = (1.0, 2.0, 4.0, 8.0)


# -- pointwise checks -------------------------------------------------------


@pytest.mark.parametrize("p,n", [(4.0, 2), (3.0, 2), (5.0, 3)])
def test_support_extremal_attains_equality(p, n, l4_2, e3):
    m = l4_2 if n == 2 else e3
    u = morrey_extremal_profile(p, n, 1.0)
    rep = V.verify_morrey_support(m, u, p)
    assert rep.passed
    assert rep.ratio == pytest.approx(1.0, rel=1e-8)
    assert rep.sharp_constant == pytest.approx(morrey_support_constant(p, n, 1.0))
    assert rep.direction == "upper"
    assert rep.params["avr"] == pytest.approx(1.0)


def test_support_generic_profile_strictly_below(e2, rng):
    u = random_decreasing_profile(rng)
    rep = V.verify_morrey_support(e2, u, 4.0)
    assert rep.passed
    assert rep.ratio < 1.0


def test_l1_extremal_attains_equality(e2):
    p = 4.0
    u = l1_extremal_profile(p, 2, 1.0)
    rep = V.verify_morrey_l1(e2, u, p)
    assert rep.passed
    # profile norm quadrature carries the l1 floor
    assert rep.ratio == pytest.approx(1.0, rel=5e-6)
    assert rep.params["eta"] == pytest.approx(eta(p, 2))


def test_reports_are_scale_invariant(e2, rng):
    u = random_decreasing_profile(rng)
    for check in (V.verify_morrey_support, V.verify_morrey_l1):
        r1 = check(e2, u, 4.0)
        r3 = check(e2, scale_profile(u, 3.0), 4.0)
        assert r3.ratio == pytest.approx(r1.ratio, rel=1e-9)


def test_subcritical_exponent_rejected(e2, rng):
    u = random_decreasing_profile(rng)
    with pytest.raises(ValueError):
        V.verify_morrey_support(e2, u, 2.0)
    with pytest.raises(ValueError):
        V.verify_morrey_l1(e2, u, 1.5)


def test_explicit_avr_scales_the_constant(e2):
    u = morrey_extremal_profile(4.0, 2, 1.0)
    full = V.verify_morrey_support(e2, u, 4.0)
    half = V.verify_morrey_support(e2, u, 4.0, avr_value=0.5)
    # weaker volume growth loosens the constant by avr^(-1/n)
    assert half.rhs == pytest.approx(full.rhs * 0.5 ** (-1.0 / 2.0), rel=1e-12)
    assert half.params["avr"] == pytest.approx(0.5)


# -- sharpness sweeps -------------------------------------------------------


def test_support_sweep_hits_target(e2, l4_2):
    for m in (e2, l4_2):
        sw = V.sharpness_sweep_support(m, 4.0, R_GRID)
        assert sw.passed
        assert sw.target == pytest.approx(support_energy_limit(4.0, 2, 1.0))
        assert sw.limit == pytest.approx(sw.target, rel=1e-9)
        for row in sw.rows:
            # Minkowski volumes are exact, so every point sits at the limit
            assert row["scaled_energy"] == pytest.approx(sw.target, rel=1e-9)
            assert row["ratio"] == pytest.approx(1.0, rel=1e-9)


def test_l1_sweep_hits_target(e2):
    sw = V.sharpness_sweep_l1(e2, 4.0, R_GRID)
    assert sw.passed
    assert sw.target == pytest.approx(morrey_l1_constant(4.0, 2, 1.0))
    assert sw.limit == pytest.approx(sw.target, rel=1e-5)
    last = sw.rows[-1]
    assert last["scaled_l1"] == pytest.approx(l1_norm_limit(4.0, 2, 1.0), rel=1e-3)
    height = l1_extremal_height(4.0, 2)
    assert all(row["sup_deviation"] <= 1e-9 * height for row in sw.rows)


def test_sweep_rejects_bad_input(e2):
    with pytest.raises(ValueError):
        V.sharpness_sweep_support(e2, 4.0, [])
    with pytest.raises(ValueError):
        V.sharpness_sweep_support(e2, 1.5, R_GRID)
    with pytest.raises(ValueError):
        V.sharpness_sweep_l1(e2, 2.0, R_GRID)


# -- Hardy ------------------------------------------------------------------


def test_hardy_family_approaches_equality(e3):
    ratios = []
    for delta in (0.2, 0.1, 0.05):
        rep = V.verify_hardy(e3, V.hardy_test_family(2.0, 3, delta), 2.0)
        assert rep.passed
        assert rep.direction == "lower"
        ratios.append(rep.ratio)
    # tightening delta drives lhs/rhs down toward 1 without crossing
    assert ratios[0] > ratios[1] > ratios[2] > 1.0


def test_hardy_family_domain(e3):
    with pytest.raises(ValueError):
        V.hardy_test_family(2.0, 3, 0.0)
    with pytest.raises(ValueError):
        V.hardy_test_family(2.0, 3, 0.6)  # >= (n-p)/p


def test_hardy_exponent_domain(e3, rng):
    u = random_decreasing_profile(rng)
    with pytest.raises(ValueError):
        V.verify_hardy(e3, u, 3.0)  # p = n
    with pytest.raises(ValueError):
        V.verify_hardy(e3, u, 1.0)


def test_hardy_pole_must_match_center(e3, rng):
    u = random_decreasing_profile(rng)
    with pytest.raises(ValueError):
        V.verify_hardy(e3, u, 2.0, x0=[0.5, 0.0, 0.0])


# -- shifted Poincare bound -------------------------------------------------


def _j0_eigenprofile():
    j01 = float(jn_zeros(0, 1)[0])

    def g(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, j0(j01 * r), 0.0)

    def dg(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, -j01 * j1(j01 * r), 0.0)

    return RadialTestFunction(
        profile=g, derivative=dg, support_radius=1.0, label="j0_eigen"
    )


def test_bpv_eigenprofile_attains_equality(e2):
    rep = V.verify_bpv(e2, 1.0, _j0_eigenprofile(), mu=0.0)
    assert rep.passed
    assert rep.ratio == pytest.approx(1.0, rel=1e-9)
    assert rep.diagnostics["rayleigh"] == pytest.approx(rep.sharp_constant, rel=1e-9)


def test_bpv_generic_profile_passes_with_slack(e2, rng):
    u = random_decreasing_profile(rng)
    rep = V.verify_bpv(e2, u.support_radius, u, mu=0.0)
    assert rep.passed
    assert rep.ratio > 1.0


def test_bpv_accepts_wulff_domain(l4_2, rng):
    u = random_decreasing_profile(rng)
    shape = WulffShape(norm=l4_2.norm, radius=u.support_radius)
    rep = V.verify_bpv(l4_2, shape, u, mu=0.0)
    assert rep.passed
    assert rep.params["vol"] == pytest.approx(shape.volume())


def test_bpv_domain_errors(e2, rng):
    u = random_decreasing_profile(rng)
    with pytest.raises(ValueError):
        V.verify_bpv(e2, -1.0, u)
    with pytest.raises(ValueError):
        V.verify_bpv(e2, 0.5 * u.support_radius, u)  # support sticks out


# -- anisotropic isoperimetric ----------------------------------------------


def test_isoperimetric_equality_on_own_ball(e2, l4_2, feps2):
    for m in (e2, l4_2, feps2):
        rep = V.verify_isoperimetric(m, {"kind": "wulff", "radius": 1.0})
        assert rep.passed
        assert rep.ratio == pytest.approx(1.0, abs=1e-3)
        assert rep.diagnostics["equality"]
        assert rep.diagnostics["equality_with_unit_avr"]


def test_isoperimetric_strict_on_other_shapes(e2):
    rect = V.verify_isoperimetric(e2, {"kind": "rectangle", "a": 2.0, "b": 1.0})
    ell = V.verify_isoperimetric(e2, {"kind": "ellipse", "a": 2.0, "b": 1.0})
    for rep in (rect, ell):
        assert rep.passed
        assert rep.ratio > 1.0 + 1e-6
        assert not rep.diagnostics["equality"]


def test_isoperimetric_euclidean_ball_3d(e3):
    rep = V.verify_isoperimetric(e3, {"kind": "ball", "radius": 1.0}, n_quad=2048)
    assert rep.passed
    assert rep.ratio == pytest.approx(1.0, abs=1e-3)


def test_isoperimetric_needs_normalized_norm():
    raw = minkowski_instance(lp_norm(2, 4.0))
    with pytest.raises(ValueError):
        V.verify_isoperimetric(raw, {"kind": "wulff", "radius": 1.0})


def test_isoperimetric_rejects_bad_shapes(e2, e3):
    with pytest.raises(ValueError):
        V.verify_isoperimetric(e2, {"kind": "torus"})
    with pytest.raises(ValueError):
        V.verify_isoperimetric(e3, {"kind": "rectangle", "a": 1.0, "b": 1.0})
    with pytest.raises(ValueError):
        V.verify_isoperimetric(e2, "circle")


# -- randomized suites ------------------------------------------------------


@pytest.mark.parametrize(
    "name",
    ["morrey_support", "morrey_l1", "hardy", "bpv",
     "polya_szego", "hlp", "layer_cake", "equimeasurability"],
)
def test_randomized_suite_all_pass(name, e2):
    reps = V.randomized_suite(e2, name, n_draws=10, seed=11)
    assert len(reps) == 10
    assert all(r.passed for r in reps)
    assert [r.diagnostics["draw"] for r in reps] == list(range(10))
    assert all(r.diagnostics["seed"] == 11 for r in reps)


def test_suite_with_singular_potential(e3):
    reps = V.randomized_suite(e3, "bpv", n_draws=10, seed=3)
    assert all(r.passed for r in reps)
    assert any(r.params["mu"] > 0 for r in reps)


def test_suite_is_deterministic_across_workers(e2):
    a = V.randomized_suite(e2, "morrey_support", n_draws=8, seed=5, workers=1)
    b = V.randomized_suite(e2, "morrey_support", n_draws=8, seed=5, workers=2)
    assert [r.lhs for r in a] == [r.lhs for r in b]
    assert [r.rhs for r in a] == [r.rhs for r in b]


def test_suite_rejects_unsupported(e2):
    with pytest.raises(ValueError):
        V.randomized_suite(e2, "isoperimetric", n_draws=2)
    with pytest.raises(ValueError):
        V.randomized_suite(e2, "no_such_bound", n_draws=2)


# -- dispatcher -------------------------------------------------------------


def test_run_inequality_dispatch(e2, rng):
    u = morrey_extremal_profile(4.0, 2, 1.0)
    rep = V.run_inequality("morrey-support", e2, u, p=4.0)
    assert rep.inequality == "morrey_support"
    assert rep.ratio == pytest.approx(1.0, rel=1e-8)

    v = random_decreasing_profile(rng)
    bpv = V.run_inequality("bpv", e2, v)  # domain defaults to the support ball
    assert bpv.params["radius"] == pytest.approx(v.support_radius)

    iso = V.run_inequality("isoperimetric", e2, shape={"kind": "ball", "radius": 2.0})
    assert iso.diagnostics["equality"]

    hlp = V.run_inequality("hlp", e2, v, p=2.0)  # gaussian default weight
    assert hlp.passed

    with pytest.raises(ValueError):
        V.run_inequality("no_such_bound", e2, u, p=4.0)


def test_split_rejects_unknown_representation(e2):
    with pytest.raises(TypeError):
        V.verify_morrey_support(e2, np.ones(4), 4.0)


def test_divergent_energy_is_flagged_vacuous(e2):
    # profile with infinite p-energy near the edge: u = (1 - rho)^(1/8)
    def g(rho):
        rho = np.asarray(rho, dtype=float)
        return np.clip(1.0 - rho, 0.0, None) ** 0.125

    def dg(rho):
        rho = np.asarray(rho, dtype=float)
        inner = -0.125 * np.clip(1.0 - rho, 1e-300, None) ** -0.875
        return np.where((rho > 0) & (rho < 1.0), inner, 0.0)

    u = RadialTestFunction(profile=g, derivative=dg, support_radius=1.0,
                           kinks=(1.0,), label="edge_cusp")
    rep = V.verify_morrey_support(e2, u, 16.0)
    if rep.diagnostics.get("divergent_energy"):
        assert rep.passed and math.isinf(rep.rhs)
    else:
        assert rep.passed


def test_cone_profile_through_dispatcher(e2):
    u = profile_from_descriptor({"kind": "cone", "R": 1.0, "height": 1.0})
    rep = V.run_inequality("morrey_l1", e2, u, p=4.0)
    assert rep.passed and rep.ratio < 1.0
