import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from orthoframe import zonal as zn
from orthoframe.gegenbauer import dim_harmonic
from orthoframe.montecarlo import mc_g_t, mc_mean, sample_sphere, zonal_oracle


def exact_moment(n, k):
    """E <x, e>^{2k} on S^{n-1}: prod_{j<k} (2j+1)/(n+2j)."""
    return math.prod((2 * j + 1) / (n + 2 * j) for j in range(k))


@pytest.mark.parametrize("n", [2, 3, 4, 7, 20, 300])
def test_quadrature_mass_and_moments(n):
    rule = zn.make_quadrature(n, 16)
    assert abs(rule.weights.sum() - 1.0) <= 1e-12
    assert np.all(rule.weights > 0)
    assert np.all(np.abs(rule.nodes) < 1)
    for k in range(0, 16):
        assert rule.integrate(rule.nodes ** (2 * k)) == pytest.approx(exact_moment(n, k), rel=1e-11, abs=1e-15)
        assert abs(rule.integrate(rule.nodes ** (2 * k + 1))) <= 1e-13


def test_quadrature_n3_is_legendre():
    rule = zn.make_quadrature(3, 10)
    x, w = np.polynomial.legendre.leggauss(10)
    np.testing.assert_allclose(np.sort(rule.nodes), x, atol=1e-13)
    np.testing.assert_allclose(rule.weights[np.argsort(rule.nodes)], w / 2, atol=1e-13)


def test_quadrature_n2_is_chebyshev():
    k = 9
    rule = zn.make_quadrature(2, k)
    cheb = np.cos((2 * np.arange(1, k + 1) - 1) * np.pi / (2 * k))
    np.testing.assert_allclose(np.sort(rule.nodes), np.sort(cheb), atol=1e-13)
    np.testing.assert_allclose(rule.weights, 1.0 / k, atol=1e-13)


def test_second_moment_against_sampling():
    n = 6
    est = mc_mean(lambda rng, m: sample_sphere(n, rng, m)[:, 0] ** 2, 200_000, seed=11)
    assert est.within(zn.make_quadrature(n, 8).integrate(zn.make_quadrature(n, 8).nodes ** 2))
    assert est.within(1.0 / n)


def test_quadrature_rejects_bad_input():
    with pytest.raises(ValueError):
        zn.make_quadrature(1, 8)
    with pytest.raises(ValueError):
        zn.make_quadrature(5, 0)


def test_densities_of_named_sets():
    r3 = zn.make_quadrature(3, 64)
    assert zn.density(zn.double_cap(3), r3) == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-13)
    assert zn.density(zn.band(3), r3) == pytest.approx(1 / math.sqrt(3), abs=1e-13)
    assert zn.density(zn.full_sphere(9), zn.make_quadrature(9, 64)) == pytest.approx(1.0, abs=1e-13)
    big = 10_000
    gauss = special.erf(1 / math.sqrt(2))
    assert zn.density(zn.band(big), zn.make_quadrature(big, 64)) == pytest.approx(gauss, abs=1e-3)


@pytest.mark.parametrize("n", [3, 5, 12, 80])
@pytest.mark.parametrize("tau", [-0.6, 0.0, 0.2, 0.7])
def test_cap_measure_against_direct_integral(n, tau):
    # independent route: integrate the marginal density by adaptive quadrature
    c = 1.0 / special.beta(0.5, (n - 1) / 2)
    direct, _ = integrate.quad(lambda t: c * (1 - t * t) ** ((n - 3) / 2), tau, 1.0)
    assert zn.cap_measure(n, tau) == pytest.approx(direct, abs=1e-10)
    assert zn.density(zn.cap(n, tau), zn.make_quadrature(n, 64)) == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("n", [4, 10, 50])
def test_measure_constructors(n):
    rule = zn.make_quadrature(n, 64)
    assert zn.density(zn.cap_with_measure(n, 0.2), rule) == pytest.approx(0.2, abs=1e-10)
    assert zn.density(zn.cap_complement(n, 0.05), rule) == pytest.approx(0.95, abs=1e-10)
    assert zn.density(zn.band_with_measure(n, 0.7), rule) == pytest.approx(0.7, abs=1e-10)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        zn.density(zn.band(5), zn.make_quadrature(6, 8))


def test_constant_spectrum():
    n = 7
    spec = zn.funk_hecke_spectrum(zn.full_sphere(n), zn.make_quadrature(n, 64), 12)
    assert spec.coeffs[0] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(spec.coeffs[1:])) <= 1e-12


def test_linear_profile_spectrum():
    n = 5
    prof = zn.ZonalProfile(n, "callable", func=lambda t: t)
    spec = zn.funk_hecke_spectrum(prof, zn.make_quadrature(n, 64), 10)
    assert spec.coeffs[1] == pytest.approx(1.0 / n, abs=1e-13)
    assert np.max(np.abs(np.delete(spec.coeffs, 1))) <= 1e-13
    assert spec.component_norm_sq(1) == pytest.approx(1.0 / n, abs=1e-13)


def test_symmetric_profiles_have_no_odd_part():
    n = 9
    spec = zn.funk_hecke_spectrum(zn.double_cap(n), zn.make_quadrature(n, 80), 20)
    assert np.all(spec.coeffs[1::2] == 0.0)
    # an asymmetric set keeps its odd part
    spec = zn.funk_hecke_spectrum(zn.cap(n, 0.3), zn.make_quadrature(n, 80), 20)
    assert abs(spec.coeffs[1]) > 1e-3


def test_band_degree_two_closed_form():
    # g_2 = (1/2) int_{|t|<a} (3t^2-1)/2 dt = (a^3 - a)/2 with a = 1/sqrt(3)
    a = 1 / math.sqrt(3)
    g2 = (a**3 - a) / 2
    spec = zn.funk_hecke_spectrum(zn.band(3), zn.make_quadrature(3, 64), 4)
    assert spec.coeffs[2] == pytest.approx(g2, abs=1e-13)
    assert zn.projection_inner_product(spec, spec, 2) == pytest.approx(dim_harmonic(3, 2) * g2 * g2, abs=1e-13)


def test_projection_with_constant_vanishes():
    n = 6
    rule = zn.make_quadrature(n, 64)
    one = zn.funk_hecke_spectrum(zn.full_sphere(n), rule, 8)
    other = zn.funk_hecke_spectrum(zn.cap(n, 0.1), rule, 8)
    for d in range(1, 9):
        assert abs(zn.projection_inner_product(one, other, d)) <= 1e-12
    with pytest.raises(ValueError):
        zn.projection_inner_product(one, other, 9)


@pytest.mark.parametrize("name", ["double_cap", "band", "cap", "cap_complement"])
@pytest.mark.parametrize("n", [2, 3, 5, 10, 40])
def test_parseval_and_mean(name, n):
    from orthoframe.suites import fixture_profile

    prof = fixture_profile(name, n)
    rule = zn.make_quadrature(n, zn.default_order())
    spec = zn.funk_hecke_spectrum(prof, rule)
    alpha = zn.density(prof, rule)
    assert spec.coeffs[0] == pytest.approx(alpha, abs=1e-10)
    total = float(np.sum(spec.energies())) + spec.tail_norm_sq
    assert total == pytest.approx(spec.norm_sq, abs=1e-8)
    assert spec.tail_norm_sq >= 0


def test_parseval_error_on_coarse_rule():
    prof = zn.ZonalProfile(4, "callable", func=lambda t: np.cos(40 * t))
    with pytest.raises(zn.ParsevalError):
        zn.funk_hecke_spectrum(prof, zn.make_quadrature(4, 3), 20)


def test_g_t_special_values():
    n = 5
    rule = zn.make_quadrature(n, 64)
    one = zn.funk_hecke_spectrum(zn.full_sphere(n), rule)
    for t in (-1.0, -0.3, 0.0, 0.8, 1.0):
        assert zn.g_t_zonal(one, one, t).value == pytest.approx(1.0, abs=1e-12)
    spec = zn.funk_hecke_spectrum(zn.band(n), rule)
    g1 = zn.g_t_zonal(spec, spec, 1.0)
    assert abs(g1.value - zn.density(zn.band(n), rule)) <= g1.tail_bound + 1e-12
    assert zn.g_t_zonal(spec, spec, 0.0).tail_bound <= 15 / n**3
    with pytest.raises(ValueError):
        zn.g_t_zonal(spec, spec, 1.5)
    with pytest.raises(ValueError):
        zn.g_t_zonal(spec, zn.funk_hecke_spectrum(zn.band(6), zn.make_quadrature(6, 64)), 0.0)


def test_g_t_band_against_pairs():
    n = 5
    prof = zn.band(n)
    spec = zn.funk_hecke_spectrum(prof, zn.make_quadrature(n, 64))
    exact = zn.g_t_zonal(spec, spec, 0.0)
    oracle = zonal_oracle(prof)
    est = mc_g_t(oracle, oracle, 0.0, 200_000, seed=5)
    assert est.within(exact.value, 3.0, exact.tail_bound)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 30),
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=6),
    st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]),
)
def test_g_t_in_probability_range(n, cuts, t):
    bp = tuple(sorted(cuts)[: 2 * (len(cuts) // 2)])
    prof = zn.ZonalProfile(n, "indicator", bp)
    spec = zn.funk_hecke_spectrum(prof, zn.make_quadrature(n, zn.default_order()))
    g = zn.g_t_zonal(spec, spec, t)
    assert -g.tail_bound - 1e-9 <= g.value <= 1 + g.tail_bound + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60), st.lists(st.floats(-1, 1, allow_nan=False), min_size=0, max_size=8))
def test_complement_density(n, cuts):
    bp = tuple(sorted(cuts)[: 2 * (len(cuts) // 2)])
    prof = zn.ZonalProfile(n, "indicator", bp)
    rule = zn.make_quadrature(n, 64)
    assert zn.density(prof, rule) + zn.density(prof.complement(), rule) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60), st.lists(st.floats(-1, 1, allow_nan=False), min_size=0, max_size=8), st.booleans())
def test_profile_json_round_trip(n, cuts, sym):
    bp = sorted(cuts)[: 2 * (len(cuts) // 2)]
    if sym:
        bp = sorted([-abs(b) for b in bp[: len(bp) // 2]] + [abs(b) for b in bp[: len(bp) // 2]])
    prof = zn.ZonalProfile(n, "indicator", tuple(bp), symmetric=sym)
    again = zn.ZonalProfile.from_json(json.dumps(prof.to_json()))
    assert again == prof


def test_profile_validation():
    with pytest.raises(ValueError):
        zn.ZonalProfile(3, "indicator", (0.5, 0.1))
    with pytest.raises(ValueError):
        zn.ZonalProfile(3, "indicator", (0.1,))
    with pytest.raises(ValueError):
        zn.ZonalProfile(3, "indicator", (-0.2, 0.5), symmetric=True)
    with pytest.raises(ValueError):
        zn.ZonalProfile.from_json({"n": 3, "kind": "indicator", "breakpoints": [], "colour": 1})
    with pytest.raises(ValueError):
        zn.ZonalProfile.from_json({"n": 3, "kind": "indicator"})


def test_restricted_slice_profile():
    # slice of a band through a point orthogonal to the axis: axis projects with norm 1
    prof = zn.band(5)
    assert prof.restricted(4, 1.0).breakpoints == prof.breakpoints
    half = prof.restricted(4, 0.5)
    assert half.breakpoints == pytest.approx((-2 / math.sqrt(5), 2 / math.sqrt(5)))
    assert zn.cap(5, 0.3).restricted(4, 0.0).breakpoints == ()
