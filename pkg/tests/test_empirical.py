import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import norm

from ccca.copulas import CopulaModel, sample_copula
from ccca.empirical import (
    Bandwidths,
    bandwidths,
    cos_index,
    cos_matrix,
    empirical_copula,
    frechet_lambda,
    kernel_copula_density,
    kernel_marginal_cdf,
    pseudo_observations,
    smoothed_pseudo_observations,
)
from ccca.exceptions import DegenerateSignalError

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def samples(min_size=10, max_size=80):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite))
    )


# pseudo-observations --------------------------------------------------------


def test_pseudo_observations_rank_over_n():
    p = pseudo_observations([3, 1, 2], [30, 10, 20])
    np.testing.assert_allclose(p.u, [1.0, 1 / 3, 2 / 3])
    np.testing.assert_allclose(p.v, p.u)
    np.testing.assert_allclose(pseudo_observations(np.arange(5.0), np.arange(5.0)).u, np.arange(1, 6) / 5)


def test_pseudo_observations_average_ties():
    np.testing.assert_allclose(pseudo_observations([1, 1, 2], [0, 1, 2]).u, [0.5, 0.5, 1.0])


def test_pseudo_observations_validation():
    with pytest.raises(ValueError):
        pseudo_observations([1.0], [2.0])
    with pytest.raises(ValueError):
        pseudo_observations([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        pseudo_observations([1.0, np.nan], [1.0, 2.0])


# empirical copula -----------------------------------------------------------


def test_empirical_copula_corners_and_comonotone_centre():
    x = np.random.default_rng(0).normal(size=200)
    p = pseudo_observations(x, x ** 3)
    assert empirical_copula(p, 1.0, 1.0) == 1.0
    assert empirical_copula(p, 0.0, 0.0) == 0.0
    assert abs(empirical_copula(p, 0.5, 0.5) - 0.5) <= 1 / 200


@settings(max_examples=40, deadline=None)
@given(samples(2, 40))
def test_empirical_copula_matches_brute_force(xy):
    x, y = xy
    p = pseudo_observations(x, y)
    c = empirical_copula(p, p.u, p.v)
    brute = [np.mean((p.u <= p.u[j]) & (p.v <= p.v[j])) for j in range(len(p))]
    np.testing.assert_allclose(c, brute)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60).flatmap(lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))))
def test_empirical_copula_frechet_slack_without_ties(xy):
    p = pseudo_observations(np.array(xy[0], float), np.array(xy[1], float))
    n = len(p)
    c = empirical_copula(p, p.u, p.v)
    assert np.all(c <= np.minimum(p.u, p.v) + 1 / n + 1e-12)
    assert np.all(c >= np.maximum(p.u + p.v - 1, 0) - 1 / n - 1e-12)


# Frechet lambda -------------------------------------------------------------


def test_frechet_lambda_examples():
    assert frechet_lambda(0.4 * 0.6, 0.4, 0.6) == 0.0
    assert frechet_lambda(0.4, 0.4, 0.6) == 1.0
    assert frechet_lambda(0.5, 0.7, 0.8) == pytest.approx(1.0)
    assert frechet_lambda(0.3, 1.0, 0.3) == 0.0  # zero denominator
    np.testing.assert_allclose(frechet_lambda([0.24, 0.4], [0.4, 0.4], [0.6, 0.6]), [0.0, 1.0])


@settings(max_examples=200, deadline=None)
@given(u=st.floats(0.01, 0.99), v=st.floats(0.01, 0.99), t=st.floats(0.0, 1.0))
def test_frechet_lambda_in_unit_interval(u, v, t):
    lo, hi = max(u + v - 1, 0.0), min(u, v)
    lam = frechet_lambda(lo + t * (hi - lo), u, v)
    assert -1e-9 <= lam <= 1 + 1e-9


# CoS ------------------------------------------------------------------------


def test_cos_functional_dependence_is_one():
    x = np.random.default_rng(1).uniform(0.1, 3.0, 100)
    assert cos_index(x, x) == 1.0
    assert cos_index(x, -x) == 1.0
    assert cos_index(x, x ** 3) == 1.0


def test_cos_independent_small():
    vals = [cos_index(*np.random.default_rng(s).random((2, 5000))) for s in range(100)]
    assert np.percentile(vals, 95) < 0.1


def test_cos_gaussian_point_seven():
    uv = sample_copula(CopulaModel("gaussian", 0.7), 5000, 3)
    assert cos_index(uv[:, 0], uv[:, 1]) == pytest.approx(0.7, abs=0.05)


def test_cos_validation():
    with pytest.raises(ValueError, match="at least 10"):
        cos_index(np.arange(9.0), np.arange(9.0))
    with pytest.raises(ValueError, match="length mismatch"):
        cos_index(np.arange(10.0), np.arange(11.0))


@settings(max_examples=80, deadline=None)
@given(samples())
def test_cos_in_unit_interval(xy):
    assert 0.0 <= cos_index(*xy) <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(10, 80).flatmap(lambda n: st.tuples(*[arrays(float, n, elements=st.integers(-300, 300))] * 2)))
def test_cos_rank_invariant(xy):
    # integer-valued data keeps these transforms strictly increasing in floating point
    x, y = xy
    c = cos_index(x, y)
    assert cos_index(np.exp(x / 100.0), y) == c
    assert cos_index(x, y ** 3 + 7.0) == c


def test_cos_approximately_symmetric():
    for seed, (fam, a) in enumerate([("gaussian", 0.5), ("clayton", 2.0), ("frank", 6.0), ("gumbel", 3.0)]):
        uv = sample_copula(CopulaModel(fam, a), 3000, seed)
        assert abs(cos_index(uv[:, 0], uv[:, 1]) - cos_index(uv[:, 1], uv[:, 0])) <= 0.05


def test_cos_handles_heavy_ties():
    rng = np.random.default_rng(4)
    x = rng.integers(0, 3, 200).astype(float)
    y = x + rng.integers(0, 2, 200)
    assert 0.0 <= cos_index(x, y) <= 1.0
    assert cos_index(np.zeros(20), np.arange(20.0)) == 0.0
    assert cos_index(np.arange(20.0), np.ones(20)) == 0.0


def test_cos_matrix_diagonal_and_entries():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(3, 300))
    X[1] = X[0] ** 3
    M = cos_matrix(X)
    np.testing.assert_array_equal(np.diag(M), 1.0)
    assert M[0, 1] == 1.0 and M[1, 0] == 1.0
    assert M[0, 2] == cos_index(X[0], X[2])


# kernel marginal CDF --------------------------------------------------------


def test_kernel_cdf_limits_and_symmetry():
    s = np.array([-2.0, 2.0])
    assert kernel_marginal_cdf(s, 0.0, 0.7) == 0.5
    assert kernel_marginal_cdf(s, 1e6, 0.7) == 1.0
    assert kernel_marginal_cdf(s, -1e6, 0.7) == 0.0


def test_kernel_cdf_standard_normal_median():
    s = np.random.default_rng(6).normal(size=5000)
    assert kernel_marginal_cdf(s, 0.0, 0.2) == pytest.approx(0.5, abs=0.02)


def test_kernel_cdf_matches_direct_formula_and_is_monotone():
    rng = np.random.default_rng(7)
    s = rng.gamma(2.0, size=300)
    z = np.linspace(-1, 10, 100)
    F = kernel_marginal_cdf(s, z, 0.4)
    np.testing.assert_allclose(F, norm.cdf((z[:, None] - s[None, :]) / 0.4).mean(axis=1), rtol=1e-12)
    assert np.all(np.diff(F) >= 0)


def test_kernel_cdf_validation():
    with pytest.raises(ValueError):
        kernel_marginal_cdf([1.0, 2.0], 0.0, 0.0)
    with pytest.raises(ValueError):
        kernel_marginal_cdf([1.0], 0.0, 1.0)


# kernel copula density ------------------------------------------------------


def test_kde_peak_value():
    P = np.full((2, 50), 0.5)
    assert kernel_copula_density(P, [0.5, 0.5], (0.1, 0.1)) == pytest.approx(1 / (2 * np.pi * 0.01))


def test_kde_matches_direct_formula():
    rng = np.random.default_rng(8)
    P = rng.random((2, 200))
    q = rng.random((2, 7))
    H = (0.11, 0.07)
    direct = (norm.pdf((q[0][:, None] - P[0]) / H[0]) * norm.pdf((q[1][:, None] - P[1]) / H[1])).mean(axis=1)
    direct /= H[0] * H[1]
    np.testing.assert_allclose(kernel_copula_density(P, q, Bandwidths(h=np.ones(2), H=np.array(H))), direct,
                               rtol=1e-12)


def test_kde_independence_interior_average():
    P = np.random.default_rng(9).random((2, 2000))
    g = np.linspace(0.2, 0.8, 10)
    U, V = np.meshgrid(g, g)
    vals = kernel_copula_density(P, np.vstack([U.ravel(), V.ravel()]), (0.1, 0.1))
    assert vals.mean() == pytest.approx(1.0, abs=0.15)


def test_kde_far_from_comonotone_cloud():
    t = (np.arange(1, 2001)) / 2000
    assert kernel_copula_density(np.vstack([t, t]), [0.99, 0.01], (0.1, 0.1)) < 0.05


def test_kde_validation():
    with pytest.raises(ValueError):
        kernel_copula_density(np.ones((3, 10)), [0.5, 0.5], (0.1, 0.1))
    with pytest.raises(ValueError):
        kernel_copula_density(np.ones((2, 10)), [0.5, 0.5], (0.1, 0.0))


# bandwidths -----------------------------------------------------------------


def test_bandwidths_formulae():
    rng = np.random.default_rng(10)
    Y = rng.normal(size=(2, 500))
    bw = bandwidths(Y)
    F, _ = smoothed_pseudo_observations(Y)
    np.testing.assert_allclose(bw.h, (4 / 3) ** 0.2 * 500 ** -0.2 * Y.std(axis=1, ddof=1))
    np.testing.assert_allclose(bw.H, 500 ** (-1 / 6) * F.std(axis=1, ddof=1))


def test_bandwidth_scale_equivariance():
    Y = np.random.default_rng(11).normal(size=(2, 300))
    a, b = bandwidths(Y), bandwidths(np.diag([2.0, 1.0]) @ Y)
    np.testing.assert_allclose(b.h, [2 * a.h[0], a.h[1]])
    np.testing.assert_allclose(b.H, a.H, rtol=1e-12)


def test_bandwidth_degenerate_channel():
    Y = np.vstack([np.ones(50), np.arange(50.0)])
    with pytest.raises(DegenerateSignalError, match="channel 0"):
        bandwidths(Y)
