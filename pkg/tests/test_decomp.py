import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave import decomp
from spherewave.errors import CoverageError, DomainError, ValidationError


def test_bump_values():
    assert decomp.bump(0.0) == 1.0
    assert decomp.bump(1.0) == 1.0
    assert decomp.bump(-1.7) == decomp.bump(1.7)
    assert decomp.bump(1.5) == pytest.approx(0.5)
    assert decomp.bump(2.0) == 0.0
    t = np.linspace(1, 2, 101)
    assert np.all(np.diff(decomp.bump(t)) <= 0)


@given(st.floats(2.0, 2.0 ** 9))
def test_shells_telescope(xi):
    # sum_{j=1}^{10} phi_j = phi(2^{-10}|xi|) - phi(|xi|) = 1 for 2 <= |xi| <= 2^10
    total = sum(decomp.shell_cutoff(j, xi) for j in range(1, 11))
    assert total == pytest.approx(1.0, abs=1e-14)


@given(st.floats(1e-3, 1e3))
def test_cone_factors_telescope(ratio):
    total = sum(decomp.cone_factor(t, ratio) for t in range(-12, 13))
    assert total == pytest.approx(1.0, abs=1e-14)


def test_cone_zero_block():
    # xi_2 = 0 gives ratio inf and no cone contribution
    assert decomp.cone_cutoff((0,), [np.array([1.0]), np.array([0.0])]) == 0.0
    with pytest.raises(ValidationError):
        decomp.cone_cutoff_norms((0, 1), [1.0, 1.0])


def test_classify_partition():
    s = decomp.classify_partition(8, (1, 4, 7, 9), factors=(2, 1, 3, 1, 1))
    assert s.I == (2,) and s.II == (3, 4) and s.III == (5,)
    assert s.m == 2 and s.M == 3
    assert decomp.classify_partition(8, (0,)).M == 2
    with pytest.raises(DomainError):
        decomp.classify_partition(0, (0,))


@pytest.mark.parametrize("M", [2, 3])
@pytest.mark.parametrize("j", [2, 5, 8])
def test_sphere_spacing_window(j, M):
    pts = decomp.sphere_points(j, M)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)
    sp = decomp.nearest_spacing(pts)
    h = 2.0 ** (-j / 2)
    assert sp.min() >= h / 2 and sp.max() <= h


def test_sphere_counts_frozen():
    assert [len(decomp.sphere_points(j, 2)) for j in (4, 6, 8)] == [34, 67, 135]
    assert [len(decomp.sphere_points(j, 3)) for j in (4, 6, 8)] == [271, 1086, 4345]
    with pytest.raises(ValidationError):
        decomp.sphere_points(3, 4)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 3]), st.integers(2, 7))
def test_caps_partition_of_unity(seed, M, j):
    xi = np.random.default_rng(seed).standard_normal((200, M))
    W = decomp.cap_partition(j, decomp.sphere_points(j, M), xi)
    np.testing.assert_allclose(np.asarray(W.sum(axis=1)).ravel(), 1.0, atol=1e-13)
    assert W.min() >= 0


def test_cap_support_radius():
    j = 6
    pts = decomp.sphere_points(j, 2)
    xi = np.random.default_rng(1).standard_normal((300, 2))
    W = decomp.cap_partition(j, pts, xi).tocoo()
    u = xi / np.linalg.norm(xi, axis=1, keepdims=True)
    d = np.linalg.norm(u[W.row] - pts[W.col], axis=1)
    assert np.all(d[W.data > 0] < 2 * 2.0 ** (-j / 2))


def test_dense_weight_matches_sparse():
    j = 5
    pts = decomp.sphere_points(j, 3)
    u = np.random.default_rng(2).standard_normal((50, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    W = decomp.cap_partition(j, pts, u).toarray()
    for k in (0, 17, 100):
        np.testing.assert_allclose(decomp.cap_weight_dense(j, pts[k], pts, u), W[:, k], atol=1e-14)


def test_coverage_and_domain_errors():
    lonely = np.array([[1.0, 0.0]])
    with pytest.raises(CoverageError):
        decomp.cap_partition(6, lonely, np.array([[-1.0, 0.0]]))
    with pytest.raises(DomainError):
        decomp.cap_partition(6, lonely, np.zeros((1, 2)))


def test_cap_count_in_cone():
    assert decomp.cap_count_in_cone(6, 2, (1, 1), (0,)) == 28
    assert decomp.cap_count_in_cone(6, 3, (2, 1), (1,)) == 494
    with pytest.raises(ValidationError):
        decomp.cap_count_in_cone(6, 3, (1, 1), (0,))


def test_region_levels_and_membership():
    reg = decomp.influence_region(0.125, 1.0, 2, sign=1)
    assert reg.levels == (3, 4, 5, 6, 7)
    e = reg.centers[5][3]
    # x = -s xi^nu sits on the front, at the centre of every box
    assert reg.contains(-e)[0]
    # pushed off the front by more than every slab half-width
    assert not reg.contains(-1.25 * e)[0]
    assert not reg.contains(np.zeros(2))[0]
    assert reg.n_boxes == sum(len(reg.centers[j]) for j in reg.levels)
    with pytest.raises(DomainError):
        decomp.influence_region(1.5)


@pytest.mark.parametrize("N", [2, 3])
def test_volume_quadrature_matches_monte_carlo(N):
    reg = decomp.influence_region(0.25, 1.0, N)
    vol = decomp.region_volume(reg, n_dirs=4096 if N == 2 else 8192)
    mc, se = decomp.region_volume_mc(reg, 100_000, seed=3)
    assert abs(vol - mc) < 5 * se + 0.01 * vol


def test_volume_scales_like_r():
    vals = [decomp.region_volume(decomp.influence_region(r, 1.0, 2)) / r for r in (2.0 ** -3, 2.0 ** -5)]
    assert max(vals) / min(vals) < 1.2


def test_box_volume_bound():
    reg = decomp.influence_region(0.25, 2.0, 2)
    assert reg.box_volume_bound(4) == pytest.approx(2 * 2 * 2 ** -4 * 2 * 2 * 2 ** -2)


def test_union_moment():
    assert decomp._union_moment([(0, 1), (0.5, 2), (3, 4)], 0) == pytest.approx(3.0)
    assert decomp._union_moment([(0, 2)], 1) == pytest.approx(2.0)
