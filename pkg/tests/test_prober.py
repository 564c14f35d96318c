import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave import prober
from spherewave.decomp import sphere_grid
from spherewave.errors import DomainError, ResolutionError, ValidationError
from spherewave.grid import FREQUENCY, ball_volume, forward_values, make_grid, norm
from spherewave.sobolev import SobolevParams


@given(st.floats(0.1, 0.9), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.integers(0, 1))
def test_atom_constraints(r, cx, cy, axis):
    spec = make_grid(2, (1, 1), 64, 2.0)
    c = np.array([cx, cy])
    a = prober.h1_atom(r, c, spec, axis)
    rep = prober.atom_report(a, r, c)
    assert abs(rep["mean"]) <= 1e-14
    assert rep["sup_over_bound"] <= 1 + 1e-12
    assert rep["outside_max"] == 0


def test_atom_sup_is_attained():
    spec = make_grid(3, (2, 1), 32, 2.0)
    a = prober.h1_atom(0.5, np.zeros(3), spec)
    assert np.max(np.abs(a.values)) == pytest.approx(1 / ball_volume(3, 0.5))


def test_atom_errors():
    spec = make_grid(2, (1, 1), 16, 2.0)
    with pytest.raises(DomainError):
        prober.h1_atom(1.5, np.zeros(2), spec)
    with pytest.raises(DomainError):
        prober.h1_atom(0.05, np.zeros(2), spec)
    with pytest.raises(ValidationError):
        prober.h1_atom(0.5, np.zeros(3), spec)


def test_knapp_profile_shape():
    j = 4
    spec = prober.knapp_grid(j)
    cap = sphere_grid(j, 2)[0]
    f = prober.knapp_profile(cap, spec)
    assert norm(f, 2) == pytest.approx(1.0, rel=1e-12)
    fh = forward_values(spec, f.values)
    xi = spec.radius(FREQUENCY)
    assert np.max(np.abs(fh[(xi < 2 ** (j - 1)) | (xi > 2 ** (j + 1))])) < 1e-12
    with pytest.raises(ResolutionError):
        prober.knapp_profile(cap, make_grid(2, (1, 1), 32, 2.0))


def test_knapp_moments_match_spectral_oracle():
    # |f|^2 spreads ~2^{-j} along the cap direction and ~2^{-j/2} across it
    out = {}
    for j in (3, 5):
        spec = prober.knapp_grid(j)
        cap = sphere_grid(j, 2)[0]
        fh = prober.knapp_spectrum(spec, j, cap.center)
        f = prober.knapp_profile(cap, spec)
        along, perp = prober.second_moments(f, cap.center)
        s_along, s_perp = prober.spectral_second_moments(spec, fh, cap.center)
        assert along == pytest.approx(s_along, rel=0.05)
        assert perp == pytest.approx(s_perp, rel=0.05)
        out[j] = perp / along
    # anisotropy grows like 2^{j/2}: a factor 2 over two levels
    assert out[5] / out[3] == pytest.approx(2.0, rel=0.25)


@given(st.floats(-1, 2), st.floats(0, 1), st.floats(0, 1), st.floats(1.05, 20), st.sampled_from([2, 3, 4]),
       st.floats(0, 1))
def test_inside_theory_monotone_in_alpha(alpha, r, s, p, N, da):
    if prober.inside_theory(alpha, r, s, p, N):
        assert prober.inside_theory(alpha + da, r, s, p, N)


def test_inside_theory_values():
    # |1/p - 1/2| <= (alpha - r + |s|)/(N-1) + 1/2
    assert prober.inside_theory(0.0, 0.0, 0.0, 2.0, 2)
    assert prober.inside_theory(0.0, 0.0, 0.0, 1.0, 2)
    assert prober.inside_theory(-0.5, 0.0, 0.0, 2.0, 2)
    assert not prober.inside_theory(-0.5, 0.0, 0.0, 1.5, 2)
    assert not prober.inside_theory(-0.6, 0.0, 0.0, 1.01, 2)
    assert not prober.inside_theory(-1.0, 0.0, 0.0, 4.0, 3)


def test_parse_range():
    assert prober.parse_range("1.2:0.2:2") == [1.2, 1.4, 1.6, 1.8, 2.0]
    assert prober.parse_range("1, 2.5") == [1.0, 2.5]
    assert prober.parse_range("") == []
    with pytest.raises(ValidationError):
        prober.parse_range("1:0:2")


def test_l2_ratio_bounded_by_symbol_sup(rng):
    spec = make_grid(2, (1, 1), 32, 2.0)
    for alpha, r, s in [(0.5, 0.0, (0.1, 0.1)), (0.0, 0.3, (0.2, 0.0))]:
        tab = prober.omega_multiplier(spec, alpha)
        bound = prober.composite_sup(spec, alpha, r, s)
        for f in prober.random_fields(spec, 5, rng):
            assert prober.norm_ratio(tab, f, SobolevParams(s, 2.0), r, 2.0, sign=1) <= bound * (1 + 1e-9)


def test_norm_ratio_identity(rng):
    spec = make_grid(2, (1, 1), 16, 2.0)
    f = prober.random_fields(spec, 1, rng)[0]
    assert prober.norm_ratio(None, f, SobolevParams((0, 0), 3.0), 0.0, 3.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        prober.norm_ratio(None, f * 0, SobolevParams((0, 0), 2.0), 0.0, 2.0)


def test_region_sweep_rows():
    spec = make_grid(2, (1, 1), 32, 4.0)
    rows = prober.region_sweep([0.0, 0.5], [0.0], [(0.0, 0.0)], [1.5, 2.0], "atoms", spec)
    assert len(rows) == 4
    assert all(r.n_tests >= 1 and r.ratio_max > 0 for r in rows)
    csv = prober.sweep_to_csv(rows)
    assert csv.splitlines()[0] == ",".join(prober.SWEEP_FIELDS)
    assert prober.region_sweep([], [0.0], [(0, 0)], [2.0], "random", spec) == []
    with pytest.raises(ValidationError):
        prober.test_family("bogus", spec, np.random.default_rng(0))


def test_sweep_deterministic():
    spec = make_grid(2, (1, 1), 16, 4.0)
    a = prober.region_sweep([0.2], [0.0], [(0.0, 0.0)], [2.0, 3.0], "random", spec, seed=7)
    b = prober.region_sweep([0.2], [0.0], [(0.0, 0.0)], [2.0, 3.0], "random", spec, seed=7)
    assert prober.sweep_to_csv(a) == prober.sweep_to_csv(b)


def test_knapp_trend_runs():
    slope, vals = prober.knapp_trend(-0.4, 0.0, (0.0, 0.0), 4.0, [2, 3, 4])
    assert len(vals) == 3 and all(v > 0 for v in vals)
    assert math.isfinite(slope)
