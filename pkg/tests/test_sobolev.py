import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave.errors import ContractError, ValidationError
from spherewave.grid import Field, from_function, make_grid, norm, transform
from spherewave.sobolev import SobolevParams, make_sobolev_params, sobolev_norm, validate_s_params


def test_valid_and_invalid():
    p, probs = validate_s_params((2, 1), (0.4, 0.3), 2)
    assert probs == [] and p.s_total == pytest.approx(0.7)
    _, probs = validate_s_params((1, 1), (-0.1, 0.2), 2)
    assert any("s_1" in m for m in probs)
    _, probs = validate_s_params((1, 1), (0.1, 0.1), 1.0)
    assert any("p =" in m for m in probs)
    # |s| <= (N-1)/2 triggers the per-block window
    _, probs = validate_s_params((2, 1), (0.05, 0.3), 2)
    assert probs
    with pytest.raises(ValidationError):
        make_sobolev_params((1, 1), (0.1,), 2)


def test_large_s_has_no_window():
    _, probs = validate_s_params((1, 1), (3.0, 0.0), 2)
    assert probs == []


def test_zero_s_is_plain_norm():
    spec = make_grid(2, (1, 1), 16, 1.0)
    rng = np.random.default_rng(0)
    f = Field.wrap(spec, rng.standard_normal(spec.shape))
    assert sobolev_norm(f, SobolevParams((0, 0), 3.0)) == norm(f, 3.0)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(-3, 3), st.integers(-3, 3))
def test_mode_norm(s1, s2, k1, k2):
    spec = make_grid(2, (1, 1), 16, 2.0)
    k = (k1 / 4, k2 / 4)
    f = from_function(spec, lambda x, y: np.exp(2j * np.pi * (k[0] * x + k[1] * y)))
    val = sobolev_norm(f, SobolevParams((s1, s2), 2.0))
    ref = 4.0 * (1 + k[0] ** 2) ** (s1 / 2) * (1 + k[1] ** 2) ** (s2 / 2)
    assert val == pytest.approx(ref, rel=1e-12)


def test_monotone_in_s(rng):
    spec = make_grid(2, (1, 1), 16, 2.0)
    f = Field.wrap(spec, rng.standard_normal(spec.shape))
    vals = [sobolev_norm(f, SobolevParams((s, s), 2.0)) for s in (0.0, 0.2, 0.5, 1.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_contracts():
    spec = make_grid(2, (1, 1), 8, 1.0)
    f = Field.wrap(spec, np.ones(spec.shape))
    with pytest.raises(ContractError):
        sobolev_norm(transform(f), SobolevParams((0.1, 0.1), 2))
    with pytest.raises(ValidationError):
        sobolev_norm(f, SobolevParams((0.1,), 2))
