import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave.errors import ContractError, DomainError, ValidationError
from spherewave.grid import (FREQUENCY, PHYSICAL, Field, ball_volume, field_to_csv, from_function,
                             load_field, make_grid, norm, norm_values, save_field, sphere_area,
                             transform)


def test_spec_geometry():
    spec = make_grid(2, (1, 1), 64, 4.0)
    assert spec.shape == (64, 64)
    assert spec.spacing == pytest.approx(0.125)
    assert spec.freq_spacing == pytest.approx(0.125)
    assert spec.nyquist == pytest.approx(4.0)
    assert spec.axis()[0] == -4.0
    assert spec.freq_axis()[0] == 0.0


def test_invalid_specs():
    with pytest.raises(ValidationError):
        make_grid(3, (1, 1), 16, 1.0)
    with pytest.raises(ValidationError):
        make_grid(2, (1, 1), 15, 1.0)


def test_gaussian_is_self_dual():
    # exp(-pi |x|^2) transforms to exp(-pi |xi|^2) in this convention
    spec = make_grid(2, (1, 1), 128, 6.0)
    f = from_function(spec, lambda x, y: np.exp(-np.pi * (x * x + y * y)))
    F = transform(f)
    xi = spec.radius(FREQUENCY)
    np.testing.assert_allclose(F.values, np.exp(-np.pi * xi * xi), atol=1e-12)


def test_shifted_gaussian_phase():
    spec = make_grid(1, (1,), 128, 8.0)
    x0 = 0.75
    f = from_function(spec, lambda x: np.exp(-np.pi * (x - x0) ** 2))
    xi = spec.frequencies()[0]
    np.testing.assert_allclose(transform(f).values, np.exp(-2j * np.pi * x0 * xi - np.pi * xi * xi), atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(1, (1,)), (2, (1, 1)), (3, (2, 1))]))
def test_roundtrip_and_plancherel(seed, geom):
    dim, factors = geom
    spec = make_grid(dim, factors, 8, 1.5)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    f = Field.wrap(spec, v)
    F = transform(f)
    back = transform(F, "inverse")
    np.testing.assert_allclose(back.values, v, atol=1e-12)
    assert norm(f, 2) == pytest.approx(norm_values(spec, F.values, 2, FREQUENCY), rel=1e-12)


def test_side_contracts():
    spec = make_grid(1, (1,), 8, 1.0)
    f = Field.wrap(spec, np.ones(8))
    with pytest.raises(ContractError):
        transform(f, "inverse")
    with pytest.raises(ContractError):
        norm(transform(f))
    with pytest.raises(ValidationError):
        transform(f, "sideways")
    with pytest.raises(ContractError):
        f + transform(f)


def test_mixed_norm_of_product():
    spec = make_grid(2, (1, 1), 32, 2.0)
    h = spec.spacing
    a = np.abs(np.sin(spec.axis())) + 0.1
    b = np.exp(-spec.axis() ** 2)
    f = Field.wrap(spec, a[:, None] * b[None, :])
    # a product factorises: ||a||_{p1} ||b||_{p2}
    ref = (np.sum(a ** 3) * h) ** (1 / 3) * (np.sum(b ** 1.5) * h) ** (1 / 1.5)
    assert norm(f, (3, 1.5)) == pytest.approx(ref, rel=1e-12)
    assert norm(f, (math.inf, math.inf)) == pytest.approx(a.max() * b.max())
    with pytest.raises(DomainError):
        norm(f, 0.5)


def test_constant_norm():
    spec = make_grid(3, (3,), 8, 1.0)
    f = Field.wrap(spec, np.ones(spec.shape))
    assert norm(f, 2) == pytest.approx(2.0 ** 1.5)


def test_serialization_roundtrip(tmp_path):
    spec = make_grid(2, (1, 1), 8, 1.0)
    rng = np.random.default_rng(0)
    f = Field.wrap(spec, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape))
    p = tmp_path / "f.bin"
    save_field(f, p)
    g = load_field(p)
    assert g.spec == spec and g.side == PHYSICAL
    np.testing.assert_array_equal(g.values, f.values)
    buf = io.BytesIO()
    save_field(f, buf)
    buf.seek(0)
    np.testing.assert_array_equal(load_field(buf).values, f.values)
    csv = field_to_csv(f)
    assert csv.splitlines()[0].startswith("i0")
    assert len(csv.splitlines()) == spec.n_points + 1


def test_truncated_payload(tmp_path):
    spec = make_grid(1, (1,), 8, 1.0)
    p = tmp_path / "f.bin"
    save_field(Field.wrap(spec, np.ones(8)), p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValidationError):
        load_field(p)


def test_ball_and_sphere():
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(32 * math.pi / 3)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def _gaussian_error(M, L):
    spec = make_grid(2, (1, 1), M, L)
    F = transform(from_function(spec, lambda x, y: np.exp(-np.pi * (x * x + y * y))))
    xi = spec.radius(FREQUENCY)
    return np.max(np.abs(F.values - np.exp(-np.pi * xi * xi)))


@pytest.mark.xfail(strict=True, reason="Nyquist 2 at M=64, L=8: aliasing e^{-4 pi} ~ 3.5e-6 exceeds 1e-8")
def test_gaussian_pair_at_m64_l8():
    assert _gaussian_error(64, 8.0) <= 1e-8


def test_gaussian_pair_resolved():
    assert _gaussian_error(128, 8.0) <= 1e-8
    assert _gaussian_error(64, 8.0) == pytest.approx(math.exp(-4 * math.pi), rel=0.05)
