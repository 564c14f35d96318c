import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave import multipliers as mp
from spherewave.errors import ContractError, RegimeError, ValidationError
from spherewave.grid import FREQUENCY, Field, from_function, make_grid
from spherewave.multipliers import MultiplierTable, OmegaParams, SymbolClass


@pytest.mark.parametrize("N,alpha", [(2, 1.0), (3, 0.0), (3, 0.5), (2, 0.3 + 0.4j)])
def test_omega_hat_at_origin(N, alpha):
    nu = N / 2 + alpha - 1
    ref = complex(np.pi ** nu * mp.rgamma(nu + 1))
    assert mp.omega_hat(alpha, 0.0, N) == pytest.approx(ref, rel=1e-14)


def test_omega_hat_n3_alpha0_closed_form():
    xi = np.linspace(0.05, 20, 300)
    np.testing.assert_allclose(mp.omega_hat(0.0, xi, 3).real, np.sin(2 * np.pi * xi) / (np.pi * xi), atol=1e-12)


# |xi|^{-nu} J_nu(2 pi |xi|) from mpmath, frozen
@pytest.mark.parametrize("N,alpha,xi,ref", [
    (2, 0.5, 0.8, -0.37841336432032846 + 0j),
    (3, -0.5 + 0.3j, 0.8, -0.1802614555575355 - 0.16425550547324017j),
    (2, 1.0, 1.3, 0.19613310086091637 + 0j),
])
def test_omega_hat_reference(N, alpha, xi, ref):
    assert abs(mp.omega_hat(alpha, xi, N) - ref) < 1e-12


@given(st.floats(-1.5, 1.5), st.floats(-1, 1), st.sampled_from([2, 3, 4]))
def test_series_identity(a, b, N):
    xi = np.linspace(0, 2, 41)
    alpha = complex(a, b)
    ref = np.asarray(mp.omega_hat(alpha, xi, N))
    ser = np.asarray(mp.omega_hat_series(1 - alpha, xi, N, 60))
    assert np.max(np.abs(ser - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))


def test_kernel_side():
    assert mp.omega_kernel(1.0, np.array([0.3, 0.4])) == pytest.approx(1.0)
    assert mp.omega_kernel(1.0, np.array([0.9, 0.9])) == 0
    # alpha = 2: pi / Gamma(2) (1 - r^2)
    assert mp.omega_kernel(2.0, 0.5) == pytest.approx(np.pi * 0.75)
    with pytest.raises(RegimeError):
        mp.omega_kernel(-0.5, 0.1)


def test_sampled_ball_mass():
    spec = make_grid(2, (1, 1), 128, 2.0)
    k = mp.sample_kernel(1.0, spec)
    assert np.sum(k.values).real * spec.cell_volume == pytest.approx(np.pi, rel=1e-3)


@pytest.mark.parametrize("alpha,r,N", [(0.5, 0.0, 2), (0.2 + 0.3j, 0.4, 3), (-0.3, 0.1, 2)])
def test_sigma_reconstruction(alpha, r, N):
    xi = np.linspace(3, 12, 200)
    params = OmegaParams(alpha, r)
    nu = N / 2 + alpha - 1
    w = 2 * np.pi * xi - nu * np.pi / 2 - np.pi / 4
    norms = [xi / math.sqrt(2), xi / math.sqrt(2)]
    dims = (N - 1, 1)
    s = (0.1, 0.2)
    sp = mp.sigma_symbol_norms(params, s, 4, norms, 1, dims)
    sm = mp.sigma_symbol_norms(params, s, 4, norms, -1, dims)
    recon = (np.exp(1j * w) * sp + np.exp(-1j * w) * sm) / np.pi
    weight = (1 + xi * xi) ** (r / 2) * mp.b_s_hat_norms([-v for v in s], norms)
    direct = np.asarray(mp.omega_hat(alpha, xi, N)) * weight
    env = xi ** (-(N - 1) / 2 - complex(alpha).real) * weight
    assert np.max(np.abs(recon - direct) / env) < 1e-5


def test_sigma_vanishes_near_origin():
    v = mp.sigma_symbol(OmegaParams(0.5), (0, 0), 2, [np.array([0.3]), np.array([0.2])])
    assert v == 0


def test_b_s_hat():
    assert mp.b_s_hat((0.5, 1.0), [3.0, np.array([1.0, 1.0])]) == pytest.approx(10 ** 0.25 * 3 ** 0.5)
    with pytest.raises(ValidationError):
        mp.b_s_hat_norms((0.5,), [1.0, 2.0])


def test_table_invariants():
    spec = make_grid(2, (1, 1), 8, 1.0)
    with pytest.raises(ValidationError):
        MultiplierTable(spec, np.ones(7))
    with pytest.raises(ValidationError):
        MultiplierTable(spec, np.ones(spec.shape), provenance="magic")
    bad = np.ones(spec.shape)
    bad[0, 0] = np.inf
    with pytest.raises(ValidationError):
        MultiplierTable(spec, bad)
    t = MultiplierTable(spec, np.ones(spec.shape))
    with pytest.raises(ValueError):
        t.values[0, 0] = 2
    with pytest.raises(ContractError):
        t.rebuild(make_grid(2, (1, 1), 16, 1.0))


def test_apply_multiplier_on_mode():
    spec = make_grid(2, (1, 1), 16, 2.0)
    k = (0.75, -0.5)
    f = from_function(spec, lambda x, y: np.exp(2j * np.pi * (k[0] * x + k[1] * y)))
    out = mp.apply_multiplier(f, mp.b_s_table(spec, (0.4, 0.2)))
    factor = (1 + k[0] ** 2) ** 0.2 * (1 + k[1] ** 2) ** 0.1
    np.testing.assert_allclose(out.values, factor * f.values, atol=1e-12)
    with pytest.raises(ContractError):
        mp.apply_multiplier(f, mp.b_s_table(make_grid(2, (1, 1), 8, 2.0), (0, 0)))


def _potential_product(rho):
    def build(sp):
        v = np.ones(sp.shape)
        for n, r in zip(sp.block_norms(FREQUENCY), rho):
            v = v * (1 + n * n) ** (-r / 2)
        return v
    return build


def test_class_check_accepts_member():
    spec = make_grid(2, (1, 1), 32, 2.0)
    table = MultiplierTable.from_builder(spec, _potential_product((0.3, 0.4)))
    rep = mp.symbol_class_check(table, SymbolClass((0.3, 0.4)))
    assert rep.passed and rep.refined
    assert rep.levels == [32, 64, 128]
    assert set(rep.to_json()) >= {"passed", "worst_ratio", "drift"}


def test_class_check_rejects_oscillation():
    spec = make_grid(2, (1, 1), 32, 2.0)
    table = MultiplierTable.from_builder(spec, lambda sp: np.cos(2 * np.pi * sp.frequencies()[0]) * np.ones(sp.shape))
    assert not mp.symbol_class_check(table, SymbolClass((0.0, 0.0))).passed


def test_class_check_rejects_too_much_decay_claim():
    spec = make_grid(2, (1, 1), 32, 2.0)
    table = MultiplierTable.from_builder(spec, _potential_product((0.1, 0.1)))
    assert not mp.symbol_class_check(table, SymbolClass((0.5, 0.5)), max_order=0).passed


def test_class_admissibility():
    assert SymbolClass((0.26, 0.26)).violations((1, 1)) == []
    assert SymbolClass((0.1, 0.4)).violations((2, 1))
    with pytest.raises(ValidationError):
        SymbolClass((-0.1, 0.2))
    assert OmegaParams(-0.5, 0.0).in_theorem_range(2)
    assert not OmegaParams(-0.6, 0.0).in_theorem_range(2)
