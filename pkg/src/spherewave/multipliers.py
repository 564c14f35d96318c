"""
Fourier symbols: Omega^alpha on both sides of the transform, the Bessel
potential weight B_s, the composite amplitude sigma, a finite-difference
S^{-m}_rho class checker and multiplier application.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import bessel
from .decomp import bump
from .errors import ContractError, RegimeError, ValidationError
from .gamma import gamma, rgamma
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_values, inverse_values

PROVENANCES = ("omega_hat", "b_s", "sigma", "custom")


@dataclass(frozen=True)
class OmegaParams:
    alpha: complex
    r: float = 0.0

    def order(self, dim: int) -> complex:
        """Bessel order nu = N/2 + alpha - 1."""
        return dim / 2.0 + complex(self.alpha) - 1.0

    def in_theorem_range(self, dim: int) -> bool:
        return complex(self.alpha).real - self.r >= -(dim - 1) / 2.0


@dataclass(frozen=True)
class SymbolClass:
    rho: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(float(x) for x in self.rho))
        if any(x < 0 for x in self.rho):
            raise ValidationError("rho entries must be nonnegative")

    @property
    def m(self) -> float:
        return float(sum(self.rho))

    def violations(self, factors) -> list[str]:
        """Admissibility: (N_i-1)/(N-1) m < rho_i < N_i/2 whenever 0 < m <= (N-1)/2."""
        return _range_violations(factors, self.rho, "rho")


def _range_violations(factors, vals, name) -> list[str]:
    factors = tuple(int(f) for f in factors)
    if len(vals) != len(factors):
        return [f"{name} has {len(vals)} entries but there are {len(factors)} factors"]
    N = sum(factors)
    tot = sum(vals)
    out = []
    if N > 1 and 0 < tot <= (N - 1) / 2:
        for i, (Ni, v) in enumerate(zip(factors, vals)):
            lo = (Ni - 1) / (N - 1) * tot
            if not v > lo:
                out.append(f"{name}_{i + 1} = {v:g} must exceed (N_{i + 1}-1)/(N-1)*|{name}| = {lo:g}")
            if not v < Ni / 2:
                out.append(f"{name}_{i + 1} = {v:g} must be below N_{i + 1}/2 = {Ni / 2:g}")
    return out


@dataclass(frozen=True, eq=False)
class MultiplierTable:
    """A symbol sampled on the frequency grid (FFT order), read-only.

    ``builder`` rebuilds the same symbol on another grid; the class checker
    uses it for refinement.
    """

    spec: GridSpec
    values: np.ndarray = field(repr=False)
    provenance: str = "custom"
    builder: Optional[Callable[[GridSpec], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"provenance must be one of {PROVENANCES}")
        v = np.asarray(self.values, dtype=np.complex128)
        if v.size != self.spec.n_points:
            raise ValidationError("table size does not match the grid")
        v = v.reshape(self.spec.shape)
        if not np.isfinite(v.flat[0]):
            raise ValidationError("table value at zero frequency must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_builder(cls, spec: GridSpec, builder, provenance="custom") -> "MultiplierTable":
        return cls(spec, builder(spec), provenance, builder)

    def rebuild(self, spec: GridSpec) -> "MultiplierTable":
        if self.builder is None:
            raise ContractError("table has no builder; cannot resample")
        return MultiplierTable.from_builder(spec, self.builder, self.provenance)


# ---------------------------------------------------------------------------
# Omega^alpha

def omega_hat(params, xi_norm, dim_total: int):
    """|xi|^{-nu} J_nu(2 pi |xi|) with nu = N/2 + alpha - 1; pi^nu / Gamma(nu+1) at 0.

    ``params`` is an :class:`OmegaParams` or a bare alpha.
    """
    alpha = params.alpha if isinstance(params, OmegaParams) else params
    nu = dim_total / 2.0 + complex(alpha) - 1.0
    xi = np.abs(np.asarray(xi_norm, dtype=np.float64))
    rho = 2 * np.pi * xi
    out = np.empty(xi.shape, dtype=np.complex128)
    cut = bessel.switchover(nu)
    low = rho < cut
    pi_nu = complex(np.pi ** nu)
    if np.any(low):
        out[low] = pi_nu * bessel.series_scaled(nu, rho[low])
    if np.any(~low):
        x = xi[~low]
        out[~low] = np.exp(-nu * np.log(x)) * bessel.bessel_asymptotic(nu, rho[~low], None, check_regime=False)
    return out if out.ndim else complex(out)


def omega_hat_series(z, xi_norm, dim_total: int, terms: int = 60):
    """pi^{(N-1)/2 - z} sum_k (-1)^k (2 pi|xi|)^{2k}/(2k)! Gamma(k+1/2)/Gamma(k+N/2+1-z)."""
    if terms < 1:
        raise ValidationError("terms must be >= 1")
    z = complex(z)
    N = dim_total
    xi = np.abs(np.asarray(xi_norm, dtype=np.float64))
    x2 = (2 * np.pi * xi) ** 2
    c = N / 2.0 + 1.0 - z
    k = np.arange(terms)
    # Gamma(k+1/2)/Gamma(k+c) via 1/Gamma, so poles of the denominator give exact zeros
    ratio = gamma(k + 0.5) * rgamma(k + c)
    total = np.zeros(xi.shape, dtype=np.complex128)
    power = np.ones(xi.shape)
    for kk in range(terms):
        if kk:
            power = power * (-x2) / ((2 * kk - 1) * (2 * kk))
        total = total + power * ratio[kk]
    out = complex(np.pi ** ((N - 1) / 2.0 - z)) * total
    return out if out.ndim else complex(out)


def omega_kernel(alpha, x):
    """pi^{alpha-1} / Gamma(alpha) (1 - |x|^2)_+^{alpha-1}; ``x`` has shape (..., N) or is |x|."""
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise RegimeError("kernel-side Omega^alpha needs Re alpha > 0")
    x = np.asarray(x, dtype=np.float64)
    r2 = x * x if x.ndim == 0 else np.sum(x * x, axis=-1)
    return _kernel_r2(alpha, r2)


def _kernel_r2(alpha: complex, r2):
    r2 = np.asarray(r2, dtype=np.float64)
    pref = complex(np.pi ** (alpha - 1.0) * rgamma(alpha))
    inside = r2 < 1.0
    base = np.where(inside, 1.0 - r2, 1.0)
    out = np.where(inside, pref * np.exp((alpha - 1.0) * np.log(base)), 0.0)
    return out if out.ndim else complex(out)


def sample_kernel(alpha, spec: GridSpec, subdivide: int = 16) -> Field:
    """Omega^alpha on the grid, cell-averaged on cells that meet the unit sphere."""
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise RegimeError("kernel-side Omega^alpha needs Re alpha > 0")
    h = spec.spacing
    r = spec.radius(PHYSICAL)
    vals = np.array(_kernel_r2(alpha, r * r), dtype=np.complex128)
    half_diag = 0.5 * h * math.sqrt(spec.dim_total)
    rim = np.nonzero(np.abs(r - 1.0) <= half_diag)
    if rim[0].size:
        offs = (np.arange(subdivide) + 0.5) / subdivide - 0.5
        sub = np.stack(np.meshgrid(*([offs * h] * spec.dim_total), indexing="ij"), -1)
        sub = sub.reshape(-1, spec.dim_total)
        ax = spec.axis()
        centers = np.stack([ax[i] for i in rim], axis=-1)
        pts = centers[:, None, :] + sub[None, :, :]
        vals[rim] = _kernel_r2(alpha, np.sum(pts * pts, axis=-1)).mean(axis=1)
    return Field.wrap(spec, vals, PHYSICAL)


# ---------------------------------------------------------------------------
# B_s and sigma

def _block_norms(xi_blocks):
    out = []
    for b in xi_blocks:
        b = np.asarray(b, dtype=np.float64)
        out.append(np.abs(b) if b.ndim == 0 else np.linalg.norm(b, axis=-1))
    return out


def b_s_hat_norms(s, norms):
    s = tuple(float(v) for v in s)
    if len(s) != len(norms):
        raise ValidationError(f"s has {len(s)} entries for {len(norms)} blocks")
    out = 1.0
    for si, n in zip(s, norms):
        out = out * (1.0 + n * n) ** (si / 2.0)
    return out


def b_s_hat(s, xi_blocks):
    """prod_i (1 + |xi_i|^2)^{s_i/2}; blocks are vectors (last axis) or scalar norms."""
    out = b_s_hat_norms(s, _block_norms(xi_blocks))
    return out if np.ndim(out) else float(out)


def sigma_symbol_norms(params: OmegaParams, s, correction_terms: int, norms, branch: int = 1,
                       dims=None):
    """sigma_+ (branch=+1, phase e^{+2 pi i|xi|}) or sigma_- from block norms.

    sigma_pm = (1+|xi|^2)^{r/2} |xi|^{-mu} {1/2 + sum_k (a_k/2)(2 pi|xi|)^{-2k}
               -+ (b_k/2i)(2 pi|xi|)^{-2k+1}} [1 - phi(|xi|)] prod_i (1+|xi_i|^2)^{-s_i/2}

    with mu = (N-1)/2 + alpha and a_k, b_k the Hankel coefficients of order
    N/2 + alpha - 1. Then Omega-hat(xi) times the same weights equals
    (1/pi)[e^{i w} sigma_+ + e^{-i w} sigma_-] up to the truncation error, where
    w = 2 pi|xi| - nu pi/2 - pi/4.
    """
    if branch not in (1, -1):
        raise ValidationError("branch must be +1 or -1")
    if dims is None:
        dims = (1,) * len(norms)
    N = sum(dims)
    alpha = complex(params.alpha)
    nu = N / 2.0 + alpha - 1.0
    mu = (N - 1) / 2.0 + alpha
    xi = np.sqrt(sum(np.asarray(n, dtype=np.float64) ** 2 for n in norms))
    cut = 1.0 - bump(xi)
    safe = np.where(cut > 0, xi, 1.0)
    rho = 2 * np.pi * safe
    inner = np.full(np.shape(xi), 0.5, dtype=np.complex128)
    for k in range(1, correction_terms + 1):
        c = bessel.asymptotic_coeffs(nu, k)
        inner = inner + c.a_k / 2.0 * rho ** (-2.0 * k) - branch * c.b_k / 2j * rho ** (-2.0 * k + 1)
    out = (1.0 + safe * safe) ** (params.r / 2.0) * np.exp(-mu * np.log(safe)) * inner
    out = out * b_s_hat_norms([-v for v in s], norms) * cut
    out = np.where(cut > 0, out, 0.0)
    return out if np.ndim(out) else complex(out)


def sigma_symbol(params: OmegaParams, s, correction_terms: int, xi_blocks, branch: int = 1):
    blocks = [np.asarray(b, dtype=np.float64) for b in xi_blocks]
    dims = tuple(1 if b.ndim == 0 else b.shape[-1] for b in blocks)
    return sigma_symbol_norms(params, s, correction_terms, _block_norms(blocks), branch, dims)


def phase_factor(xi_norm, sign: int):
    """e^{+- 2 pi i |xi|}."""
    return np.exp(sign * 2j * np.pi * np.asarray(xi_norm, dtype=np.float64))


# ---------------------------------------------------------------------------
# grid tables (cached)

@lru_cache(maxsize=64)
def _omega_values(spec: GridSpec, alpha: complex, r: float):
    xi = spec.radius(FREQUENCY)
    v = np.asarray(omega_hat(alpha, xi, spec.dim_total)) * (1.0 + xi * xi) ** (r / 2.0)
    v.flags.writeable = False
    return v


def omega_table(spec: GridSpec, params: OmegaParams) -> MultiplierTable:
    """(1+|xi|^2)^{r/2} Omega-hat^alpha(xi) on the grid."""
    a, r = complex(params.alpha), float(params.r)
    return MultiplierTable.from_builder(spec, lambda sp: _omega_values(sp, a, r), "omega_hat")


@lru_cache(maxsize=64)
def _b_s_values(spec: GridSpec, s: tuple):
    v = np.asarray(b_s_hat_norms(s, spec.block_norms(FREQUENCY)) * np.ones(spec.shape))
    v.flags.writeable = False
    return v


def b_s_table(spec: GridSpec, s) -> MultiplierTable:
    s = tuple(float(v) for v in s)
    if len(s) != spec.n_blocks:
        raise ValidationError(f"s has {len(s)} entries for {spec.n_blocks} blocks")
    return MultiplierTable.from_builder(spec, lambda sp: _b_s_values(sp, s), "b_s")


def sigma_table(spec: GridSpec, params: OmegaParams, s, correction_terms: int = 0,
                branch: int = 1, with_phase: bool = False) -> MultiplierTable:
    s = tuple(float(v) for v in s)

    def build(sp: GridSpec):
        norms = sp.block_norms(FREQUENCY)
        v = sigma_symbol_norms(params, s, correction_terms, norms, branch, sp.factors)
        v = np.broadcast_to(v, sp.shape)
        if with_phase:
            v = v * phase_factor(sp.radius(FREQUENCY), branch)
        return v

    return MultiplierTable.from_builder(spec, build, "sigma")


# ---------------------------------------------------------------------------
# class check

def _central_diff(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(v, -1, axis) - np.roll(v, 1, axis)) / (2 * h)


def _second_diff(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(v, -1, axis) - 2 * v + np.roll(v, 1, axis)) / (h * h)


def multi_indices(ndim: int, max_order: int):
    for total in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(ndim), total):
            idx = [0] * ndim
            for a in combo:
                idx[a] += 1
            yield tuple(idx)


def _class_ratios(spec: GridSpec, values: np.ndarray, cls: SymbolClass, max_order: int) -> dict:
    v = np.fft.fftshift(values)
    h = spec.freq_spacing
    norms = [np.fft.fftshift(n * np.ones(spec.shape)) for n in spec.block_norms(FREQUENCY)]
    interior = tuple(slice(max_order, spec.samples_per_axis - max_order) for _ in range(spec.dim_total))
    out = {}
    for mi in multi_indices(spec.dim_total, max_order):
        d = v
        for ax, k in enumerate(mi):
            if k == 1:
                d = _central_diff(d, ax, h)
            elif k == 2:
                d = _second_diff(d, ax, h)
        w = np.ones(spec.shape)
        for b in range(spec.n_blocks):
            order_b = sum(mi[a] for a in spec.block_axes(b))
            w = w * (1.0 + norms[b]) ** (order_b + cls.rho[b])
        ratio = np.abs(d) * w
        out[mi] = float(np.max(ratio[interior]))
    return out


@dataclass
class ClassReport:
    passed: bool
    ratios: dict
    levels: list
    drift: dict
    refined: bool

    def to_json(self) -> dict:
        key = lambda mi: ",".join(map(str, mi))  # noqa: E731
        return {
            "passed": self.passed,
            "refined": self.refined,
            "levels": self.levels,
            "worst_ratio": {key(k): v for k, v in self.ratios.items()},
            "drift": {key(k): v for k, v in self.drift.items()},
        }


def symbol_class_check(table: MultiplierTable, cls: SymbolClass, max_order: int = 2,
                       refinements: int = 2, max_drift: float = 2.0) -> ClassReport:
    """Check |d^a sigma| prod (1+|xi_i|)^{|a_i|+rho_i} stays bounded.

    Central differences on the interior of the grid. When the table has a
    builder it is resampled at M, 2M, 4M (same L, so the frequency box grows)
    and the check fails if any ratio grows by ``max_drift`` or more between
    the coarsest and finest level.
    """
    if not 0 <= max_order <= 2:
        raise ValidationError("max_order must be 0, 1 or 2")
    if len(cls.rho) != table.spec.n_blocks:
        raise ValidationError("class rho must have one entry per factor block")
    specs = [table.spec]
    if table.builder is not None:
        for _ in range(refinements):
            sp = specs[-1]
            specs.append(GridSpec(sp.dim_total, sp.factors, 2 * sp.samples_per_axis, sp.half_width))
    levels = []
    for sp in specs:
        vals = table.values if sp is table.spec else np.asarray(table.builder(sp))
        levels.append(_class_ratios(sp, np.broadcast_to(vals, sp.shape), cls, max_order))
    base, last = levels[0], levels[-1]
    drift = {}
    finite = True
    for mi in base:
        finite &= all(math.isfinite(lv[mi]) for lv in levels)
        lo = base[mi]
        drift[mi] = (last[mi] / lo) if lo > 0 else (1.0 if last[mi] == 0 else math.inf)
    passed = finite and all(d < max_drift for d in drift.values())
    return ClassReport(bool(passed), last, [sp.samples_per_axis for sp in specs], drift, len(specs) > 1)


# ---------------------------------------------------------------------------
# application

def apply_multiplier(f: Field, table: MultiplierTable) -> Field:
    """Inverse transform of table * transform(f)."""
    if f.side != PHYSICAL:
        raise ContractError("apply_multiplier expects a physical-side field")
    if f.spec != table.spec:
        raise ContractError("field and table live on different grids")
    return Field.wrap(f.spec, inverse_values(f.spec, table.values * forward_values(f.spec, f.values)), PHYSICAL)


__all__ = [
    "OmegaParams", "SymbolClass", "MultiplierTable", "ClassReport", "omega_hat", "omega_hat_series",
    "omega_kernel", "sample_kernel", "b_s_hat", "sigma_symbol", "sigma_symbol_norms", "phase_factor",
    "omega_table", "b_s_table", "sigma_table", "symbol_class_check", "multi_indices",
    "apply_multiplier",
]
