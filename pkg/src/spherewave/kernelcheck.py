"""
Localized wave kernels Lambda_{tj} and scans of their L^1 size, modulus of
continuity and mass outside the region of influence.

The kernel at shell j and cone index t is the inverse transform of

    e^{2 pi i s |xi|} delta_t(xi) phi_j(xi) sigma(xi),   s = +1 or -1,

with sigma(xi) = prod_i (1 + |xi_i|^2)^{-rho_i/2}. It depends on x - y only,
so Lambda(x, y) is obtained from the y = 0 slice by a spectral phase.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .decomp import (PartitionSplit, bump, classify_partition, cone_factor, influence_region,
                     shell_cutoff)
from .errors import DomainError, ResolutionError, ValidationError
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_values, inverse_values
from .multipliers import SymbolClass

II = "II"
III = "III"


# ---------------------------------------------------------------------------
# grids and symbols

def _smooth_size(n: int) -> int:
    """Smallest even 5-smooth integer >= n."""
    m = max(4, n + (n % 2))
    while True:
        k = m
        for p in (2, 3, 5):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 2


def kernel_grid(j: int, dim: int = 2, factors=(1, 1), margin: float = 16.0,
                oversample: float = 1.5) -> GridSpec:
    """Grid for shell j: half-width 1 + margin 2^{-j} and 1.5x the shell Nyquist."""
    L = 1.0 + margin * 2.0 ** (-j)
    M = _smooth_size(math.ceil(oversample * 2 ** (j + 3) * L))
    return GridSpec(dim, tuple(factors), M, L)


def check_resolution(spec: GridSpec, j: int):
    need = 2.0 ** (j + 1)
    if spec.nyquist < need:
        M_req = math.ceil(4 * spec.half_width * need)
        M_req += M_req % 2
        raise ResolutionError(
            f"grid Nyquist {spec.nyquist:g} < 2^(j+1) = {need:g}; need M >= {M_req} at L = {spec.half_width:g}")


def _cone_piece(choice, j: int, ratio):
    """Cone factor for one block: an integer t, or the lumped II / III ranges."""
    fin = np.isfinite(ratio)
    r = np.where(fin, ratio, 0.0)
    if choice == II:
        a, b = math.ceil(j / 2), j - 1
        out = bump(2.0 ** (-b) * r) - bump(2.0 ** (-a + 1) * r)
    elif choice == III:
        out = 1.0 - bump(2.0 ** (-j + 1) * r)
    else:
        return cone_factor(int(choice), ratio)
    return np.where(fin, out, 0.0)


def _ratios(norms):
    out = []
    for n in norms[1:]:
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(np.where(n == 0, np.inf, norms[0] / np.where(n == 0, 1.0, n)))
    return out


def kernel_symbol(spec: GridSpec, j: int, t, cls: SymbolClass, sign: int = 1) -> np.ndarray:
    """e^{2 pi i s|xi|} delta_t phi_j sigma on the frequency grid (FFT order)."""
    t = tuple(t)
    if len(t) != spec.n_blocks - 1:
        raise ValidationError(f"t needs {spec.n_blocks - 1} entries")
    if len(cls.rho) != spec.n_blocks:
        raise ValidationError("rho needs one entry per block")
    norms = spec.block_norms(FREQUENCY)
    xi = spec.radius(FREQUENCY)
    sym = shell_cutoff(j, xi) * np.exp(sign * 2j * np.pi * xi)
    for choice, ratio in zip(t, _ratios(norms)):
        sym = sym * _cone_piece(choice, j, ratio)
    for rho_i, n in zip(cls.rho, norms):
        sym = sym * (1.0 + n * n) ** (-rho_i / 2.0)
    return np.broadcast_to(sym, spec.shape)


def lambda_kernel(j: int, t, cls: SymbolClass, spec: GridSpec, sign: int = 1, y=None) -> Field:
    """Physical-side Lambda_{tj}(x, y) on the grid (y = 0 unless given)."""
    check_resolution(spec, j)
    sym = kernel_symbol(spec, j, t, cls, sign)
    if y is not None:
        sym = sym * _shift_phase(spec, y)
    return Field.wrap(spec, inverse_values(spec, sym), PHYSICAL)


def _shift_phase(spec: GridSpec, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.dim_total,):
        raise ValidationError(f"y must have {spec.dim_total} components")
    ph = 0.0
    for c, yi in zip(spec.frequencies(), y):
        ph = ph + c * yi
    return np.exp(-2j * np.pi * ph)


def translate(f: Field, y) -> Field:
    """f(x - y) by a spectral phase."""
    return Field.wrap(f.spec, inverse_values(f.spec, _shift_phase(f.spec, y) * forward_values(f.spec, f.values)),
                      PHYSICAL)


def l1(spec: GridSpec, values: np.ndarray) -> float:
    return float(np.sum(np.abs(values)) * spec.cell_volume)


def predicted_factor(t, factors, split: PartitionSplit) -> float:
    """prod_{i in I} 2^{-N_i t_i / 2} (block numbering 2..n)."""
    out = 1.0
    for i in split.I:
        out *= 2.0 ** (-factors[i - 1] * t[i - 2] / 2.0)
    return out


# ---------------------------------------------------------------------------
# scan rows

@dataclass
class KernelScanRow:
    mode: str
    j: int
    t: tuple
    partition: PartitionSplit
    measured: float
    predicted: float
    l1_mass: float
    y: tuple = ()
    r: float = float("nan")
    c: float = float("nan")
    M: int = 0
    L: float = 0.0

    @property
    def ratio(self) -> float:
        return self.measured / self.predicted if self.predicted > 0 else float("nan")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["partition"] = {"I": list(self.partition.I), "II": list(self.partition.II),
                          "III": list(self.partition.III)}
        d["ratio"] = self.ratio
        d["t"] = list(self.t)
        d["y"] = list(self.y)
        return d


CSV_FIELDS = ("mode", "j", "t", "measured", "predicted", "ratio", "l1_mass", "y", "r", "c", "M", "L")


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_FIELDS)]
    for row in rows:
        vals = []
        for f in CSV_FIELDS:
            v = row.ratio if f == "ratio" else getattr(row, f)
            if isinstance(v, tuple):
                vals.append(" ".join(format(x, ".17g") if isinstance(x, float) else str(x) for x in v))
            elif isinstance(v, float):
                vals.append(format(v, ".17g"))
            else:
                vals.append(str(v))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def admissible_t(j: int, n_cone: int, include_lumps: bool = False):
    """Cone indices with every block in class I (t_i < j/2), optionally the II/III lumps."""
    base = list(range(0, math.ceil(j / 2)))
    choices = base + ([II, III] if include_lumps else [])
    grids = [[]]
    for _ in range(n_cone):
        grids = [g + [c] for g in grids for c in choices]
    return [tuple(g) for g in grids]


def _split(j, t, factors) -> PartitionSplit:
    # lumped entries classify as the first t of their range
    tt = [math.ceil(j / 2) if c == II else (j if c == III else c) for c in t]
    return classify_partition(j, tt, factors)


def _grid_for(j, grid, dim, factors, margin):
    if grid is None:
        return kernel_grid(j, dim, factors, margin)
    return grid(j) if callable(grid) else grid


def l1_scan(j_range, t_ranges, cls: SymbolClass, grid=None, dim: int = 2, factors=(1, 1),
            sign: int = 1, margin: float = 16.0) -> list[KernelScanRow]:
    """Measured int |Lambda(x, 0)| dx against prod_{i in I} 2^{-N_i t_i/2}.

    ``t_ranges`` maps j to an iterable of t tuples (or is a callable j -> list);
    ``grid`` is a GridSpec, a callable j -> GridSpec, or None for :func:`kernel_grid`.
    """
    rows = []
    for j in j_range:
        spec = _grid_for(j, grid, dim, factors, margin)
        ts = t_ranges(j) if callable(t_ranges) else t_ranges[j]
        for t in ts:
            K = lambda_kernel(j, t, cls, spec, sign)
            m = l1(spec, K.values)
            split = _split(j, t, spec.factors)
            rows.append(KernelScanRow("l1", j, tuple(t), split, m,
                                      predicted_factor(t, spec.factors, split), m,
                                      M=spec.samples_per_axis, L=spec.half_width))
    return rows


def diff_scan(j: int, t, y_list, cls: SymbolClass, grid=None, dim: int = 2, factors=(1, 1),
              sign: int = 1, margin: float = 16.0) -> list[KernelScanRow]:
    """int |Lambda(x, y) - Lambda(x, 0)| dx against 2^j |y| prod_{i in I} 2^{-N_i t_i/2}."""
    spec = _grid_for(j, grid, dim, factors, margin)
    check_resolution(spec, j)
    sym = kernel_symbol(spec, j, t, cls, sign)
    K0 = inverse_values(spec, sym)
    m0 = l1(spec, K0)
    split = _split(j, t, spec.factors)
    pf = predicted_factor(t, spec.factors, split)
    rows = []
    for y in y_list:
        y = tuple(float(v) for v in y)
        ny = math.sqrt(sum(v * v for v in y))
        if ny == 0:
            d = 0.0
        else:
            Ky = inverse_values(spec, sym * _shift_phase(spec, y))
            d = l1(spec, Ky - K0)
        rows.append(KernelScanRow("diff", j, tuple(t), split, d, 2.0 ** j * ny * pf, m0, y=y,
                                  M=spec.samples_per_axis, L=spec.half_width))
    return rows


def y_grid(j: int, dim: int, levels: int = 4, n_dirs: int = 3, seed: int = 0) -> list[tuple]:
    """|y| in {2^{-j-levels+1}, ..., 2^{-j}} along ``n_dirs`` fixed directions."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    out = []
    for k in range(levels):
        size = 2.0 ** (-j - k)
        out.extend(tuple(size * d) for d in dirs)
    return out


_MASKS: dict = {}


def outside_mask(spec: GridSpec, region) -> np.ndarray:
    """Boolean mask of grid points outside Q_r (cached per grid and region)."""
    key = (spec, region.r, region.c, region.sign, region.levels, region.dim)
    hit = _MASKS.get(key)
    if hit is not None:
        return hit
    coords = spec.coordinates()
    pts = np.stack(np.broadcast_arrays(*coords), axis=-1).reshape(-1, spec.dim_total)
    mask = ~region.contains(pts).reshape(spec.shape)
    mask.flags.writeable = False
    if len(_MASKS) > 8:
        _MASKS.clear()
    _MASKS[key] = mask
    return mask


def tail_scan(j_list, t, r: float, c: float, cls: SymbolClass, grid=None, dim: int = 2,
              factors=(1, 1), sign: int = 1, margin: float = 16.0, y=None,
              extra_levels: int = 4) -> list[KernelScanRow]:
    """int_{outside Q_r} |Lambda(x, y)| dx against (2^{-j}/r) prod_{i in I} 2^{-N_i t_i/2}.

    Requires 2^j > 1/r for every j (the regime of the tail law).
    """
    if not 0 < r < 1:
        raise DomainError("r must lie in (0, 1)")
    bad = [j for j in j_list if not 2.0 ** j > 1.0 / r]
    if bad:
        raise DomainError(f"tail mode requires 2^j > 1/r; violated for j = {bad} at r = {r:g}")
    if y is not None and float(np.linalg.norm(y)) >= r:
        raise DomainError("y must lie in the ball B_r")
    region = influence_region(r, c, dim, sign=sign, extra_levels=extra_levels)
    rows = []
    for j in j_list:
        spec = _grid_for(j, grid, dim, factors, margin)
        K = lambda_kernel(j, t, cls, spec, sign, y=y)
        mask = outside_mask(spec, region)
        tail = l1(spec, np.where(mask, K.values, 0.0))
        split = _split(j, t, spec.factors)
        pf = predicted_factor(t, spec.factors, split)
        rows.append(KernelScanRow("tail", j, tuple(t), split, tail, 2.0 ** (-j) / r * pf,
                                  l1(spec, K.values), y=tuple(y) if y is not None else (), r=r, c=c,
                                  M=spec.samples_per_axis, L=spec.half_width))
    return rows


# ---------------------------------------------------------------------------
# fits

@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    n: int


def fit_slope(x, y) -> SlopeFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return SlopeFit(float(coef[0]), float(coef[1]), r2, x.size)


def fit_t_slope(rows, block: int = 0) -> SlopeFit:
    """Slope of log2(measured) against t_{block+2}, with a separate intercept per j.

    R^2 is that of the within-j (demeaned) regression.
    """
    js = sorted({r.j for r in rows})
    xs, ys = [], []
    for j in js:
        sel = [r for r in rows if r.j == j and isinstance(r.t[block], int)]
        if len(sel) < 2:
            continue
        x = np.array([r.t[block] for r in sel], dtype=float)
        y = np.log2([r.measured for r in sel])
        xs.append(x - x.mean())
        ys.append(y - y.mean())
    x, y = np.concatenate(xs), np.concatenate(ys)
    slope = float(np.dot(x, y) / np.dot(x, x))
    ss = float(np.sum(y ** 2))
    r2 = 1.0 - float(np.sum((y - slope * x) ** 2)) / ss if ss > 0 else 1.0
    return SlopeFit(slope, 0.0, r2, x.size)


def fit_j_slope(rows) -> SlopeFit:
    return fit_slope([r.j for r in rows], np.log2([r.measured for r in rows]))


def spread(values) -> float:
    v = np.asarray([x for x in values if x > 0 and math.isfinite(x)], dtype=np.float64)
    if v.size == 0:
        return float("inf")
    return float(v.max() / v.min())


# ---------------------------------------------------------------------------
# reconstruction

def reconstruction_symbol(spec: GridSpec, J: int, cls: SymbolClass, sign: int = 1, j_min: int = 1) -> np.ndarray:
    """Target of the (t, j) sum: phase * (phi[2^{-J}|xi|] - phi[2^{-j_min+1}|xi|]) * Delta * sigma.

    Delta = prod_i (1 - phi[2 |xi_1|/|xi_i|]) with the factor set to 0 where xi_i = 0.
    """
    norms = spec.block_norms(FREQUENCY)
    xi = spec.radius(FREQUENCY)
    sym = (bump(2.0 ** (-J) * xi) - bump(2.0 ** (-j_min + 1) * xi)) * np.exp(sign * 2j * np.pi * xi)
    for ratio in _ratios(norms):
        fin = np.isfinite(ratio)
        sym = sym * np.where(fin, 1.0 - bump(2.0 * np.where(fin, ratio, 0.0)), 0.0)
    for rho_i, n in zip(cls.rho, norms):
        sym = sym * (1.0 + n * n) ** (-rho_i / 2.0)
    return np.broadcast_to(sym, spec.shape)


def reconstruction_error(f: Field, J: int, cls: SymbolClass, sign: int = 1, j_min: int = 1) -> float:
    """Relative L^2 gap between the summed localized kernels applied to f and the direct operator."""
    spec = f.spec
    fh = forward_values(spec, f.values)
    acc = np.zeros(spec.shape, dtype=np.complex128)
    n_cone = spec.n_blocks - 1
    for j in range(j_min, J + 1):
        for t in admissible_t(j, n_cone, include_lumps=True):
            acc = acc + kernel_symbol(spec, j, t, cls, sign)
    lhs = inverse_values(spec, acc * fh)
    rhs = inverse_values(spec, reconstruction_symbol(spec, J, cls, sign, j_min) * fh)
    den = float(np.linalg.norm(rhs))
    return float(np.linalg.norm(lhs - rhs)) / (den if den > 0 else 1.0)


def decay_fit(K: Field, r_min: float = 3.0) -> SlopeFit:
    """log-log slope of the radial envelope max |K| over shells |x| >= r_min."""
    spec = K.spec
    r = spec.radius(PHYSICAL)
    edges = np.geomspace(r_min, spec.half_width, 9)
    xs, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (r >= a) & (r < b)
        if np.any(sel):
            v = np.max(np.abs(K.values[sel]))
            if v > 0:
                xs.append(math.log(math.sqrt(a * b)))
                ys.append(math.log(v))
    return fit_slope(xs, ys)


__all__ = [
    "II", "III", "kernel_grid", "check_resolution", "kernel_symbol", "lambda_kernel", "translate",
    "l1", "predicted_factor", "KernelScanRow", "rows_to_csv", "admissible_t", "l1_scan", "diff_scan",
    "y_grid", "outside_mask", "tail_scan", "SlopeFit", "fit_slope", "fit_t_slope", "fit_j_slope",
    "spread", "reconstruction_symbol", "reconstruction_error", "decay_fit",
]
