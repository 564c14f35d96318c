"""
Test-function factories (H^1 atoms, cap-concentrated Knapp profiles) and
operator-norm ratio sweeps over (alpha, r, s, p).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .decomp import CapIndex, bump, shell_cutoff, sphere_grid
from .errors import DomainError, ResolutionError, ValidationError
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, ball_volume, forward_values, inverse_values, norm_values
from .multipliers import MultiplierTable, OmegaParams, omega_hat, phase_factor
from .sobolev import SobolevParams, sobolev_norm


# ---------------------------------------------------------------------------
# atoms

def h1_atom(r: float, center, spec: GridSpec, axis: int = 0) -> Field:
    """Two-lobe H^1 atom on B_r(center): odd in the ``axis`` coordinate, mean zero, sup = |B_r|^{-1}.

    The lobes are +-1 on the in-ball grid points, the in-ball mean is then
    subtracted and the result scaled so that max |a| = |B_r|^{-1}.
    """
    if not 0 < r < spec.half_width / 2:
        raise DomainError(f"atom radius must lie in (0, L/2) = (0, {spec.half_width / 2:g})")
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (spec.dim_total,):
        raise ValidationError(f"center must have {spec.dim_total} components")
    coords = spec.coordinates()
    d = [c - x0 for c, x0 in zip(coords, center)]
    inside = np.broadcast_to(sum(v * v for v in d) < r * r, spec.shape)
    if np.count_nonzero(inside) < 2:
        raise DomainError("ball contains fewer than two grid points; refine the grid")
    side = np.broadcast_to(d[axis], spec.shape)
    lobes = np.where(inside, np.where(side >= 0, 1.0, -1.0), 0.0)
    vals = np.where(inside, lobes - lobes[inside].mean(), 0.0)
    peak = np.max(np.abs(vals))
    if peak == 0:
        raise DomainError("degenerate atom: lobes cancel pointwise")
    vals = vals * (1.0 / (ball_volume(spec.dim_total, r) * peak))
    return Field.wrap(spec, vals.astype(np.complex128), PHYSICAL)


def atom_report(a: Field, r: float, center) -> dict:
    """Support, size and mean diagnostics of an atom."""
    spec = a.spec
    coords = spec.coordinates()
    d2 = sum((c - x0) ** 2 for c, x0 in zip(coords, center))
    outside = np.broadcast_to(d2 >= r * r, spec.shape)
    bound = 1.0 / ball_volume(spec.dim_total, r)
    return {
        "mean": math.fsum(a.values.real.ravel()) * spec.cell_volume,
        "sup_over_bound": float(np.max(np.abs(a.values)) / bound),
        "outside_max": float(np.max(np.abs(a.values[outside]))) if outside.any() else 0.0,
    }


# ---------------------------------------------------------------------------
# Knapp profiles

def knapp_spectrum(spec: GridSpec, j: int, center: np.ndarray) -> np.ndarray:
    """phi_j(xi) phi(2^{j/2} |xi/|xi| - xi^nu|) on the frequency grid."""
    xi_comp = spec.frequencies()
    xi = spec.radius(FREQUENCY)
    safe = np.where(xi > 0, xi, 1.0)
    dist2 = sum((c / safe - e) ** 2 for c, e in zip(xi_comp, center))
    win = bump(2.0 ** (j / 2.0) * np.sqrt(dist2))
    return np.where(xi > 0, shell_cutoff(j, xi) * win, 0.0)


def knapp_profile(cap: CapIndex, spec: GridSpec) -> Field:
    """Unit-L^2 field whose spectrum is the smooth window of cap ``cap`` inside shell j."""
    j = cap.j
    if spec.nyquist < 2.0 ** (j + 1):
        raise ResolutionError(f"grid Nyquist {spec.nyquist:g} below 2^(j+1) = {2.0 ** (j + 1):g}")
    center = np.asarray(cap.center, dtype=np.float64)
    if center.shape != (spec.dim_total,):
        raise ValidationError("cap centre must live in R^N")
    fh = knapp_spectrum(spec, j, center)
    nrm = math.sqrt(float(np.sum(fh * fh)) * spec.freq_cell_volume)
    if nrm == 0:
        raise ResolutionError("cap window misses every grid frequency; refine the grid")
    vals = inverse_values(spec, (fh / nrm).astype(np.complex128))
    return Field.wrap(spec, vals, PHYSICAL)


def second_moments(f: Field, direction) -> tuple[float, float]:
    """Spatial spread of |f|^2 along ``direction`` and orthogonal to it (standard deviations)."""
    spec = f.spec
    e = np.asarray(direction, dtype=np.float64)
    e = e / np.linalg.norm(e)
    w = np.abs(f.values) ** 2
    tot = w.sum()
    coords = spec.coordinates()
    along = sum(c * ei for c, ei in zip(coords, e))
    r2 = sum(c * c for c in coords)
    m_along = float(np.sum(w * along) / tot)
    var_along = float(np.sum(w * (along - m_along) ** 2) / tot)
    var_total = float(np.sum(w * r2) / tot) - m_along ** 2
    var_perp = (var_total - var_along) / max(1, spec.dim_total - 1)
    return math.sqrt(var_along), math.sqrt(max(var_perp, 0.0))


def spectral_second_moments(spec: GridSpec, fh: np.ndarray, direction) -> tuple[float, float]:
    """Same spreads from the spectrum: int x_k^2 |f|^2 = (2 pi)^{-2} int |d_k f-hat|^2 (f-hat real, even |f|^2)."""
    e = np.asarray(direction, dtype=np.float64)
    e = e / np.linalg.norm(e)
    sh = np.fft.fftshift(fh)
    h = spec.freq_spacing
    grads = np.gradient(sh, h)
    if spec.dim_total == 1:
        grads = [grads]
    tot = float(np.sum(sh * sh))
    along = sum(g * ei for g, ei in zip(grads, e))
    var_along = float(np.sum(along ** 2)) / tot / (2 * np.pi) ** 2
    var_total = float(sum(np.sum(g ** 2) for g in grads)) / tot / (2 * np.pi) ** 2
    var_perp = (var_total - var_along) / max(1, spec.dim_total - 1)
    return math.sqrt(var_along), math.sqrt(max(var_perp, 0.0))


def knapp_grid(j: int, dim: int = 2, half_width: float = 2.0) -> GridSpec:
    M = int(math.ceil(1.25 * 4 * half_width * 2 ** (j + 1)))
    M += M % 2
    return GridSpec(dim, (1,) * dim, M, half_width)


# ---------------------------------------------------------------------------
# ratios

def sobolev_r_norm(f: Field, r: float, p: float, table: np.ndarray | None = None) -> float:
    """|| (1+|xi|^2)^{r/2} table f-hat ||_{L^p} (one-parameter Sobolev order r)."""
    spec = f.spec
    xi = spec.radius(FREQUENCY)
    m = (1.0 + xi * xi) ** (r / 2.0)
    if table is not None:
        m = m * table
    out = inverse_values(spec, m * forward_values(spec, f.values))
    return norm_values(spec, out, p)


def norm_ratio(op_table: MultiplierTable | None, f: Field, in_params: SobolevParams, r_out: float,
               p: float, sign: int | None = None) -> float:
    """||T f||_{L^p_r} / ||f||_{L^p_s}, T the multiplier ``op_table`` (times e^{sign 2 pi i|xi|})."""
    if not np.any(f.values):
        raise DomainError("input field is zero")
    spec = f.spec
    table = None
    if op_table is not None:
        if op_table.spec != spec:
            raise ValidationError("table and field grids differ")
        table = op_table.values
        if sign is not None:
            table = table * phase_factor(spec.radius(FREQUENCY), sign)
    num = sobolev_r_norm(f, r_out, p, table)
    den = sobolev_norm(f, SobolevParams(in_params.s, p))
    return num / den


def composite_sup(spec: GridSpec, alpha, r: float, s) -> float:
    """sup over the grid of (1+|xi|^2)^{r/2} |Omega-hat^alpha| prod (1+|xi_i|^2)^{-s_i/2}."""
    xi = spec.radius(FREQUENCY)
    w = (1.0 + xi * xi) ** (r / 2.0) * np.abs(omega_hat(alpha, xi, spec.dim_total))
    for si, n in zip(s, spec.block_norms(FREQUENCY)):
        w = w * (1.0 + n * n) ** (-si / 2.0)
    return float(np.max(w))


def omega_multiplier(spec: GridSpec, alpha) -> MultiplierTable:
    xi = spec.radius(FREQUENCY)
    return MultiplierTable(spec, omega_hat(alpha, xi, spec.dim_total), "omega_hat")


# ---------------------------------------------------------------------------
# sweeps

def inside_theory(alpha, r: float, s_total: float, p: float, dim: int) -> bool:
    """|1/p - 1/2| <= (alpha - r + |s|)/(N - 1) + 1/2."""
    a = complex(alpha).real
    return abs(1.0 / p - 0.5) <= (a - r + s_total) / (dim - 1) + 0.5


@dataclass
class SweepRow:
    alpha: float
    r: float
    s_total: float
    p: float
    ratio_max: float
    inside_theory: bool
    family: str = ""
    n_tests: int = 0


SWEEP_FIELDS = ("alpha", "r", "s_total", "p", "ratio_max", "inside_theory", "family", "n_tests")


def sweep_to_csv(rows) -> str:
    lines = [",".join(SWEEP_FIELDS)]
    for row in rows:
        d = asdict(row)
        lines.append(",".join(format(d[k], ".17g") if isinstance(d[k], float) else str(d[k]).lower()
                              if isinstance(d[k], bool) else str(d[k]) for k in SWEEP_FIELDS))
    return "\n".join(lines) + "\n"


def random_fields(spec: GridSpec, n: int, rng: np.random.Generator, kmax: float | None = None) -> list[Field]:
    """Real random fields band-limited to |xi| <= kmax (default: half the Nyquist)."""
    kmax = spec.nyquist / 2 if kmax is None else kmax
    band = spec.radius(FREQUENCY) <= kmax
    out = []
    for _ in range(n):
        c = (rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)) * band
        out.append(Field.wrap(spec, inverse_values(spec, c).real.astype(np.complex128), PHYSICAL))
    return out


def test_family(family: str, spec: GridSpec, rng: np.random.Generator, n_random: int = 20,
                n_knapp: int = 6, n_atoms: int = 4) -> list[Field]:
    if family == "random":
        return random_fields(spec, n_random, rng)
    if family == "atoms":
        rmax = spec.half_width / 4
        radii = rmax * 2.0 ** -np.arange(n_atoms)
        return [h1_atom(r, np.zeros(spec.dim_total), spec) for r in radii
                if r > 2 * spec.spacing]
    if family == "knapp":
        jmax = int(math.floor(math.log2(spec.nyquist))) - 1
        js = [j for j in range(max(1, jmax - n_knapp + 1), jmax + 1)]
        out = []
        for j in js:
            cap = sphere_grid(j, spec.dim_total)[0] if spec.dim_total in (2, 3) else \
                CapIndex(j, 0, np.eye(spec.dim_total)[0])
            out.append(knapp_profile(cap, spec))
        return out
    raise ValidationError(f"unknown family {family!r}; use atoms, knapp or random")


def region_sweep(alpha_list, r_list, s_list, p_grid, family: str, spec: GridSpec,
                 seed: int = 0, sign: int | None = 1) -> list[SweepRow]:
    """One row per (alpha, r, s, p): max ratio over the family and the theory flag."""
    if not len(alpha_list) or not len(r_list) or not len(s_list) or not len(p_grid):
        return []
    rng = np.random.default_rng(seed)
    fields = test_family(family, spec, rng)
    if not fields:
        return []
    rows = []
    for alpha in alpha_list:
        tab = omega_multiplier(spec, alpha)
        for r in r_list:
            for s in s_list:
                s = tuple(float(v) for v in s)
                for p in p_grid:
                    params = SobolevParams(s, p)
                    ratios = [norm_ratio(tab, f, params, r, p, sign) for f in fields]
                    s_tot = float(sum(s))
                    rows.append(SweepRow(float(complex(alpha).real), float(r), s_tot, float(p),
                                         float(max(ratios)),
                                         inside_theory(alpha, r, s_tot, p, spec.dim_total),
                                         family, len(fields)))
    return rows


def knapp_trend(alpha, r: float, s, p: float, j_list, dim: int = 2, sign: int = 1) -> tuple[float, list]:
    """Fitted log2-slope in j of the ratio on Knapp profiles (one cap per level)."""
    js, vals = [], []
    for j in j_list:
        spec = knapp_grid(j, dim, 2.0)
        cap = sphere_grid(j, dim)[0]
        f = knapp_profile(cap, spec)
        ratio = norm_ratio(omega_multiplier(spec, alpha), f, SobolevParams(tuple(s), p), r, p, sign)
        js.append(j)
        vals.append(ratio)
    slope = float(np.polyfit(js, np.log2(vals), 1)[0]) if len(js) > 1 else float("nan")
    return slope, vals


def parse_range(text: str) -> list[float]:
    """'a:h:b' (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        a, h, b = (float(v) for v in text.split(":"))
        if h <= 0:
            raise ValidationError("range step must be positive")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        return [round(a + k * h, 12) for k in range(max(n, 0))]
    if not text:
        return []
    return [float(v) for v in text.split(",")]


__all__ = [
    "h1_atom", "atom_report", "knapp_spectrum", "knapp_profile", "knapp_grid", "second_moments",
    "spectral_second_moments", "sobolev_r_norm", "norm_ratio", "composite_sup", "omega_multiplier",
    "inside_theory", "SweepRow", "sweep_to_csv", "random_fields", "test_family", "region_sweep",
    "knapp_trend", "parse_range",
]
