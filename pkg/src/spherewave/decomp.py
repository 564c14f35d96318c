"""
Frequency decompositions: the smooth bump, dyadic cones and shells, the
I/II/III index partition, sphere-cap grids with their partition of unity,
and the region of influence Q_r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import CoverageError, DomainError, ValidationError
from .grid import ball_volume


# ---------------------------------------------------------------------------
# bump and dyadic cutoffs

def _h(u):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)


def bump(t):
    """Smooth even cutoff: 1 on |t| <= 1, 0 on |t| >= 2."""
    a = np.abs(np.asarray(t, dtype=np.float64))
    up, down = _h(2.0 - a), _h(a - 1.0)
    with np.errstate(invalid="ignore"):
        mid = up / (up + down)
    out = np.where(a <= 1.0, 1.0, np.where(a >= 2.0, 0.0, mid))
    return out if out.ndim else float(out)


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0, np.inf, num / np.where(den == 0, 1.0, den))


def cone_factor(t_i: float, ratio):
    """phi[2^{-t} ratio] - phi[2^{-t+1} ratio], zero at ratio = inf."""
    ratio = np.asarray(ratio, dtype=np.float64)
    fin = np.isfinite(ratio)
    r = np.where(fin, ratio, 0.0)
    out = np.where(fin, bump(2.0 ** (-t_i) * r) - bump(2.0 ** (-t_i + 1) * r), 0.0)
    return out if out.ndim else float(out)


def _norms(xi_blocks):
    out = []
    for b in xi_blocks:
        b = np.asarray(b, dtype=np.float64)
        out.append(np.abs(b) if b.ndim == 0 else np.linalg.norm(b, axis=-1))
    return out


def cone_cutoff_norms(t, norms):
    """delta_t evaluated from block norms (|xi_1|, |xi_2|, ..., |xi_n|)."""
    t = list(t)
    if len(t) != len(norms) - 1:
        raise ValidationError(f"t has {len(t)} entries, need {len(norms) - 1}")
    out = np.ones(np.broadcast(*norms).shape)
    for ti, ni in zip(t, norms[1:]):
        out = out * cone_factor(ti, _ratio(norms[0], ni))
    return out if out.ndim else float(out)


def cone_cutoff(t, xi_blocks):
    """delta_t(xi) = prod_i (phi[2^{-t_i}|xi_1|/|xi_i|] - phi[2^{-t_i+1}|xi_1|/|xi_i|]).

    ``xi_blocks`` is a sequence of per-block vectors (last axis = block
    coordinates) or scalars. A block with xi_i = 0 gives ratio +inf and a
    vanishing factor.
    """
    return cone_cutoff_norms(t, _norms(xi_blocks))


def shell_cutoff(j: float, xi_norm):
    """phi_j(xi) = phi[2^{-j}|xi|] - phi[2^{-j+1}|xi|]."""
    r = np.abs(np.asarray(xi_norm, dtype=np.float64))
    out = bump(2.0 ** (-j) * r) - bump(2.0 ** (-j + 1) * r)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# partition

@dataclass(frozen=True)
class DyadicIndex:
    j: int
    t: tuple[int, ...]


@dataclass(frozen=True)
class PartitionSplit:
    """I/II/III split of block indices 2..n (numbered as in the block list)."""

    I: tuple[int, ...]
    II: tuple[int, ...]
    III: tuple[int, ...]
    m: int
    M: int


def classify_partition(j: int, t, factors=None) -> PartitionSplit:
    """i in I iff t_i < j/2, II iff j/2 <= t_i < j, III iff t_i >= j.

    ``t[k]`` belongs to block k+2. ``M`` = N_1 + sum_{i in I} N_i needs
    ``factors``; without it every block counts as dimension 1.
    """
    if j <= 0:
        raise DomainError("j must be > 0")
    t = tuple(int(x) for x in t)
    if factors is None:
        factors = (1,) * (len(t) + 1)
    if len(factors) != len(t) + 1:
        raise ValidationError("factors must have one more entry than t")
    I, II, III = [], [], []
    for k, ti in enumerate(t):
        idx = k + 2
        if 2 * ti < j:
            I.append(idx)
        elif ti < j:
            II.append(idx)
        else:
            III.append(idx)
    M = factors[0] + sum(factors[i - 1] for i in I)
    return PartitionSplit(tuple(I), tuple(II), tuple(III), 1 + len(I), M)


# ---------------------------------------------------------------------------
# sphere grids and caps

@dataclass(frozen=True)
class CapIndex:
    j: int
    nu: int
    center: np.ndarray = field(compare=False)


def _spacing_window(j: int) -> tuple[float, float]:
    h = 2.0 ** (-j / 2.0)
    return h / 2.0, h


def _circle_points(n: int) -> np.ndarray:
    th = 2 * np.pi * np.arange(n) / n
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def _fibonacci_points(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rad = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    th = np.pi * (3.0 - math.sqrt(5.0)) * np.arange(n)
    pts = np.stack([rad * np.cos(th), rad * np.sin(th), z], axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def nearest_spacing(points: np.ndarray) -> np.ndarray:
    """Chord distance from each point to its nearest neighbour."""
    d, _ = cKDTree(points).query(points, k=2)
    return d[:, 1]


def sphere_points(j: int, sphere_dim: int) -> np.ndarray:
    """Unit vectors in R^M with nearest-neighbour chord spacing in [2^{-j/2-1}, 2^{-j/2}]."""
    if j < 1:
        raise DomainError("j must be >= 1")
    lo, hi = _spacing_window(j)
    if sphere_dim == 1:
        return np.array([[1.0], [-1.0]])
    if sphere_dim == 2:
        # chord 2 sin(pi/n) placed at 3/4 of the upper bound
        n = max(3, math.ceil(math.pi / math.asin(min(1.0, 0.375 * hi))))
        pts = _circle_points(n)
    elif sphere_dim == 3:
        # Fibonacci spiral; its spacing is about 3.09/sqrt(n). Retune n until it fits.
        n = max(8, int((3.09 / (0.75 * hi)) ** 2))
        for _ in range(60):
            pts = _fibonacci_points(n)
            sp = nearest_spacing(pts)
            if sp.min() >= lo and sp.max() <= hi:
                break
            n = int(n * (1.05 if sp.max() > hi else 0.95))
        else:
            raise ValidationError(f"could not fit a spiral grid for j={j}")
    else:
        raise ValidationError(f"sphere grids implemented for M in {{1, 2, 3}}, got {sphere_dim}")
    sp = nearest_spacing(pts)
    if sp.min() < lo * (1 - 1e-12) or sp.max() > hi * (1 + 1e-12):
        raise ValidationError(f"spacing window violated for j={j}, M={sphere_dim}")
    return pts


def sphere_grid(j: int, sphere_dim: int) -> list[CapIndex]:
    pts = sphere_points(j, sphere_dim)
    return [CapIndex(j, k, p) for k, p in enumerate(pts)]


def _centers(grid) -> np.ndarray:
    if isinstance(grid, np.ndarray):
        return grid
    return np.array([c.center for c in grid])


def cap_partition(j: int, grid, xi) -> sparse.csr_matrix:
    """Weights phi^nu_j(xi) = phi(2^{j/2}|xi/|xi| - xi^nu|) / sum_mu phi(...).

    ``xi`` has shape (K, M); returns a sparse (K, n_caps) matrix whose rows sum
    to one. A weight vanishes once the distance reaches 2^{-j/2+1}.
    """
    centers = _centers(grid)
    xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    nrm = np.linalg.norm(xi, axis=1)
    if np.any(nrm == 0):
        raise DomainError("xi must be nonzero")
    u = xi / nrm[:, None]
    scale = 2.0 ** (j / 2.0)
    rows, cols, vals = [], [], []
    nbrs = cKDTree(centers).query_ball_point(u, r=2.0 / scale)
    for k, idx in enumerate(nbrs):
        if not idx:
            continue
        idx = np.asarray(idx)
        w = bump(scale * np.linalg.norm(u[k] - centers[idx], axis=1))
        rows.append(np.full(idx.size, k))
        cols.append(idx)
        vals.append(w)
    K = xi.shape[0]
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=int)
        v = np.zeros(0)
    W = sparse.csr_matrix((v, (r, c)), shape=(K, centers.shape[0]))
    tot = np.asarray(W.sum(axis=1)).ravel()
    bad = np.flatnonzero(tot == 0)
    if bad.size:
        raise CoverageError(f"{bad.size} sample(s) lie outside U_j (first index {bad[0]})")
    return sparse.diags(1.0 / tot) @ W


def cap_weight_dense(j: int, center: np.ndarray, centers: np.ndarray, u: np.ndarray) -> np.ndarray:
    """phi^nu_j for a single cap evaluated at unit vectors ``u`` of shape (..., M)."""
    scale = 2.0 ** (j / 2.0)
    flat = u.reshape(-1, u.shape[-1])
    tree = cKDTree(centers)
    own = bump(scale * np.linalg.norm(flat - center, axis=1))
    out = np.zeros(flat.shape[0])
    hit = np.flatnonzero(own > 0)
    if hit.size:
        nbrs = tree.query_ball_point(flat[hit], r=2.0 / scale)
        for k, idx in zip(hit, nbrs):
            tot = bump(scale * np.linalg.norm(flat[k] - centers[idx], axis=1)).sum()
            out[k] = own[k] / tot
    return out.reshape(u.shape[:-1])


def cap_count_in_cone(j: int, sphere_dim: int, factors, t) -> int:
    """Number of cap centres at level j lying in the support of the cone cutoff.

    The sphere lives in R^M with M = sum(factors) (blocks split as ``factors``).
    """
    if sum(factors) != sphere_dim:
        raise ValidationError("factors must sum to the sphere dimension")
    pts = sphere_points(j, sphere_dim)
    offs = np.cumsum((0,) + tuple(factors))
    blocks = [pts[:, offs[i]:offs[i + 1]] for i in range(len(factors))]
    return int(np.count_nonzero(cone_cutoff(t, blocks) > 0))


# ---------------------------------------------------------------------------
# region of influence

@dataclass(frozen=True)
class InfluenceRegion:
    """Union over j with 2^{-j} <= r of boxes R^nu_j around the wave front.

    R^nu_j = {x : |x . xi^nu + s| <= c 2^{-j}, |x + s xi^nu| <= c 2^{-j/2}}
    with s = +1 or -1 the phase sign. ``levels`` lists the j's used; finer
    levels than ``levels[-1]`` are dropped since their boxes have volume
    O(2^{-j}) and lie inside the coarser ones up to a constant.
    """

    r: float
    c: float
    dim: int
    sign: int
    levels: tuple[int, ...]
    centers: dict = field(compare=False, repr=False)

    def boxes(self):
        for j in self.levels:
            for k, p in enumerate(self.centers[j]):
                yield j, k, p

    @property
    def n_boxes(self) -> int:
        return sum(len(self.centers[j]) for j in self.levels)

    def box_volume_bound(self, j: int) -> float:
        """c^N 2^{-j} 2^{-j(N-1)/2} times the unit-ball volume in N-1 dims times 2."""
        N = self.dim
        return 2.0 * self.c * 2.0 ** (-j) * ball_volume(N - 1, self.c * 2.0 ** (-j / 2.0))

    def contains(self, x: np.ndarray, chunk: int = 100_000) -> np.ndarray:
        """Membership test for points of shape (K, N)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.zeros(x.shape[0], dtype=bool)
        for start in range(0, x.shape[0], chunk):
            out[start:start + chunk] = self._contains(x[start:start + chunk])
        return out

    def _contains(self, x: np.ndarray) -> np.ndarray:
        s = self.sign
        out = np.zeros(x.shape[0], dtype=bool)
        nrm = np.linalg.norm(x, axis=1)
        u = -s * x / np.where(nrm > 0, nrm, 1.0)[:, None]
        for j in self.levels:
            cen = self.centers[j]
            n = cen.shape[0]
            d1, d2 = self.c * 2.0 ** (-j), self.c * 2.0 ** (-j / 2.0)
            # points of a box satisfy 1 - 2 d1 <= |x|^2 <= 1 + 2 d1 + d2^2
            todo = np.flatnonzero(~out & (nrm * nrm >= 1 - 2 * d1) & (nrm * nrm <= 1 + 2 * d1 + d2 * d2))
            if todo.size == 0:
                continue
            # a containing centre is within chord d2 + ||x| - 1| of the direction -s x/|x|
            R = d2 + d1 + d2 * d2
            frac = (R / (2 * np.pi)) if self.dim == 2 else (R * R / 4.0)
            k = int(min(n, math.ceil(1.5 * n * frac) + 8))
            dist, idx = cKDTree(cen).query(u[todo], k=k, distance_upper_bound=R)
            idx = idx.reshape(todo.size, -1)
            valid = idx < n
            p = np.concatenate([cen, np.full((1, self.dim), 10.0)])[idx]
            xx = x[todo][:, None, :]
            a = np.abs(np.sum(p * xx, axis=-1) + s) <= d1
            b = np.sum((xx + s * p) ** 2, axis=-1) <= d2 * d2
            out[todo] = np.any(valid & a & b, axis=1)
        return out

    def radial_intervals(self, omega: np.ndarray) -> list[list[tuple[float, float]]]:
        """For each unit direction ``omega`` (K, N): the set {rho >= 0 : rho*omega in Q} as intervals."""
        s = self.sign
        res = [[] for _ in range(omega.shape[0])]
        target = -s * omega
        for j in self.levels:
            cen = self.centers[j]
            d1, d2 = self.c * 2.0 ** (-j), self.c * 2.0 ** (-j / 2.0)
            cand = cKDTree(cen).query_ball_point(target, r=2.0 * d2 + 1e-12)
            for k, idx in enumerate(cand):
                if not idx:
                    continue
                p = cen[idx]
                g = p @ omega[k]  # cosine between direction and centre
                # |rho g + s| <= d1 (g != 0 near the front)
                with np.errstate(divide="ignore", invalid="ignore"):
                    l1 = np.where(g != 0, (-s - d1) / g, -np.inf)
                    l2 = np.where(g != 0, (-s + d1) / g, np.inf)
                lo1, hi1 = np.minimum(l1, l2), np.maximum(l1, l2)
                # |rho omega + s p|^2 = rho^2 + 2 s g rho + 1 <= d2^2
                disc = (s * g) ** 2 - (1.0 - d2 * d2)
                ok = disc >= 0
                sq = np.sqrt(np.where(ok, disc, 0.0))
                lo2, hi2 = -s * g - sq, -s * g + sq
                lo = np.maximum(np.maximum(lo1, lo2), 0.0)
                hi = np.minimum(hi1, hi2)
                keep = ok & (hi > lo)
                res[k].extend(zip(lo[keep].tolist(), hi[keep].tolist()))
        return res


def influence_levels(r: float, extra: int = 4) -> tuple[int, ...]:
    if not 0 < r < 1:
        raise DomainError("r must lie in (0, 1)")
    j0 = max(1, math.ceil(math.log2(1.0 / r) - 1e-12))
    return tuple(range(j0, j0 + extra + 1))


def influence_region(r: float, c: float = 1.0, sphere_dim: int = 2, sign: int = 1,
                     extra_levels: int = 4) -> InfluenceRegion:
    """Q_r for dimension ``sphere_dim`` (N = 2 or 3)."""
    if c <= 0:
        raise DomainError("c must be > 0")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    levels = influence_levels(r, extra_levels)
    centers = {j: sphere_points(j, sphere_dim) for j in levels}
    return InfluenceRegion(float(r), float(c), int(sphere_dim), sign, levels, centers)


def _union_moment(intervals, power: int) -> float:
    if not intervals:
        return 0.0
    iv = sorted(intervals)
    tot = 0.0
    cur_lo, cur_hi = iv[0]
    for lo, hi in iv[1:]:
        if lo > cur_hi:
            tot += (cur_hi ** (power + 1) - cur_lo ** (power + 1)) / (power + 1)
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    tot += (cur_hi ** (power + 1) - cur_lo ** (power + 1)) / (power + 1)
    return tot


def _directions(dim: int, n: int) -> tuple[np.ndarray, float]:
    if dim == 2:
        return _circle_points(n), 2 * np.pi / n
    if dim == 3:
        return _fibonacci_points(n), 4 * np.pi / n
    raise ValidationError("volume measurement implemented for N = 2, 3")


def region_volume(region: InfluenceRegion, n_dirs: int | None = None) -> float:
    """|Q_r| by exact radial integration along a dense set of directions."""
    N = region.dim
    if n_dirs is None:
        jmax = region.levels[-1]
        per = 8 * 2 ** (jmax / 2.0)  # >= 8 directions per finest cap width
        # N = 3 is converged to ~1e-4 relative at 2^14 spiral directions
        n_dirs = max(int(2 * np.pi * per), 2048) if N == 2 else 2 ** 14
    omega, w = _directions(N, n_dirs)
    total = 0.0
    for start in range(0, omega.shape[0], 4096):
        chunk = omega[start:start + 4096]
        for iv in region.radial_intervals(chunk):
            total += _union_moment(iv, N - 1)
    return total * w


def region_volume_mc(region: InfluenceRegion, samples: int = 10 ** 6, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of |Q_r| and its standard error, sampled in the covering shell."""
    rng = np.random.default_rng(seed)
    N = region.dim
    j0 = region.levels[0]
    d1, d2 = region.c * 2.0 ** (-j0), region.c * 2.0 ** (-j0 / 2.0)
    r_lo = math.sqrt(max(0.0, 1 - d2 * d2 - 2 * d1)) if d2 < 1 else 0.0
    r_hi = math.sqrt(1 + d2 * d2 + 2 * d1)
    u = rng.standard_normal((samples, N))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = (r_lo ** N + rng.random(samples) * (r_hi ** N - r_lo ** N)) ** (1.0 / N)
    x = u * rad[:, None]
    hit = np.zeros(samples, dtype=bool)
    for start in range(0, samples, 100_000):
        hit[start:start + 100_000] = region.contains(x[start:start + 100_000])
    shell = ball_volume(N, r_hi) - ball_volume(N, r_lo)
    p = hit.mean()
    return shell * p, shell * math.sqrt(p * (1 - p) / samples)


__all__ = [
    "bump", "cone_cutoff", "cone_cutoff_norms", "cone_factor", "shell_cutoff", "DyadicIndex",
    "PartitionSplit", "classify_partition", "CapIndex", "sphere_grid", "sphere_points",
    "nearest_spacing", "cap_partition", "cap_weight_dense", "cap_count_in_cone", "InfluenceRegion",
    "influence_region", "influence_levels", "region_volume", "region_volume_mc",
]
