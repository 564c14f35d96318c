"""
Periodic-torus discretization of R^N.

The box [-L, L)^N is sampled with M points per axis (spacing 2L/M). The
frequency lattice has spacing 1/(2L) and covers [-M/(4L), M/(4L)) per axis.
Frequency-side arrays are stored in the standard FFT index order; use
:meth:`GridSpec.frequencies` to obtain matching coordinates.

Transforms use the kernel exp(-2 pi i x.xi) forward and exp(+2 pi i x.xi)
inverse, with cell-volume weights so that the discrete sums approximate

    f^(xi) = int f(x) exp(-2 pi i x.xi) dx,
    f(x)   = int f^(xi) exp(2 pi i x.xi) dxi.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from . import _config
from .errors import ContractError, DomainError, ValidationError

PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class GridSpec:
    """Validated description of the periodic grid.

    Attributes
    ----------
    dim_total : int
        Total dimension N.
    factors : tuple of int
        Block dimensions (N_1, ..., N_n) with sum N. Axes are laid out block
        by block, so block ``i`` owns a contiguous run of ``factors[i]`` axes.
    samples_per_axis : int
        Even sample count M >= 4.
    half_width : float
        The box is [-L, L) per axis.
    """

    dim_total: int
    factors: tuple[int, ...]
    samples_per_axis: int
    half_width: float

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(f) for f in self.factors))
        if int(self.dim_total) != self.dim_total or self.dim_total < 1:
            raise ValidationError(f"dim_total must be a positive integer, got {self.dim_total!r}")
        if not self.factors or any(f < 1 for f in self.factors):
            raise ValidationError(f"factors must be positive integers, got {self.factors!r}")
        if sum(self.factors) != self.dim_total:
            raise ValidationError(
                f"factors sum {sum(self.factors)} != dim_total {self.dim_total}")
        M = self.samples_per_axis
        if int(M) != M or M < 4 or M % 2:
            raise ValidationError(f"samples_per_axis must be an even integer >= 4, got {M!r}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValidationError(f"half_width must be positive, got {self.half_width!r}")

    @property
    def n_blocks(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_axis,) * self.dim_total

    @property
    def n_points(self) -> int:
        return self.samples_per_axis ** self.dim_total

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.samples_per_axis

    @property
    def freq_spacing(self) -> float:
        return 1.0 / (2.0 * self.half_width)

    @property
    def nyquist(self) -> float:
        """Largest resolved frequency magnitude per axis, M/(4L)."""
        return self.samples_per_axis / (4.0 * self.half_width)

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim_total

    @property
    def freq_cell_volume(self) -> float:
        return self.freq_spacing ** self.dim_total

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim_total

    def block_axes(self, i: int) -> tuple[int, ...]:
        start = sum(self.factors[:i])
        return tuple(range(start, start + self.factors[i]))

    def axis(self) -> np.ndarray:
        """Physical sample positions along one axis."""
        return -self.half_width + self.spacing * np.arange(self.samples_per_axis)

    def freq_axis(self) -> np.ndarray:
        """Frequencies along one axis, in FFT index order."""
        return scipy.fft.fftfreq(self.samples_per_axis, d=self.spacing)

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable physical coordinate arrays, one per axis."""
        return _open_mesh(self.axis(), self.dim_total)

    def frequencies(self) -> list[np.ndarray]:
        """Broadcastable frequency coordinate arrays, one per axis (FFT order)."""
        return _open_mesh(self.freq_axis(), self.dim_total)

    def radius(self, side: str = PHYSICAL) -> np.ndarray:
        comps = self.coordinates() if side == PHYSICAL else self.frequencies()
        return np.sqrt(sum(c * c for c in comps))

    def block_norms(self, side: str = FREQUENCY) -> list[np.ndarray]:
        """Per-block Euclidean norms |xi_i| (or |x_i|), broadcastable to ``shape``."""
        comps = self.frequencies() if side == FREQUENCY else self.coordinates()
        out = []
        for i in range(self.n_blocks):
            ax = self.block_axes(i)
            out.append(np.sqrt(sum(comps[a] * comps[a] for a in ax)))
        return out

    def to_json(self) -> dict:
        return {"dim_total": self.dim_total, "factors": list(self.factors),
                "samples_per_axis": self.samples_per_axis, "half_width": self.half_width}


def _open_mesh(axis: np.ndarray, ndim: int) -> list[np.ndarray]:
    out = []
    for d in range(ndim):
        shape = [1] * ndim
        shape[d] = axis.size
        out.append(axis.reshape(shape))
    return out


def make_grid(dim_total, factors, samples_per_axis, half_width) -> GridSpec:
    """Build a validated :class:`GridSpec` (raises ValidationError naming the bad field)."""
    return GridSpec(int(dim_total), tuple(factors), int(samples_per_axis), float(half_width))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on one side of the transform.

    ``values`` has shape ``spec.shape`` (M^N entries) and is read-only.
    """

    spec: GridSpec
    values: np.ndarray = field(repr=False)
    side: str = PHYSICAL

    def __post_init__(self):
        if self.side not in (PHYSICAL, FREQUENCY):
            raise ValidationError(f"side must be 'physical' or 'frequency', got {self.side!r}")
        v = np.asarray(self.values, dtype=np.complex128)
        if v.size != self.spec.n_points:
            raise ValidationError(
                f"values has {v.size} entries, expected M^N = {self.spec.n_points}")
        v = v.reshape(self.spec.shape).copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def wrap(cls, spec: GridSpec, values: np.ndarray, side: str = PHYSICAL) -> "Field":
        """Adopt a freshly computed complex array without copying it."""
        obj = object.__new__(cls)
        v = np.asarray(values, dtype=np.complex128).reshape(spec.shape)
        v.flags.writeable = False
        object.__setattr__(obj, "spec", spec)
        object.__setattr__(obj, "values", v)
        object.__setattr__(obj, "side", side)
        return obj

    def __add__(self, other: "Field") -> "Field":
        _same(self, other)
        return Field.wrap(self.spec, self.values + other.values, self.side)

    def __sub__(self, other: "Field") -> "Field":
        _same(self, other)
        return Field.wrap(self.spec, self.values - other.values, self.side)

    def __mul__(self, c) -> "Field":
        return Field.wrap(self.spec, self.values * c, self.side)

    __rmul__ = __mul__


def _same(a: Field, b: Field):
    if a.spec != b.spec or a.side != b.side:
        raise ContractError("fields live on different grids or sides")


def from_function(spec: GridSpec, func, side: str = PHYSICAL) -> Field:
    """Sample ``func(*coords)`` on the grid (coords broadcast per axis)."""
    coords = spec.coordinates() if side == PHYSICAL else spec.frequencies()
    vals = np.broadcast_to(func(*coords), spec.shape)
    return Field.wrap(spec, np.array(vals, dtype=np.complex128), side)


def _signs(spec: GridSpec) -> np.ndarray:
    # (-1)^k per axis; folds the x_0 = -L offset into the DFT.
    M = spec.samples_per_axis
    k = np.fft.fftfreq(M, d=1.0 / M).astype(np.int64)
    s = np.where(k % 2 == 0, 1.0, -1.0)
    total = np.ones(spec.shape)
    for a in _open_mesh(s, spec.dim_total):
        total = total * a
    return total


def forward_values(spec: GridSpec, values: np.ndarray) -> np.ndarray:
    out = scipy.fft.fftn(values, workers=_config.threads())
    out *= _signs(spec)
    out *= spec.cell_volume
    return out


def inverse_values(spec: GridSpec, values: np.ndarray) -> np.ndarray:
    out = scipy.fft.ifftn(values * _signs(spec), workers=_config.threads())
    out *= spec.freq_cell_volume * spec.n_points
    return out


def transform(f: Field, direction: str = "forward") -> Field:
    """Forward (physical -> frequency) or inverse (frequency -> physical) transform."""
    if direction == "forward":
        if f.side != PHYSICAL:
            raise ContractError("forward transform expects a physical-side field")
        return Field.wrap(f.spec, forward_values(f.spec, f.values), FREQUENCY)
    if direction == "inverse":
        if f.side != FREQUENCY:
            raise ContractError("inverse transform expects a frequency-side field")
        return Field.wrap(f.spec, inverse_values(f.spec, f.values), PHYSICAL)
    raise ValidationError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def _as_p_list(spec: GridSpec, p) -> list[float]:
    if np.isscalar(p):
        ps = [float(p)] * spec.n_blocks
    else:
        ps = [float(q) for q in p]
        if len(ps) != spec.n_blocks:
            raise ValidationError(f"need {spec.n_blocks} exponents, got {len(ps)}")
    for q in ps:
        if not q >= 1:
            raise DomainError(f"norm exponents must be >= 1, got {q}")
    return ps


def norm_values(spec: GridSpec, values: np.ndarray, p_per_factor, side: str = PHYSICAL) -> float:
    ps = _as_p_list(spec, p_per_factor)
    h = spec.spacing if side == PHYSICAL else spec.freq_spacing
    g = np.abs(values)
    # innermost block (x_n) first
    for i in reversed(range(spec.n_blocks)):
        ax = spec.block_axes(i)
        # earlier blocks were reduced already, so the axes of block i are the trailing ones
        axes = tuple(range(g.ndim - len(ax), g.ndim))
        q = ps[i]
        if math.isinf(q):
            g = g.max(axis=axes)
        else:
            w = h ** len(ax)
            gmax = g.max(axis=axes, keepdims=True)
            safe = np.where(gmax > 0, gmax, 1.0)
            g = (np.sum((g / safe) ** q, axis=axes) * w) ** (1.0 / q) * np.squeeze(safe, axis=axes)
    return float(g)


def norm(f: Field, p_per_factor=2.0) -> float:
    """Iterated mixed norm ||f||_{L^{p_1} ... L^{p_n}} with Riemann-sum weights.

    ``p_per_factor`` is a scalar (plain L^p) or one exponent per block; ``inf``
    selects the max over a block.
    """
    if f.side != PHYSICAL:
        raise ContractError("norm expects a physical-side field")
    return norm_values(f.spec, f.values, p_per_factor)


# ---------------------------------------------------------------------------
# serialization

def save_field(f: Field, fp) -> None:
    """Write a JSON header line followed by little-endian interleaved (re, im) doubles."""
    header = dict(f.spec.to_json(), side=f.side, dtype="<f8", layout="interleaved-re-im")
    data = np.ascontiguousarray(f.values).view(np.float64).astype("<f8", copy=False)
    if isinstance(fp, (str, bytes)) or hasattr(fp, "__fspath__"):
        with open(fp, "wb") as fh:
            _write(fh, header, data)
    else:
        _write(fp, header, data)


def _write(fh, header, data):
    fh.write((json.dumps(header) + "\n").encode())
    fh.write(data.tobytes())


def load_field(fp) -> Field:
    if isinstance(fp, (str, bytes)) or hasattr(fp, "__fspath__"):
        with open(fp, "rb") as fh:
            raw = fh.read()
    else:
        raw = fp.read()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode())
    spec = make_grid(header["dim_total"], header["factors"],
                     header["samples_per_axis"], header["half_width"])
    data = np.frombuffer(raw[nl + 1:], dtype="<f8")
    if data.size != 2 * spec.n_points:
        raise ValidationError(f"payload has {data.size} doubles, expected {2 * spec.n_points}")
    vals = data[0::2] + 1j * data[1::2]
    return Field(spec, vals.reshape(spec.shape), header.get("side", PHYSICAL))


def field_to_csv(f: Field) -> str:
    """CSV with one index column per axis followed by re, im (17 significant digits)."""
    buf = io.StringIO()
    cols = [f"i{d}" for d in range(f.spec.dim_total)]
    buf.write(",".join(cols + ["re", "im"]) + "\n")
    idx = np.indices(f.spec.shape).reshape(f.spec.dim_total, -1).T
    flat = f.values.reshape(-1)
    for ii, v in zip(idx, flat):
        buf.write(",".join(str(int(k)) for k in ii))
        buf.write(f",{v.real:.17g},{v.imag:.17g}\n")
    return buf.getvalue()


def ball_volume(dim: int, radius: float = 1.0) -> float:
    return math.pi ** (dim / 2) * radius ** dim / math.gamma(dim / 2 + 1)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^{dim-1} in R^dim."""
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


__all__ = [
    "GridSpec", "Field", "make_grid", "transform", "norm", "from_function",
    "save_field", "load_field", "field_to_csv", "PHYSICAL", "FREQUENCY",
    "ball_volume", "sphere_area",
]
