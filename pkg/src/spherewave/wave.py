"""
Spectral Duhamel solver for u_tt - Laplace u = g with zero initial data.

Each Fourier mode is an undamped oscillator with frequency a = 2 pi |xi|, so

    u-hat(xi, t) = int_0^t sin(a (t - tau)) / a * g-hat(xi, tau) dtau

exactly. The only discretization in time is the composite trapezoid rule in
tau, evaluated for all output times at once through the splitting
sin(a(t - tau)) = sin(at) cos(a tau) - cos(at) sin(a tau) and cumulative sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, ValidationError
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, forward_values, inverse_values, norm_values
from .sobolev import SobolevParams, sobolev_norm

PHASES = ("plus", "minus")


@dataclass(frozen=True)
class WaveConfig:
    spec: GridSpec
    T: float
    steps: int
    phase_sign: str = "plus"

    def __post_init__(self):
        if not self.T > 0:
            raise ValidationError(f"T must be > 0, got {self.T}")
        if int(self.steps) < 2:
            raise ValidationError(f"steps must be >= 2, got {self.steps}")
        if self.phase_sign not in PHASES:
            raise ValidationError(f"phase_sign must be one of {PHASES}")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    @property
    def sign(self) -> int:
        return 1 if self.phase_sign == "plus" else -1


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """Physical-side fields on a uniform time grid; ``values`` has shape (K, *spec.shape)."""

    spec: GridSpec
    times: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (t.size,) + self.spec.shape:
            raise ValidationError(f"values shape {v.shape} does not match times and grid")
        t = t.copy()
        t.flags.writeable = False
        if not v.flags.owndata or v.flags.writeable:
            v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size

    def __getitem__(self, n: int) -> Field:
        return Field.wrap(self.spec, self.values[n], PHYSICAL)

    @classmethod
    def from_function(cls, spec: GridSpec, times, func) -> "FieldSeries":
        """Sample ``func(t, *coords)`` at each time."""
        coords = spec.coordinates()
        vals = np.stack([np.broadcast_to(func(t, *coords), spec.shape) for t in times])
        return cls(spec, times, vals)

    @classmethod
    def zeros(cls, spec: GridSpec, times) -> "FieldSeries":
        return cls(spec, times, np.zeros((len(times),) + spec.shape, dtype=np.complex128))


def propagator_hat(tau, xi_norm):
    """sin(2 pi tau |xi|) / (2 pi |xi|), equal to tau at xi = 0."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau < 0):
        raise DomainError("tau must be >= 0")
    a = 2 * np.pi * np.abs(np.asarray(xi_norm, dtype=np.float64))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(a > 0, np.sin(a * tau) / np.where(a > 0, a, 1.0), tau)
    return out if np.ndim(out) else float(out)


def half_propagator(tau, xi_norm, sign: int):
    """One phase branch sign * e^{sign 2 pi i tau|xi|}/(2i * 2 pi|xi|); the two branches sum to propagator_hat."""
    a = 2 * np.pi * np.abs(np.asarray(xi_norm, dtype=np.float64))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = sign * np.exp(sign * 1j * a * tau) / (2j * np.where(a > 0, a, np.inf))
    return out


def _check_times(g: FieldSeries, config: WaveConfig):
    if g.spec != config.spec:
        raise ContractError("forcing lives on a different grid than the config")
    if g.times.size != config.steps + 1 or not np.allclose(g.times, config.times, rtol=0, atol=1e-12 * config.T):
        raise ContractError(f"forcing must be sampled at the {config.steps + 1} uniform times of the config")


def _spectra(series: FieldSeries) -> np.ndarray:
    return np.stack([forward_values(series.spec, v) for v in series.values])


def _cumtrapz(vals: np.ndarray, dt: float) -> np.ndarray:
    # C[n] = trapezoid sum of vals[0..n] over [0, t_n]
    cs = np.cumsum(vals, axis=0)
    out = dt * (cs - 0.5 * vals[:1] - 0.5 * vals)
    out[0] = 0.0
    return out


def solve_wave(g: FieldSeries, config: WaveConfig) -> FieldSeries:
    """Duhamel solution on the config's time grid; u(., 0) = 0."""
    _check_times(g, config)
    spec = config.spec
    dt = config.dt
    t = config.times.reshape((-1,) + (1,) * spec.dim_total)
    a = 2 * np.pi * spec.radius(FREQUENCY)[None]
    gh = _spectra(g)
    at = a * t
    cos_at, sin_at = np.cos(at), np.sin(at)
    C = _cumtrapz(cos_at * gh, dt)
    S = _cumtrapz(sin_at * gh, dt)
    zero = a == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        uh = (sin_at * C - cos_at * S) / np.where(zero, 1.0, a)
    if np.any(zero):
        # kernel (t - tau) on the zero mode
        g0 = gh[(slice(None),) + (0,) * spec.dim_total]
        tt = config.times
        G0 = _cumtrapz(g0, dt)
        G1 = _cumtrapz(tt * g0, dt)
        uh[(slice(None),) + (0,) * spec.dim_total] = tt * G0 - G1
    u = np.stack([inverse_values(spec, v) for v in uh])
    return FieldSeries(spec, config.times, u)


def laplacian_values(spec: GridSpec, values: np.ndarray) -> np.ndarray:
    xi = spec.radius(FREQUENCY)
    return inverse_values(spec, -(2 * np.pi * xi) ** 2 * forward_values(spec, values))


def residual(u: FieldSeries, g: FieldSeries, config: WaveConfig) -> FieldSeries:
    """u_tt (centred second difference) - Laplace u (spectral) - g on interior times."""
    _check_times(u, config)
    _check_times(g, config)
    if len(u) < 3:
        raise ContractError("residual needs at least three time slices")
    dt = config.dt
    v = u.values
    utt = (v[2:] - 2 * v[1:-1] + v[:-2]) / (dt * dt)
    lap = np.stack([laplacian_values(u.spec, x) for x in v[1:-1]])
    return FieldSeries(u.spec, u.times[1:-1], utt - lap - g.values[1:-1])


def series_l2(series: FieldSeries) -> float:
    """sqrt(dt * sum_n ||f_n||_2^2) over the series' time grid (space-time L^2)."""
    spec = series.spec
    per = np.array([norm_values(spec, v, 2.0) for v in series.values])
    dt = series.times[1] - series.times[0] if len(series) > 1 else 1.0
    return float(math.sqrt(dt * np.sum(per ** 2)))


def gradient_norm(spec: GridSpec, values: np.ndarray, p: float) -> float:
    """|| |grad u| ||_{L^p} with the gradient taken spectrally."""
    uh = forward_values(spec, values)
    sq = np.zeros(spec.shape)
    for c in spec.frequencies():
        d = inverse_values(spec, 2j * np.pi * c * uh)
        sq = sq + np.abs(d) ** 2
    return norm_values(spec, np.sqrt(sq), p)


@dataclass
class AprioriResult:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.rhs > 0, self.lhs / np.where(self.rhs > 0, self.rhs, 1.0), np.nan)

    @property
    def final(self) -> tuple[float, float, float]:
        return float(self.lhs[-1]), float(self.rhs[-1]), float(self.ratio[-1])


def apriori_window_violations(dim: int, params: SobolevParams) -> list[str]:
    N = dim
    s = params.s_total
    out = []
    if not 0 <= s < (N - 1) / 2:
        out.append(f"need 0 <= |s| < (N-1)/2 = {(N - 1) / 2:g}, got |s| = {s:g}")
    if N > 1 and abs(0.5 - 1.0 / params.p) > s / (N - 1) + 1e-15:
        out.append(f"need |1/2 - 1/p| <= |s|/(N-1): |1/2 - 1/{params.p:g}| = "
                   f"{abs(0.5 - 1.0 / params.p):g} > {s / (N - 1):g}")
    return out


def apriori_check(g: FieldSeries, params: SobolevParams, config: WaveConfig) -> AprioriResult:
    """lhs(t) = || |grad u(t)| ||_p and rhs(t) = int_0^t ||g(tau)||_{L^p_s} dtau."""
    problems = apriori_window_violations(config.spec.dim_total, params)
    if problems:
        raise DomainError("; ".join(problems))
    u = solve_wave(g, config)
    lhs = np.array([gradient_norm(config.spec, v, params.p) for v in u.values])
    gn = np.array([sobolev_norm(g[n], params) for n in range(len(g))])
    rhs = _cumtrapz(gn, config.dt)
    return AprioriResult(config.times.copy(), lhs, rhs)


# ---------------------------------------------------------------------------
# forcing factories

def manufactured_forcing(config: WaveConfig, k, omega: float) -> tuple[FieldSeries, FieldSeries]:
    """Forcing and exact solution for u* = sin(2 pi k.x) [sin(wt) - (w/a) sin(at)], a = 2 pi |k|.

    u* has zero initial position and velocity; g = (a^2 - w^2) sin(2 pi k.x) sin(wt).
    ``k`` is in frequency units (cycles per unit length) and must lie on the
    grid's frequency lattice for the spatial part to be periodic.
    """
    k = np.asarray(k, dtype=np.float64)
    a = 2 * np.pi * float(np.linalg.norm(k))
    if a == 0 or abs(a - omega) < 1e-12:
        raise DomainError("need 2 pi |k| > 0 and different from omega")
    spec = config.spec

    def spatial(*xs):
        return np.sin(2 * np.pi * sum(ki * x for ki, x in zip(k, xs)))

    g = FieldSeries.from_function(spec, config.times,
                                  lambda t, *xs: (a * a - omega * omega) * spatial(*xs) * math.sin(omega * t))
    u = FieldSeries.from_function(spec, config.times,
                                  lambda t, *xs: spatial(*xs) * (math.sin(omega * t) - omega / a * math.sin(a * t)))
    return g, u


def mode_forcing(config: WaveConfig, k) -> FieldSeries:
    """g(x, t) = e^{2 pi i k.x}, constant in time."""
    k = np.asarray(k, dtype=np.float64)
    return FieldSeries.from_function(
        config.spec, config.times,
        lambda t, *xs: np.exp(2j * np.pi * sum(ki * x for ki, x in zip(k, xs))))


def random_forcing(config: WaveConfig, rng: np.random.Generator, kmax: float = 2.0,
                   n_freq: int = 3) -> FieldSeries:
    """Real band-limited forcing: modes |xi| <= kmax, each a random sum of temporal sinusoids."""
    spec = config.spec
    xi = spec.radius(FREQUENCY)
    band = xi <= kmax
    idx = np.flatnonzero(band.ravel())
    amp = rng.standard_normal((n_freq, idx.size)) + 1j * rng.standard_normal((n_freq, idx.size))
    freq = rng.uniform(0.0, 2 * np.pi * kmax, size=(n_freq, idx.size))
    vals = np.empty((config.steps + 1,) + spec.shape, dtype=np.complex128)
    flat = np.zeros(spec.n_points, dtype=np.complex128)
    for n, t in enumerate(config.times):
        flat[:] = 0
        flat[idx] = np.sum(amp * np.sin(freq * t + 0.5), axis=0)
        vals[n] = inverse_values(spec, flat.reshape(spec.shape)).real
    return FieldSeries(spec, config.times, vals)


def delayed(g: FieldSeries, steps: int = 1) -> FieldSeries:
    """g shifted later by ``steps`` time slices, zero-filled at the start."""
    v = np.zeros_like(g.values)
    v[steps:] = g.values[:-steps]
    return FieldSeries(g.spec, g.times, v)


__all__ = [
    "WaveConfig", "FieldSeries", "propagator_hat", "half_propagator", "solve_wave", "residual",
    "laplacian_values", "series_l2", "gradient_norm", "AprioriResult", "apriori_check",
    "apriori_window_violations", "manufactured_forcing", "mode_forcing", "random_forcing", "delayed",
]
