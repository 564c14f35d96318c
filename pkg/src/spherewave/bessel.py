"""
Bessel functions of the first kind J_nu(rho) for complex order nu = a + ib.

Three evaluation routes are provided:

* the ascending power series (accurate for small and moderate rho),
* the integral representation (Re nu > -1/2, used as an independent check),
* the large-argument Hankel expansion with coefficients built from the
  bracket [nu, m] = Gamma(1/2 + nu + m) / (m! Gamma(1/2 + nu - m)).

:func:`bessel_j` picks the series below the switchover radius and the
asymptotic expansion (optimally truncated) above it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, RangeError, RegimeError, ValidationError
from .gamma import gamma, rgamma

EPS = 1e-16
MAX_SERIES_TERMS = 600
MAX_ASYMPTOTIC_TERMS = 40


@dataclass(frozen=True)
class BesselOrder:
    """Order nu = a + ib."""

    a: float
    b: float = 0.0

    @property
    def nu(self) -> complex:
        return complex(self.a, self.b)

    def shifted(self, da: float) -> "BesselOrder":
        return BesselOrder(self.a + da, self.b)


def as_order(order) -> BesselOrder:
    if isinstance(order, BesselOrder):
        return order
    if isinstance(order, tuple):
        return BesselOrder(float(order[0]), float(order[1]))
    z = complex(order)
    return BesselOrder(z.real, z.imag)


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Coefficients of the k-th correction in the Hankel expansion.

    ``a_k`` multiplies cos(w) rho^{-2k}; ``b_k`` is recorded with the sign
    convention (-1)^{k+1} [nu, 2k-1] 2^{-2k+1}. With that convention the sine
    correction enters the expansion with a minus sign; see
    :func:`bessel_asymptotic`.
    """

    k: int
    a_k: complex
    b_k: complex
    bracket: complex


def switchover(order) -> float:
    """Radius above which :func:`bessel_j` uses the asymptotic expansion."""
    o = as_order(order)
    return max(12.0, 0.5 * (abs(o.a) + abs(o.b)) ** 2)


# ---------------------------------------------------------------------------
# coefficients

def bracket(order, m: int) -> complex:
    """[nu, m] = Gamma(1/2 + nu + m) / (m! Gamma(1/2 + nu - m)).

    Evaluated with 1/Gamma in the denominator so that Gamma poles give 0.
    """
    if m < 0:
        raise ValidationError(f"m must be >= 0, got {m}")
    if m == 0:
        return 1.0 + 0j
    nu = as_order(order).nu
    top = 0.5 + nu + m
    if top.imag == 0 and top.real <= 0 and top.real == round(top.real):
        # numerator pole as well: fall back to the finite product form
        return _bracket_product(nu, m)
    return complex(gamma(top) * rgamma(0.5 + nu - m)) / math.factorial(m)


def _bracket_product(nu: complex, m: int) -> complex:
    prod = 1.0 + 0j
    for i in range(1, m + 1):
        prod *= 4 * nu * nu - (2 * i - 1) ** 2
    return prod / (4.0 ** m * math.factorial(m))


def asymptotic_coeffs(order, k: int) -> AsymptoticCoeffs:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    br2 = bracket(order, 2 * k)
    br1 = bracket(order, 2 * k - 1)
    a_k = (-1) ** k * br2 * 2.0 ** (-2 * k)
    b_k = (-1) ** (k + 1) * br1 * 2.0 ** (-2 * k + 1)
    return AsymptoticCoeffs(k, a_k, b_k, br2)


def _coeff_arrays(order, n: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.empty(n, dtype=np.complex128)
    b = np.empty(n, dtype=np.complex128)
    for k in range(1, n + 1):
        c = asymptotic_coeffs(order, k)
        a[k - 1], b[k - 1] = c.a_k, c.b_k
    return a, b


# ---------------------------------------------------------------------------
# series

def _is_negative_integer(nu: complex) -> bool:
    return nu.imag == 0 and nu.real < 0 and nu.real == round(nu.real)


def series_scaled(order, rho, terms: int = MAX_SERIES_TERMS, return_error: bool = False):
    """(rho/2)^{-nu} J_nu(rho) by its ascending series (an entire function of rho).

    Sums sum_k (-1)^k (rho/2)^{2k} / (k! Gamma(nu + k + 1)) until the last term
    drops below 1e-16 of the partial sum. With ``return_error`` the rounding
    error estimate (largest term times machine epsilon) is returned as well.
    """
    nu = as_order(order).nu
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise DomainError("rho must be >= 0")
    if terms < 1:
        raise ValidationError("terms must be >= 1")
    if _is_negative_integer(nu):
        n = int(-nu.real)
        # J_{-n} = (-1)^n J_n and (rho/2)^{n} rescales the scaled form
        base = series_scaled(-nu, rho, terms, return_error)
        fac = (-1) ** n * (rho / 2.0) ** (2 * n)
        if return_error:
            return base[0] * fac, base[1] * np.abs(fac)
        return base * fac
    x = -(rho / 2.0) ** 2
    term = np.full(rho.shape, complex(rgamma(nu + 1.0)), dtype=np.complex128)
    total = term.copy()
    biggest = np.abs(term)
    active = np.ones(rho.shape, dtype=bool)
    kmin = float(np.max(rho, initial=0.0)) / 2.0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, terms):
            term = term * x / (k * (nu + k))
            total = np.where(active, total + term, total)
            biggest = np.maximum(biggest, np.abs(term))
            if k > kmin:
                active &= ~(np.abs(term) < EPS * np.abs(total))
                if not active.any():
                    break
    if not np.all(np.isfinite(total)) or not np.all(np.isfinite(biggest)):
        raise RangeError("power series overflowed; use the asymptotic method for large rho")
    if return_error:
        return total, 4 * EPS * biggest
    return total


def _power(rho, nu):
    rho = np.asarray(rho, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(nu * np.log(rho / 2.0 + 0j))
    zero = rho == 0
    if np.any(zero):
        if nu == 0:
            fill = 1.0 + 0j
        elif nu.real > 0:
            fill = 0j
        else:
            fill = complex(np.inf, 0)
        out = np.where(zero, fill, out)
    return out


def bessel_series(order, rho, terms: int = MAX_SERIES_TERMS):
    """J_nu(rho) from the ascending series; see :func:`series_scaled`."""
    nu = as_order(order).nu
    rho_a = np.asarray(rho, dtype=np.float64)
    out = _power(rho_a, nu) * series_scaled(nu, rho_a, terms)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# asymptotic expansion

def _asymptotic_sum(nu, rho, a, b, adaptive):
    w = rho - nu * (np.pi / 2) - np.pi / 4
    cos_sum = np.ones(rho.shape, dtype=np.complex128)
    sin_sum = np.zeros(rho.shape, dtype=np.complex128)
    if adaptive:
        prev = np.full(rho.shape, np.inf)
        active = np.ones(rho.shape, dtype=bool)
        for k in range(1, a.size + 1):
            ta = a[k - 1] * rho ** (-2.0 * k)
            tb = b[k - 1] * rho ** (-2.0 * k + 1)
            size = np.abs(ta) + np.abs(tb)
            # stop at the smallest term (optimal truncation) or at convergence
            active &= size < prev
            cos_sum = np.where(active, cos_sum + ta, cos_sum)
            sin_sum = np.where(active, sin_sum + tb, sin_sum)
            active &= size > EPS * (np.abs(cos_sum) + np.abs(sin_sum))
            prev = size
            if not active.any():
                break
    else:
        for k in range(1, a.size + 1):
            cos_sum = cos_sum + a[k - 1] * rho ** (-2.0 * k)
            sin_sum = sin_sum + b[k - 1] * rho ** (-2.0 * k + 1)
    amp = np.sqrt(2.0 / (np.pi * rho))
    return amp * (np.cos(w) * cos_sum - np.sin(w) * sin_sum)


def bessel_asymptotic(order, rho, terms: int | None = None, check_regime: bool = True):
    """Hankel expansion truncated after ``terms`` corrections.

    (pi rho/2)^{-1/2} [cos w (1 + sum a_k rho^{-2k}) - sin w sum b_k rho^{-2k+1}],
    w = rho - nu pi/2 - pi/4. With ``terms=None`` the expansion is truncated
    adaptively at its smallest term.
    """
    o = as_order(order)
    rho_a = np.asarray(rho, dtype=np.float64)
    if np.any(rho_a <= 0):
        raise DomainError("rho must be > 0")
    if check_regime and np.any(rho_a < switchover(o)):
        raise RegimeError(
            f"rho below the asymptotic switchover {switchover(o):.6g} for order {o.nu}")
    n = MAX_ASYMPTOTIC_TERMS if terms is None else int(terms)
    if n < 0:
        raise ValidationError("terms must be >= 0")
    a, b = _coeff_arrays(o, n)
    out = _asymptotic_sum(o.nu, rho_a, a, b, adaptive=terms is None)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# integral representation

def bessel_integral(order, rho: float) -> complex:
    """J_nu(rho) from the integral over [-1, 1] of exp(i rho s)(1 - s^2)^{nu - 1/2}.

    Requires Re nu > -1/2. With s = cos(theta) the integrand becomes
    exp(i rho cos theta) sin(theta)^{2 nu} on [0, pi]; the endpoint factor
    (theta (pi - theta))^{2a} is handed to QUADPACK as an algebraic weight
    and the remaining factor is smooth.
    """
    o = as_order(order)
    if not o.a > -0.5:
        raise RegimeError("integral formula requires a > -1/2")
    if rho < 0:
        raise DomainError("rho must be >= 0")
    nu = o.nu

    def f(th):
        # sin(th) / (th (pi - th)) is smooth and positive on [0, pi]
        q = math.sin(th) / (th * (math.pi - th)) if 0 < th < math.pi else 1.0 / math.pi
        return np.exp(1j * rho * math.cos(th)) * q ** (2 * nu) * np.exp(2j * o.b * math.log(th * (math.pi - th))
                                                                      if 0 < th < math.pi else 0.0)

    e = 2 * o.a
    opts = dict(weight="alg", wvar=(e, e), limit=400, epsabs=1e-13, epsrel=1e-12)
    re = integrate.quad(lambda t: f(t).real, 0, math.pi, **opts)[0]
    im = integrate.quad(lambda t: f(t).imag, 0, math.pi, **opts)[0]
    pref = complex(_power(np.array(rho), nu)) * complex(rgamma(nu + 0.5)) / math.sqrt(math.pi)
    return pref * complex(re, im)


# ---------------------------------------------------------------------------
# dispatch

def bessel_j(order, rho, method: str = "auto", terms: int | None = None):
    """J_nu(rho), vectorized over ``rho``.

    ``method`` is 'series', 'asymptotic' or 'auto' (series below
    :func:`switchover`, optimally truncated asymptotics above).
    """
    o = as_order(order)
    rho_a = np.asarray(rho, dtype=np.float64)
    if np.any(rho_a < 0):
        raise DomainError("rho must be >= 0")
    if method == "series":
        out = bessel_series(o, rho_a, terms or MAX_SERIES_TERMS)
    elif method == "asymptotic":
        out = bessel_asymptotic(o, rho_a, terms)
    elif method == "auto":
        out = _auto(o, rho_a, switchover(o))
    else:
        raise ValidationError(f"unknown method {method!r}")
    out = np.asarray(out, dtype=np.complex128)
    return out if out.ndim else complex(out)


def _auto(o: BesselOrder, rho: np.ndarray, cut: float) -> np.ndarray:
    out = np.empty(rho.shape, dtype=np.complex128)
    low = rho < cut
    if np.any(low):
        out[low] = bessel_series(o, rho[low])
    if np.any(~low):
        out[~low] = bessel_asymptotic(o, rho[~low], None, check_regime=False)
    return out


def recurrence_residual(order, rho) -> float:
    """|J_{nu-1} + J_{nu+1} - (2 nu / rho) J_nu| with one shared evaluation path.

    The path (series or asymptotic) is fixed by the switchover of the largest
    of the three orders, so all three values come from the same method.
    """
    o = as_order(order)
    rho_a = np.asarray(rho, dtype=np.float64)
    if np.any(rho_a <= 0):
        raise DomainError("rho must be > 0")
    cut = max(switchover(o.shifted(-1)), switchover(o.shifted(1)))
    vals = [_auto(o.shifted(d), rho_a, cut) for d in (-1.0, 0.0, 1.0)]
    res = np.abs(vals[0] + vals[2] - 2.0 * o.nu / rho_a * vals[1])
    return res if res.ndim else float(res)


def norm_bound_constant(order, rho, c: float = math.pi / 2) -> float:
    """Smallest C with |rho^{-nu} J_nu(rho)| <= C (1 + rho)^{-(1/2 + a)} e^{c|b|} on ``rho``."""
    o = as_order(order)
    rho_a = np.asarray(rho, dtype=np.float64)
    # rho^{-nu} J_nu = 2^{-nu} (rho/2)^{-nu} J_nu; the scaled series is finite at 0
    low = rho_a < switchover(o)
    val = np.empty(rho_a.shape)
    val[low] = np.abs(2.0 ** (-o.nu) * series_scaled(o, rho_a[low]))
    val[~low] = np.abs(_power(rho_a[~low], -o.nu) * 2.0 ** (-o.nu) * bessel_asymptotic(o, rho_a[~low]))
    ratio = val * (1.0 + rho_a) ** (0.5 + o.a) * math.exp(-c * abs(o.b))
    return float(np.max(ratio))


__all__ = [
    "BesselOrder", "AsymptoticCoeffs", "bracket", "asymptotic_coeffs", "bessel_series",
    "bessel_asymptotic", "bessel_integral", "bessel_j", "recurrence_residual",
    "series_scaled", "switchover", "norm_bound_constant",
]
