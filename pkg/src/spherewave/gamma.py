"""
Gamma and 1/Gamma for complex arguments, backed by scipy.special.

Points on the real axis go through the real-valued routines, which are
exact at small integers; scipy's complex branch is not (Gamma(3+0j) is
off by a few ulp), and exactness there matters for J_n(0).
"""
import numpy as np
from scipy import special


def _split(z):
    z = np.asarray(z, dtype=np.complex128)
    return z, z.imag == 0


def gamma(z):
    """Gamma(z); ``inf`` at the poles 0, -1, -2, ..."""
    z, real = _split(z)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = np.where(real, special.gamma(z.real) + 0j, 1.0 / special.rgamma(np.where(real, 1.0, z)))
        pole = real & (z.real <= 0) & (z.real == np.round(z.real))
        out = np.where(pole, np.inf + 0j, out)
    return out if out.ndim else out[()]


def rgamma(z):
    """1/Gamma(z); entire, exactly zero at the poles."""
    z, real = _split(z)
    out = np.where(real, special.rgamma(z.real) + 0j, special.rgamma(np.where(real, 1.0, z)))
    return out if out.ndim else out[()]


def loggamma(z):
    """Principal-branch log Gamma."""
    return special.loggamma(np.asarray(z, dtype=np.complex128))
