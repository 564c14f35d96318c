import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherewave.gamma import gamma, loggamma, rgamma


@pytest.mark.parametrize("n", range(1, 12))
def test_integers_exact(n):
    assert gamma(n) == math.factorial(n - 1)
    assert rgamma(n) * math.factorial(n - 1) == pytest.approx(1, rel=1e-15)


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_poles(n):
    assert rgamma(n) == 0
    assert np.isinf(gamma(n).real)


@given(st.floats(-8, 8), st.floats(-6, 6).filter(lambda b: abs(b) > 1e-3))
def test_complex_matches_mpmath(a, b):
    z = complex(a, b)
    ref = complex(mpmath.rgamma(z))
    assert abs(rgamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_vectorized_shapes():
    z = np.array([[0.5, 1 + 1j], [-0.5, 3.0]])
    assert rgamma(z).shape == (2, 2)
    assert gamma(z).shape == (2, 2)
    np.testing.assert_allclose(np.exp(loggamma(2.5 + 0j)), gamma(2.5), rtol=1e-14)
