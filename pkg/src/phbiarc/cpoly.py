"""Complex numbers as plane points, and complex Bernstein polynomials on [0, 1].

A Bernstein polynomial is just a 1-d ``complex128`` array of coefficients
``b_0..b_m``; the degree is ``len(b) - 1``.  Interval mapping is left to the
callers.
"""

import math
from math import comb

import numpy as np

from . import _kernels


def as_coeffs(p):
    c = np.asarray(p, dtype=np.complex128)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("Bernstein coefficients must be a non-empty 1-d sequence")
    return c


def eval(p, t):
    """Evaluate the Bernstein polynomial ``p`` at ``t`` by de Casteljau.

    ``t`` may be a scalar or an array; every value must lie in [0, 1].
    The endpoint values are returned bit-exactly.
    """
    c = as_coeffs(p)
    ts = np.asarray(t, dtype=np.float64)
    if np.any(ts < 0.0) or np.any(ts > 1.0) or np.any(np.isnan(ts)):
        raise ValueError("Bernstein parameter outside [0, 1]")
    out = _kernels.decasteljau(c, np.atleast_1d(ts).ravel())
    if ts.ndim == 0:
        return complex(out[0])
    return out.reshape(ts.shape)


def derivative(p):
    """Bernstein coefficients of ``p'`` (degree m-1)."""
    c = as_coeffs(p)
    m = c.size - 1
    if m == 0:
        return np.zeros(1, dtype=np.complex128)
    return m * np.diff(c)


def product(p, q):
    """Coefficients of ``p(t) q(t)`` in the Bernstein basis of degree m+n."""
    a, b = as_coeffs(p), as_coeffs(q)
    m, n = a.size - 1, b.size - 1
    out = np.zeros(m + n + 1, dtype=np.complex128)
    for i in range(m + 1):
        for j in range(n + 1):
            out[i + j] += comb(m, i) * comb(n, j) * a[i] * b[j]
    for k in range(m + n + 1):
        out[k] /= comb(m + n, k)
    return out


def square(p):
    """Coefficients of ``p(t)**2``, degree 2m."""
    return product(p, p)


def hermitian_product(p, q):
    """Real Bernstein coefficients of ``Re(p(t) * conj(q(t)))``.

    With ``p == q`` this is the parametric speed |w|^2 of a PH curve.
    """
    return product(p, np.conj(as_coeffs(q))).real.copy()


def chi(c):
    """Square root of ``c`` with non-negative real part.

    On the negative real axis the root ``+i sqrt(|c|)`` is returned, and
    ``chi(0) == 0``.  The two half-planes are handled separately so neither
    branch subtracts nearly equal numbers.
    """
    c = complex(c)
    c1, c2 = c.real, c.imag
    r = abs(c)
    if r == 0.0:
        return 0j
    if c1 >= 0.0:
        re = math.sqrt(0.5 * (r + c1))
        return complex(re, c2 / (2.0 * re))
    im = math.sqrt(0.5 * (r - c1))
    if c2 < 0.0:
        im = -im
    return complex(c2 / (2.0 * im), im)


def chi_array(c):
    """Vectorized :func:`chi` over a complex array."""
    c = np.asarray(c, dtype=np.complex128)
    c1, c2 = c.real, c.imag
    r = np.abs(c)
    with np.errstate(invalid="ignore", divide="ignore"):
        pos = np.sqrt(0.5 * (r + c1))
        neg = np.sqrt(0.5 * (r - c1))
        neg = np.where(c2 < 0.0, -neg, neg)
        out = np.where(c1 >= 0.0,
                       pos + 1j * (c2 / (2.0 * pos)),
                       c2 / (2.0 * neg) + 1j * neg)
    return np.where(r == 0.0, 0j, out)
