"""Hot numeric loops with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and ``PHBIARC_NUMBA`` is
not set to ``0``.  Both paths expose the same three functions:

``decasteljau(coeffs, ts)``
    Evaluate a complex Bernstein polynomial at many parameters.
``preimage_and_derivative(w, ts)``
    Values and first derivatives of a cubic preimage.
``energy_panels(w, lo, hi, nodes, weights, power)``
    Gauss-Legendre integral of ``4 Im(conj(w) w')^2 / |w|^(2*power)`` on
    each panel ``[lo[k], hi[k]]``.
"""

import os

import numpy as np


class numpy_impl:
    @staticmethod
    def decasteljau(coeffs, ts):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        ts = np.asarray(ts, dtype=np.float64)
        s = 1.0 - ts
        work = np.broadcast_to(coeffs[:, None], (coeffs.size, ts.size)).copy()
        for r in range(coeffs.size - 1, 0, -1):
            work[:r] = s * work[:r] + ts * work[1:r + 1]
        return work[0]

    @staticmethod
    def preimage_and_derivative(w, ts):
        w = np.asarray(w, dtype=np.complex128)
        ts = np.asarray(ts, dtype=np.float64)
        s = 1.0 - ts
        val = (s**3) * w[0] + (3.0 * s * s * ts) * w[1] + (3.0 * s * ts * ts) * w[2] + (ts**3) * w[3]
        d0, d1, d2 = w[1] - w[0], w[2] - w[1], w[3] - w[2]
        der = 3.0 * ((s * s) * d0 + (2.0 * s * ts) * d1 + (ts * ts) * d2)
        return val, der

    @staticmethod
    def energy_panels(w, lo, hi, nodes, weights, power):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        ts = mid[:, None] + half[:, None] * nodes[None, :]
        val, der = numpy_impl.preimage_and_derivative(w, ts.ravel())
        sigma = val.real**2 + val.imag**2
        im = val.real * der.imag - val.imag * der.real
        f = (4.0 * im * im / sigma**power).reshape(ts.shape)
        return half * (f @ weights)


class numba_impl:
    pass


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def decasteljau(coeffs, ts):
        m = coeffs.size
        out = np.empty(ts.size, dtype=np.complex128)
        work = np.empty(m, dtype=np.complex128)
        for k in range(ts.size):
            t = ts[k]
            s = 1.0 - t
            for i in range(m):
                work[i] = coeffs[i]
            for r in range(m - 1, 0, -1):
                for i in range(r):
                    work[i] = s * work[i] + t * work[i + 1]
            out[k] = work[0]
        return out

    @njit(cache=True)
    def preimage_and_derivative(w, ts):
        n = ts.size
        val = np.empty(n, dtype=np.complex128)
        der = np.empty(n, dtype=np.complex128)
        d0 = w[1] - w[0]
        d1 = w[2] - w[1]
        d2 = w[3] - w[2]
        for k in range(n):
            t = ts[k]
            s = 1.0 - t
            val[k] = s * s * s * w[0] + 3.0 * s * s * t * w[1] + 3.0 * s * t * t * w[2] + t * t * t * w[3]
            der[k] = 3.0 * (s * s * d0 + 2.0 * s * t * d1 + t * t * d2)
        return val, der

    @njit(cache=True)
    def energy_panels(w, lo, hi, nodes, weights, power):
        out = np.empty(lo.size)
        d0 = w[1] - w[0]
        d1 = w[2] - w[1]
        d2 = w[3] - w[2]
        for k in range(lo.size):
            half = 0.5 * (hi[k] - lo[k])
            mid = 0.5 * (hi[k] + lo[k])
            acc = 0.0
            for j in range(nodes.size):
                t = mid + half * nodes[j]
                s = 1.0 - t
                v = s * s * s * w[0] + 3.0 * s * s * t * w[1] + 3.0 * s * t * t * w[2] + t * t * t * w[3]
                dv = 3.0 * (s * s * d0 + 2.0 * s * t * d1 + t * t * d2)
                sigma = v.real * v.real + v.imag * v.imag
                im = v.real * dv.imag - v.imag * dv.real
                den = sigma * sigma * sigma
                if power == 4:
                    den *= sigma
                acc += weights[j] * 4.0 * im * im / den
            out[k] = half * acc
        return out

    numba_impl.decasteljau = staticmethod(decasteljau)
    numba_impl.preimage_and_derivative = staticmethod(preimage_and_derivative)
    numba_impl.energy_panels = staticmethod(energy_panels)


HAVE_NUMBA = False
if os.environ.get("PHBIARC_NUMBA", "1") != "0":
    try:
        _build_numba()
        HAVE_NUMBA = True
    except ImportError:
        pass

BACKEND = "numba" if HAVE_NUMBA else "numpy"
_impl = numba_impl if HAVE_NUMBA else numpy_impl


def decasteljau(coeffs, ts):
    return _impl.decasteljau(np.ascontiguousarray(coeffs, dtype=np.complex128),
                             np.ascontiguousarray(ts, dtype=np.float64))


def preimage_and_derivative(w, ts):
    return _impl.preimage_and_derivative(np.ascontiguousarray(w, dtype=np.complex128),
                                         np.ascontiguousarray(ts, dtype=np.float64))


def energy_panels(w, lo, hi, nodes, weights, power):
    return _impl.energy_panels(np.ascontiguousarray(w, dtype=np.complex128),
                               np.ascontiguousarray(lo, dtype=np.float64),
                               np.ascontiguousarray(hi, dtype=np.float64),
                               nodes, weights, int(power))
