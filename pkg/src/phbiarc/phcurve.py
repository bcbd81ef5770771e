"""Planar degree-7 PH segments generated by a cubic complex preimage."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels, cpoly


class CuspError(ValueError):
    """The parametric speed vanishes where a frame or curvature is needed."""


# 15-point Gauss-Legendre rule on [-1, 1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)

ENERGY_RTOL = 1e-10
MAX_PANELS = 2**10


def hodograph(pre):
    """Hodograph coefficients h0..h6 of ``r' = w^2`` for a cubic preimage."""
    w0, w1, w2, w3 = (complex(x) for x in pre)
    return np.array([
        w0 * w0,
        w0 * w1,
        (2 * w0 * w2 + 3 * w1 * w1) / 5,
        (w0 * w3 + 9 * w1 * w2) / 10,
        (2 * w1 * w3 + 3 * w2 * w2) / 5,
        w2 * w3,
        w3 * w3,
    ], dtype=np.complex128)


def speed_coefficients(pre):
    """Bernstein coefficients of the parametric speed |w(t)|^2 (degree 6)."""
    return cpoly.hermitian_product(pre, pre)


class FramePoint(NamedTuple):
    point: complex
    unit_tangent: complex
    normal: complex
    signed_curvature: float
    speed: float


@dataclass(frozen=True, eq=False)
class PHSegment7:
    """A degree-7 PH segment.

    ``scale`` is the width of the parameter interval the segment occupies in
    its parent curve (1 for a standalone curve, 1/2 for each biarc half).
    Derivatives reported by the segment are taken with respect to that parent
    parameter, so the hodograph there is ``w(u)**2`` with ``u`` local.
    """

    preimage: np.ndarray
    points: np.ndarray
    scale: float = 1.0
    hodo: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_start(cls, preimage, start, scale=1.0):
        pre, h = cls._checked(preimage, scale)
        pts = np.empty(8, dtype=np.complex128)
        pts[0] = start
        step = scale / 7.0
        for i in range(1, 8):
            pts[i] = pts[i - 1] + step * h[i - 1]
        return cls(pre, pts, float(scale), h)

    @classmethod
    def from_end(cls, preimage, end, scale=1.0):
        """Integrate backwards so the last control point is exactly ``end``."""
        pre, h = cls._checked(preimage, scale)
        pts = np.empty(8, dtype=np.complex128)
        pts[7] = end
        step = scale / 7.0
        for i in range(6, -1, -1):
            pts[i] = pts[i + 1] - step * h[i]
        return cls(pre, pts, float(scale), h)

    @staticmethod
    def _checked(preimage, scale):
        pre = np.array(preimage, dtype=np.complex128)
        if pre.shape != (4,):
            raise ValueError("a cubic preimage needs exactly four coefficients")
        if not np.all(np.isfinite(pre)):
            raise ValueError("preimage coefficients must be finite")
        if not np.any(pre):
            raise ValueError("degenerate preimage: all coefficients are zero")
        if not scale > 0:
            raise ValueError("scale must be positive")
        return pre, hodograph(pre)

    @property
    def start(self):
        return complex(self.points[0])

    @property
    def end(self):
        return complex(self.points[7])

    def control_points(self):
        return self.points.copy()

    def sigma(self):
        return speed_coefficients(self.preimage)

    def arc_length(self):
        return self.scale * float(np.sum(self.sigma())) / 7.0

    def point(self, u):
        return cpoly.eval(self.points, u)

    def derivatives(self, u):
        """First, second and third derivatives with respect to the parent parameter."""
        w = self.preimage
        val, der = _kernels.preimage_and_derivative(w, np.atleast_1d(np.asarray(u, float)))
        dd = 6.0 * ((1.0 - np.atleast_1d(u)) * (w[2] - 2 * w[1] + w[0])
                    + np.atleast_1d(u) * (w[3] - 2 * w[2] + w[1]))
        k = 1.0 / self.scale
        d1 = val * val
        d2 = 2.0 * val * der * k
        d3 = 2.0 * (der * der + val * dd) * k * k
        if np.ndim(u) == 0:
            return complex(d1[0]), complex(d2[0]), complex(d3[0])
        return d1, d2, d3

    def _cusp_floor(self):
        return 1e-12 * float(np.max(self.sigma()))

    def evaluate(self, u):
        u = float(u)
        if not 0.0 <= u <= 1.0:
            raise ValueError("segment parameter outside [0, 1]")
        val, der = _kernels.preimage_and_derivative(self.preimage, np.array([u]))
        w, dw = complex(val[0]), complex(der[0])
        sigma = abs(w) ** 2
        if sigma <= self._cusp_floor():
            raise CuspError(f"vanishing parametric speed at u={u!r}")
        tangent = w * w / sigma
        # normalize away the rounding in w*w/sigma
        tangent /= abs(tangent)
        kappa = 2.0 * (w.conjugate() * dw).imag / (self.scale * sigma * sigma)
        return FramePoint(self.point(u), tangent, 1j * tangent, kappa, sigma)

    def curvature(self, u):
        """Signed curvature at an array of local parameters (no cusp check)."""
        val, der = _kernels.preimage_and_derivative(self.preimage, np.atleast_1d(np.asarray(u, float)))
        sigma = val.real**2 + val.imag**2
        return 2.0 * (np.conj(val) * der).imag / (self.scale * sigma * sigma)

    def bending_energy(self, measure="parameter"):
        return bending_energy(self, measure)

    def transformed(self, rotation=1.0 + 0j, shift=0j):
        """Copy moved by ``z -> rotation * z + shift`` with ``|rotation| = 1``."""
        root = cpoly.chi(rotation)
        pre = self.preimage * root
        pts = rotation * self.points + shift
        return PHSegment7(pre, pts, self.scale, hodograph(pre))


def control_points(seg):
    return seg.control_points()


def arc_length(seg):
    return seg.arc_length()


def evaluate(seg, t):
    return seg.evaluate(t)


def bending_energy(seg, measure="parameter", rtol=ENERGY_RTOL, max_panels=MAX_PANELS):
    """Integral of squared curvature over the segment.

    ``measure="parameter"`` integrates ``kappa(t)^2 dt`` over the parent
    parameter (the value tabulated for the biarc examples); ``"arc"``
    integrates ``kappa^2 ds``.

    Composite 15-point Gauss-Legendre.  A panel is bisected while its two
    halves disagree with the whole by more than its width-share of
    ``rtol * E``; refinement stops at ``max_panels`` panels.
    """
    w = seg.preimage
    val, _ = _kernels.preimage_and_derivative(w, np.linspace(0.0, 1.0, 257))
    if np.min(val.real**2 + val.imag**2) <= seg._cusp_floor():
        raise CuspError("vanishing parametric speed inside the segment")

    try:
        power = {"parameter": 4, "arc": 3}[measure]
    except KeyError:
        raise ValueError(f"unknown energy measure {measure!r}") from None

    def panel(lo, hi):
        return _kernels.energy_panels(w, lo, hi, _GL_NODES, _GL_WEIGHTS, power)

    edges = np.linspace(0.0, 1.0, 9)
    lo, hi = edges[:-1], edges[1:]
    coarse = panel(lo, hi)
    accepted, n_accepted = 0.0, 0
    while True:
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        fine = left + right
        total = accepted + float(np.sum(fine))
        ok = np.abs(fine - coarse) <= rtol * abs(total) * (hi - lo)
        keep = ~ok
        n_keep = int(np.count_nonzero(keep))
        if n_keep == 0 or n_accepted + lo.size + 2 * n_keep > max_panels:
            break
        accepted += float(np.sum(fine[ok]))
        n_accepted += 2 * (lo.size - n_keep)
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
    return total / seg.scale
