"""Multiprecision construction of the interpolants used in the error tables.

For short pieces the length condition is badly conditioned: rounding in the
data or in ``e`` at the level of 1e-16 moves the length-matching alpha by
1e-12 and more, which shows up directly in E_err.  This module repeats the
construction in mpmath, seeded by the double-precision solution, and hands
back ordinary float objects (control points and reparameterization rounded
once at the end).
"""

from typing import NamedTuple

import mpmath as mp
import numpy as np
from scipy.optimize import minimize_scalar

from .bench import N_SAMPLES, Reparam
from .biarc import PHBiarc
from .phcurve import PHSegment7, hodograph

DEFAULT_DPS = 40


class MPHermite:
    """Log-spiral G2 data on [s0, s1] in a frame with ``P0 = 0``."""

    def __init__(self, omega, s0, s1, dps=DEFAULT_DPS):
        with mp.workdps(dps):
            self.omega = w = mp.mpf(omega)
            self.z = mp.mpc(w, -1)
            self.s0, self.s1 = mp.mpf(s0), mp.mpf(s1)
            self.P1 = -mp.exp(self.z * self.s0) * mp.expm1(self.z * (self.s1 - self.s0))
            self.fp = [-self.z * mp.exp(self.z * s) for s in (self.s0, self.s1)]
            self.fpp = [-self.z**2 * mp.exp(self.z * s) for s in (self.s0, self.s1)]
            self.t0, self.t1 = (v / abs(v) for v in self.fp)
            self.k0, self.k1 = (-mp.exp(-w * s) / mp.sqrt(1 + w * w) for s in (self.s0, self.s1))
            if w == 0:
                self.L = self.s1 - self.s0
            else:
                self.L = mp.sqrt(1 + w * w) * mp.exp(w * self.s0) * mp.expm1(w * (self.s1 - self.s0)) / w


def _biarc_ends(D, a0, a1):
    c0, c1 = mp.sqrt(D.t0), mp.sqrt(D.t1)
    wA0 = a0 * c0
    wA1 = c0 * (a0 + 1j * D.k0 * a0**3 / 12)
    wB3 = a1 * c1
    wB2 = c1 * (a1 - 1j * D.k1 * a1**3 / 12)
    U = (5 * (wA0 + wB3) + 39 * (wA1 + wB2)) / 52
    V = (40 * (wA0**2 + wB3**2) + 49 * (wA0 * wA1 + wB2 * wB3) + 62 * (wA1**2 + wB2**2)
         + wA0 * wB2 + wA1 * wB3 + 28 * wA1 * wB2 - 560 * D.P1) / 52
    return (wA0, wA1, wB2, wB3), U, V


def _biarc_e(D, a0, a1):
    (wA0, wA1, wB2, wB3), U, V = _biarc_ends(D, a0, a1)
    cj = mp.conj
    v = (40 * abs(wA0)**2 + 40 * abs(wB3)**2 + 62 * abs(wA1)**2 + 62 * abs(wB2)**2
         + mp.re(49 * wA0 * cj(wA1) + 49 * wB2 * cj(wB3) + 28 * wA1 * cj(wB2) + wA0 * cj(wB2) + wA1 * cj(wB3))
         - 560 * D.L) / 52
    return abs(U * U - V) - abs(U)**2 + v


def _points(pre, start, end, scale):
    h = hodograph_mp(pre)
    pts = [None] * 8
    if end is None:
        pts[0] = start
        for i in range(1, 8):
            pts[i] = pts[i - 1] + scale * h[i - 1] / 7
    else:
        pts[7] = end
        for i in range(6, -1, -1):
            pts[i] = pts[i + 1] - scale * h[i] / 7
    return pts


def hodograph_mp(w):
    w0, w1, w2, w3 = w
    return [w0 * w0, w0 * w1, (2 * w0 * w2 + 3 * w1 * w1) / 5, (w0 * w3 + 9 * w1 * w2) / 10,
            (2 * w1 * w3 + 3 * w2 * w2) / 5, w2 * w3, w3 * w3]


def _segment(pre, pts, scale):
    pre_f = np.array([complex(x) for x in pre])
    return PHSegment7(pre_f, np.array([complex(p) for p in pts]), float(scale), hodograph(pre_f))


def _power(bez):
    """Bernstein coefficients to monomial coefficients (lowest degree first)."""
    n = len(bez) - 1
    return [mp.binomial(n, k) * sum((-1)**(k - i) * mp.binomial(k, i) * bez[i] for i in range(k + 1))
            for k in range(n + 1)]


def _horner(cs, t):
    acc = cs[-1]
    for c in reversed(cs[:-1]):
        acc = acc * t + c
    return acc


class Refined(NamedTuple):
    """Float interpolant and reparameterization plus their multiprecision originals."""

    curve: object
    phi: Reparam
    pieces: list  # monomial coefficients per equal-width parameter piece
    offset: list  # monomial coefficients of phi - s0
    data: MPHermite
    dps: int

    def distance(self, t):
        """``|r(t) - r(0) - (f(phi(t)) - f(s0))|`` evaluated in multiprecision."""
        D = self.data
        with mp.workdps(self.dps):
            t = mp.mpf(t)
            m = len(self.pieces)
            k = min(int(t * m), m - 1)
            r = _horner(self.pieces[k], t * m - k)
            f = -mp.exp(D.z * D.s0) * mp.expm1(D.z * _horner(self.offset, t))
            return abs(r - f)

    def e_err(self, n=N_SAMPLES):
        """Same search as the double-precision metric, with every distance taken in multiprecision."""
        ts = np.linspace(0.0, 1.0, n + 1)
        ds = [self.distance(t) for t in ts]
        k = max(range(n + 1), key=lambda i: ds[i])
        best = float(ds[k])
        if 0 < k < n:
            res = minimize_scalar(lambda t: -float(self.distance(t)), bracket=(ts[k - 1], ts[k], ts[k + 1]),
                                  method="golden", tol=1e-10)
            if 0.0 <= res.x <= 1.0:
                best = max(best, -float(res.fun))
        return best


def _reparam(D, ends):
    """Quintic reparameterization from multiprecision end derivatives."""
    phis = []
    worst = mp.mpf(0)
    for j, (rp, rpp) in enumerate(ends):
        fp, fpp = D.fp[j], D.fpp[j]
        p1 = abs(rp) / abs(fp)
        rest = (rpp - fpp * p1**2) * mp.conj(fp)
        phis.append((p1, mp.re(rest) / abs(fp)**2))
        worst = max(worst, abs(mp.im(rest)) / abs(fp) / abs(rpp))
    (p10, p20), (p11, p21) = phis
    span = D.s1 - D.s0
    off = [0, p10 / 5, 2 * p10 / 5 + p20 / 20, span - 2 * p11 / 5 + p21 / 20, span - p11 / 5, span]
    phi = Reparam(float(D.s0), float(D.s1), np.array([complex(float(x)) for x in off]), float(worst))
    return phi, _power([mp.mpf(x) for x in off])


def refine_biarc(D, seed, dps=DEFAULT_DPS):
    """Polish a float biarc (beta = 0) in multiprecision."""
    with mp.workdps(dps):
        ratio = mp.mpf(seed.alpha1) / mp.mpf(seed.alpha0)
        a0 = mp.findroot(lambda a: _biarc_e(D, a, ratio * a), mp.mpf(seed.alpha0), verify=False)
        if abs(_biarc_e(D, a0, ratio * a0)) > D.L * mp.mpf(10) ** (8 - dps):
            raise ArithmeticError("multiprecision refinement did not converge")
        a1 = ratio * a0
        (wA0, wA1, wB2, wB3), U, V = _biarc_ends(D, a0, a1)
        d = seed.params.zeta_d * mp.sqrt(U * U - V) - U
        wA2, wB1 = (wA1 + d) / 2, (wB2 + d) / 2
        joint = (wA2 + wB1) / 2
        preA, preB = [wA0, wA1, wA2, joint], [joint, wB1, wB2, wB3]
        ptsA = _points(preA, mp.mpc(0), None, mp.mpf(1) / 2)
        ptsB = _points(preB, None, D.P1, mp.mpf(1) / 2)
        ends = [(wA0**2, 12 * wA0 * (wA1 - wA0)), (wB3**2, 12 * wB3 * (wB3 - wB2))]
        biarc = PHBiarc(_segment(preA, ptsA, 0.5), _segment(preB, ptsB, 0.5),
                        seed.params, float(a0), float(a1), complex(d))
        phi, offset = _reparam(D, ends)
        return Refined(biarc, phi, [_power(ptsA), _power(ptsB)], offset, D, dps)


def _single_pre(D, a0, a1, b0, b1):
    c0, c1 = mp.sqrt(D.t0), mp.sqrt(D.t1)
    return [a0 * c0,
            c0 * (a0 + b0 / (6 * a0) + 1j * D.k0 * a0**3 / 6),
            c1 * (a1 - b1 / (6 * a1) - 1j * D.k1 * a1**3 / 6),
            a1 * c1]


_FORM = [[10, 5, 2, mp.mpf(1) / 2], [5, 6, mp.mpf(9) / 2, 2], [2, mp.mpf(9) / 2, 6, 5], [mp.mpf(1) / 2, 2, 5, 10]]


def _single_system(D, ratio, a, b0, b1):
    """Residuals and Jacobian of the single-curve system in multiprecision."""
    r = ratio
    c0, c1 = mp.sqrt(D.t0), mp.sqrt(D.t1)
    w = _single_pre(D, a, r * a, b0, b1)
    dw = [[c0, 0, 0],
          [c0 * (1 - b0 / (6 * a * a) + 1j * D.k0 * a * a / 2), c0 / (6 * a), 0],
          [c1 * (r + b1 / (6 * r * a * a) - 1j * D.k1 * r**3 * a * a / 2), 0, -c1 / (6 * r * a)],
          [r * c1, 0, 0]]
    w0, w1, w2, w3 = w
    end = (10 * (w0**2 + w3**2) + 6 * (w1**2 + w2**2) + 10 * (w0 * w1 + w2 * w3)
           + w0 * w3 + 4 * (w0 * w2 + w1 * w3) + 9 * w1 * w2 - 70 * D.P1)
    grad = [20 * w0 + 10 * w1 + w3 + 4 * w2, 12 * w1 + 10 * w0 + 4 * w3 + 9 * w2,
            12 * w2 + 10 * w3 + 4 * w0 + 9 * w1, 20 * w3 + 10 * w2 + w0 + 4 * w1]
    Mw = [sum(_FORM[j][k] * w[k] for k in range(4)) for j in range(4)]
    length = mp.re(sum(mp.conj(w[j]) * Mw[j] for j in range(4))) - 70 * D.L
    J = mp.matrix(3, 3)
    for k in range(3):
        de = sum(grad[j] * dw[j][k] for j in range(4))
        J[0, k], J[1, k] = mp.re(de), mp.im(de)
        J[2, k] = 2 * mp.re(sum(mp.conj(dw[j][k]) * Mw[j] for j in range(4)))
    return mp.matrix([mp.re(end), mp.im(end), length]), J


def refine_single(D, seed, dps=DEFAULT_DPS, max_steps=60):
    """Polish a float single-curve solution in multiprecision."""
    with mp.workdps(dps):
        ratio = mp.mpf(seed.alpha1) / mp.mpf(seed.alpha0)
        x = mp.matrix([seed.alpha0, seed.beta0, seed.beta1])
        tol = 70 * D.L * mp.mpf(10) ** (8 - dps)
        for _ in range(max_steps):
            F, J = _single_system(D, ratio, x[0], x[1], x[2])
            if mp.norm(F) <= tol:
                break
            x = x - mp.lu_solve(J, F)
        else:
            raise ArithmeticError("multiprecision refinement did not converge")
        a0, b0, b1 = x[0], x[1], x[2]
        pre = _single_pre(D, a0, ratio * a0, b0, b1)
        pts = _points(pre, mp.mpc(0), None, 1)
        w0, w1, w2, w3 = pre
        ends = [(w0**2, 6 * w0 * (w1 - w0)), (w3**2, 6 * w3 * (w3 - w2))]
        phi, offset = _reparam(D, ends)
        return Refined(_segment(pre, pts, 1), phi, [_power(pts)], offset, D, dps)
