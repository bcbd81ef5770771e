"""G2 Hermite interpolation with prescribed arc length by degree-7 PH biarcs.

The two halves of the biarc are joined at t = 1/2 with a C2 preimage, which
leaves a closed-form curve in four real shape parameters (alpha0, alpha1,
beta0, beta1).  Prescribing the length adds one scalar equation ``e = 0``;
with beta0 = beta1 = 0 and alpha1 = +-lambda * alpha0 it always has a
positive root.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import cpoly
from .phcurve import PHSegment7

# 52 e = 560 (length - L), i.e. e = (140/13) (length - L)
LENGTH_FACTOR = 140.0 / 13.0

ROOT_GRID = 1200


class InfeasibleProblem(ValueError):
    """The Hermite data admit no interpolant of the requested kind."""


@dataclass(frozen=True)
class HermiteData:
    """End points, unit tangents, signed curvatures and the target length."""

    P0: complex
    P1: complex
    t0: complex
    t1: complex
    k0: float
    k1: float
    L: float

    def __post_init__(self):
        for name in ("P0", "P1", "t0", "t1"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("t0", "t1"):
            v = getattr(self, name)
            if abs(v) == 0.0:
                raise ValueError(f"{name} must be a nonzero direction")
            object.__setattr__(self, name, v / abs(v))
        for name in ("k0", "k1", "L"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.P0 == self.P1:
            raise InfeasibleProblem("coincident end points")
        if not self.L > abs(self.P1 - self.P0):
            raise InfeasibleProblem("length below chord")

    @classmethod
    def from_angles(cls, P0, P1, theta0, theta1, k0, k1, L):
        return cls(P0, P1, complex(math.cos(theta0), math.sin(theta0)),
                   complex(math.cos(theta1), math.sin(theta1)), k0, k1, L)

    @property
    def chord(self):
        return self.P1 - self.P0

    def translated(self, shift):
        return HermiteData(self.P0 + shift, self.P1 + shift, self.t0, self.t1, self.k0, self.k1, self.L)


class FreeParams(NamedTuple):
    beta0: float = 0.0
    beta1: float = 0.0
    lam: float = 1.0
    branch: int = +1  # alpha1 = branch * lam * alpha0 for the root search
    zeta_d: int = +1


class Boundary(NamedTuple):
    wA0: complex
    wA1: complex
    wB2: complex
    wB3: complex


class JointUV(NamedTuple):
    U: complex
    V: complex


def _end_coeffs(chi_t, alpha, beta, kappa, sign):
    # w_end = alpha chi(t); w_inner = (1/w_end)((alpha^2 +- beta/12) t +- kappa alpha^4/12 n),
    # rewritten with t / chi(t) = chi(t) and n = i t so alpha -> 0 has a limit when beta = 0
    if beta != 0.0:
        inner = chi_t * (alpha + sign * beta / (12.0 * alpha) + sign * 1j * kappa * alpha**3 / 12.0)
    else:
        inner = chi_t * (alpha + sign * 1j * kappa * alpha**3 / 12.0)
    return alpha * chi_t, inner


def _boundary(data, alpha0, alpha1, beta0, beta1):
    wA0, wA1 = _end_coeffs(cpoly.chi(data.t0), alpha0, beta0, data.k0, +1.0)
    wB3, wB2 = _end_coeffs(cpoly.chi(data.t1), alpha1, beta1, data.k1, -1.0)
    return Boundary(wA0, wA1, wB2, wB3)


def boundary_preimages(data, alpha0, alpha1, beta0=0.0, beta1=0.0):
    """Outer preimage coefficients fixed by the G2 end conditions."""
    if alpha0 == 0.0 or alpha1 == 0.0:
        raise ValueError("alpha0 and alpha1 must be nonzero")
    return _boundary(data, float(alpha0), float(alpha1), float(beta0), float(beta1))


def joint_uv(data, w):
    wA0, wA1, wB2, wB3 = w
    U = (5 * (wA0 + wB3) + 39 * (wA1 + wB2)) / 52
    V = (40 * (wA0 * wA0 + wB3 * wB3) + 49 * (wA0 * wA1 + wB2 * wB3) + 62 * (wA1 * wA1 + wB2 * wB2)
         + wA0 * wB2 + wA1 * wB3 + 28 * wA1 * wB2 - 560 * data.chord) / 52
    return JointUV(U, V)


def solve_joint(U, V, zeta_d=1):
    """Root ``d`` of ``d^2 + 2 U d + V = 0`` picked by the sign ``zeta_d``."""
    return zeta_d * cpoly.chi(U * U - V) - U


def _v(data, w):
    wA0, wA1, wB2, wB3 = w
    return (40 * abs(wA0)**2 + 40 * abs(wB3)**2 + 62 * abs(wA1)**2 + 62 * abs(wB2)**2
            + (49 * wA0 * wA1.conjugate() + 49 * wB2 * wB3.conjugate() + 28 * wA1 * wB2.conjugate()
               + wA0 * wB2.conjugate() + wA1 * wB3.conjugate()).real
            - 560 * data.L) / 52


def length_residual(data, alpha0, alpha1, beta0=0.0, beta1=0.0):
    """The length equation ``e = |U^2 - V| - |U|^2 + v``.

    ``e`` equals ``(140/13) * (length - L)`` for the biarc built from the same
    parameters.  At alpha0 = alpha1 = 0 with zero betas the limit value is
    returned.
    """
    a0, a1, b0, b1 = float(alpha0), float(alpha1), float(beta0), float(beta1)
    if (a0 == 0.0 and b0 != 0.0) or (a1 == 0.0 and b1 != 0.0):
        raise ValueError("length residual is singular at alpha = 0 with nonzero beta")
    w = _boundary(data, a0, a1, b0, b1)
    U, V = joint_uv(data, w)
    return abs(U * U - V) - abs(U)**2 + _v(data, w)


def _residual_grid(data, alpha0, alpha1, beta0, beta1):
    """Vectorized length residual over arrays of alpha0 and alpha1."""
    a0 = np.asarray(alpha0, dtype=float)
    a1 = np.asarray(alpha1, dtype=float)
    c0, c1 = cpoly.chi(data.t0), cpoly.chi(data.t1)
    with np.errstate(divide="ignore", invalid="ignore"):
        wA0 = a0 * c0
        wA1 = c0 * (a0 + (beta0 / (12.0 * a0) if beta0 else 0.0) + 1j * data.k0 * a0**3 / 12.0)
        wB3 = a1 * c1
        wB2 = c1 * (a1 - (beta1 / (12.0 * a1) if beta1 else 0.0) - 1j * data.k1 * a1**3 / 12.0)
    w = (wA0, wA1, wB2, wB3)
    U, V = joint_uv(data, w)
    v = (40 * np.abs(wA0)**2 + 40 * np.abs(wB3)**2 + 62 * np.abs(wA1)**2 + 62 * np.abs(wB2)**2
         + (49 * wA0 * np.conj(wA1) + 49 * wB2 * np.conj(wB3) + 28 * wA1 * np.conj(wB2)
            + wA0 * np.conj(wB2) + wA1 * np.conj(wB3)).real
         - 560 * data.L) / 52
    return np.abs(U * U - V) - np.abs(U)**2 + v


def root_tolerance(data):
    return 1e-10 * (1.0 + data.L)


def solve_alpha(data, lam=1.0, beta0=0.0, beta1=0.0, branch=+1):
    """Positive roots alpha0 of ``e(alpha0, branch*lam*alpha0, beta0, beta1) = 0``.

    The residual is even in alpha0, so the search runs over ``x = alpha0^2``
    on a geometric grid; every sign change is bracketed, solved and
    Newton-polished.  With zero betas at least one root always exists.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    b0, b1 = float(beta0), float(beta1)
    ratio = branch * lam
    chord = abs(data.chord)

    def e_of_x(x):
        a = math.sqrt(x)
        return length_residual(data, a, ratio * a, b0, b1)

    x_min = 1e-6 * chord
    x_hi = max(data.L, chord)
    for _ in range(200):
        if e_of_x(x_hi) > 0.0:
            break
        x_hi *= 2.0
    else:
        if b0 == 0.0 and b1 == 0.0:
            raise ArithmeticError("length residual never became positive")
    # roots may hide past the first positive value
    x_max = 16.0 * x_hi

    xs = np.geomspace(x_min, x_max, ROOT_GRID)
    a = np.sqrt(xs)
    es = _residual_grid(data, a, ratio * a, b0, b1)
    roots = []
    tol = root_tolerance(data)
    for k in np.flatnonzero(np.sign(es[:-1]) * np.sign(es[1:]) <= 0):
        if not (np.isfinite(es[k]) and np.isfinite(es[k + 1])):
            continue
        lo, hi = xs[k], xs[k + 1]
        if es[k] == 0.0:
            x = lo
        elif es[k + 1] == 0.0:
            x = hi
        else:
            x = brentq(e_of_x, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        x = _newton_polish(e_of_x, x)
        if abs(e_of_x(x)) <= tol:
            roots.append(math.sqrt(x))
    roots.sort()
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-8 * max(1.0, r):
            merged.append(r)
    return merged


def _newton_polish(f, x, steps=3):
    fx = f(x)
    for _ in range(steps):
        h = 1e-6 * x
        slope = (f(x + h) - f(x - h)) / (2 * h)
        if slope == 0.0 or not math.isfinite(slope):
            break
        y = x - fx / slope
        if not y > 0:
            break
        fy = f(y)
        if abs(fy) >= abs(fx):
            break
        x, fx = y, fy
    return x


@dataclass(frozen=True, eq=False)
class PHBiarc:
    """Two degree-7 PH halves over [0, 1/2] and [1/2, 1] joined C3 at 1/2."""

    half_a: PHSegment7
    half_b: PHSegment7
    params: FreeParams
    alpha0: float
    alpha1: float
    d: complex
    _energy: list = field(default_factory=list, repr=False)

    @property
    def energy(self):
        """Bending energy over the curve parameter (cached)."""
        if not self._energy:
            self._energy.append(self.bending_energy())
        return self._energy[0]

    def bending_energy(self, measure="parameter"):
        return self.half_a.bending_energy(measure) + self.half_b.bending_energy(measure)

    @property
    def segments(self):
        return (self.half_a, self.half_b)

    def arc_length(self):
        return self.half_a.arc_length() + self.half_b.arc_length()

    def _locate(self, t):
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("biarc parameter outside [0, 1]")
        if t < 0.5:
            return self.half_a, 2.0 * t
        return self.half_b, 2.0 * t - 1.0

    def point(self, t):
        seg, u = self._locate(t)
        return seg.point(u)

    def evaluate(self, t):
        seg, u = self._locate(t)
        return seg.evaluate(u)

    def points(self, ts):
        """Vectorized positions at an array of parameters in [0, 1]."""
        ts = np.asarray(ts, dtype=float)
        out = np.empty(ts.shape, dtype=np.complex128)
        first = ts < 0.5
        out[first] = cpoly.eval(self.half_a.points, 2.0 * ts[first])
        out[~first] = cpoly.eval(self.half_b.points, np.clip(2.0 * ts[~first] - 1.0, 0.0, 1.0))
        return out

    def derivatives(self, t):
        seg, u = self._locate(t)
        return seg.derivatives(u)

    def transformed(self, rotation=1.0 + 0j, shift=0j):
        return PHBiarc(self.half_a.transformed(rotation, shift), self.half_b.transformed(rotation, shift),
                       self.params, self.alpha0, self.alpha1, self.d * cpoly.chi(rotation),
                       list(self._energy))


def build_biarc(data, alpha0, alpha1, beta0=0.0, beta1=0.0, zeta_d=1, lam=None):
    """The closed-form G2 biarc for the given shape parameters (length not enforced)."""
    w = boundary_preimages(data, alpha0, alpha1, beta0, beta1)
    U, V = joint_uv(data, w)
    d = solve_joint(U, V, zeta_d)
    wA2 = 0.5 * (w.wA1 + d)
    wB1 = 0.5 * (w.wB2 + d)
    joint = 0.5 * (wA2 + wB1)
    half_a = PHSegment7.from_start([w.wA0, w.wA1, wA2, joint], data.P0, 0.5)
    half_b = PHSegment7.from_end([joint, wB1, w.wB2, w.wB3], data.P1, 0.5)
    if lam is None:
        lam = abs(alpha1 / alpha0)
    branch = 1 if alpha0 * alpha1 > 0 else -1
    params = FreeParams(float(beta0), float(beta1), float(lam), branch, int(zeta_d))
    return PHBiarc(half_a, half_b, params, float(alpha0), float(alpha1), d)


@dataclass
class Interpolation:
    """All biarc candidates for one problem and the minimum-energy choice."""

    data: HermiteData
    candidates: list
    selected_index: int

    @property
    def selected(self):
        return self.candidates[self.selected_index]

    @property
    def energies(self):
        return [c.energy for c in self.candidates]


def candidate_params(data, lam=1.0, beta0=0.0, beta1=0.0):
    """(alpha0, alpha1) pairs in table order: same-sign branch first, then opposite-sign."""
    out = []
    for a in solve_alpha(data, lam, beta0, beta1, +1):
        out += [(a, lam * a), (-a, -lam * a)]
    for a in solve_alpha(data, lam, beta0, beta1, -1):
        out += [(-a, lam * a), (a, -lam * a)]
    return out


def interpolate(data, lam=1.0, beta0=0.0, beta1=0.0):
    """Every length-matching biarc for the data, with the least bending energy selected.

    Ties in energy (relative 1e-9) go to the smaller ``|alpha0|``, then to
    the same-sign branch.
    """
    pairs = candidate_params(data, lam, beta0, beta1)
    if not pairs:
        raise InfeasibleProblem("no solution of the length equation")
    cands = [build_biarc(data, a0, a1, beta0, beta1, lam=lam) for a0, a1 in pairs]
    energies = [c.energy for c in cands]
    best = min(energies)
    tied = [i for i, e in enumerate(energies) if e - best <= 1e-9 * abs(best)]
    pick = min(tied, key=lambda i: (round(abs(cands[i].alpha0), 12), cands[i].params.branch != 1, i))
    return Interpolation(data, cands, pick)


class ExistenceCoefficients(NamedTuple):
    c0: float
    c1: float
    c2: float
    Theta: float


def existence_coefficients(data, lam=1.0, branch=+1):
    """Constant and leading coefficients of the polynomial part of ``e`` in alpha0.

    ``c0`` and ``c1`` are the constant and alpha0^6 coefficients of
    ``-|U|^2 + v``; ``c2`` is the constant term of ``|U^2 - V|^2``.  The
    closed form of ``c1`` uses ``tan(theta/2)`` and is undefined for a
    tangent pointing along the negative real axis.
    """
    th0 = math.atan2(data.t0.imag, data.t0.real)
    th1 = math.atan2(data.t1.imag, data.t1.real)
    if abs(abs(th0) - math.pi) < 1e-12 or abs(abs(th1) - math.pi) < 1e-12:
        raise ValueError("tangent angle of pi: closed-form coefficient is singular")
    Theta = (math.sqrt(math.cos(th0) + 1) * math.sqrt(math.cos(th1) + 1)
             * (math.tan(th0 / 2) * math.tan(th1 / 2) + 1))
    c0 = -LENGTH_FACTOR * data.L
    c1 = (131 * data.k0**2 + branch * 61 * Theta * lam**3 * data.k0 * data.k1
          + 131 * lam**6 * data.k1**2) / 29952
    c2 = LENGTH_FACTOR**2 * abs(data.chord)**2
    return ExistenceCoefficients(c0, c1, c2, Theta)


# name used by the documented interface
theorem2_coefficients = existence_coefficients
