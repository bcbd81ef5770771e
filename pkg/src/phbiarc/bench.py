"""Numerical experiments: log-spiral and circle approximation, energy optimization.

Errors are measured in a frame anchored at the start of each piece, so that
differences far below the magnitude of the absolute coordinates stay
resolvable in double precision.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import cpoly
from .biarc import HermiteData, InfeasibleProblem, interpolate
from .phcurve import PHSegment7
from .singleph import SinglePHProblem, solve
from .spline import G2Spline

N_SAMPLES = 4096


def _cexpm1(z):
    """``exp(z) - 1`` for complex ``z`` without cancellation near 0."""
    z = np.asarray(z, dtype=np.complex128)
    x, y = z.real, z.imag
    s = np.sin(0.5 * y)
    re = np.expm1(x) * np.cos(y) - 2.0 * s * s
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


@dataclass(frozen=True)
class LogSpiral:
    """``f(s) = -exp((omega - i) s)``; ``omega = 0`` is the unit circle, clockwise."""

    omega: float = 0.2

    @property
    def _z(self):
        return complex(self.omega, -1.0)

    def f(self, s):
        return -np.exp(self._z * np.asarray(s, dtype=float))

    def df(self, s):
        return -self._z * np.exp(self._z * np.asarray(s, dtype=float))

    def d2f(self, s):
        return -self._z**2 * np.exp(self._z * np.asarray(s, dtype=float))

    def delta(self, s0, s):
        """``f(s) - f(s0)`` evaluated without cancellation."""
        s = np.asarray(s, dtype=float)
        return -np.exp(self._z * s0) * _cexpm1(self._z * (s - s0))

    def kappa(self, s):
        return -np.exp(-self.omega * np.asarray(s, dtype=float)) / math.sqrt(1.0 + self.omega**2)

    def length(self, s0, s1):
        w = self.omega
        ds = s1 - s0
        scale = math.sqrt(1.0 + w * w) * math.exp(w * s0)
        if abs(w) < 1e-8:
            return scale * ds * (1.0 + w * ds / 2.0 + (w * ds)**2 / 6.0)
        return scale * math.expm1(w * ds) / w


def sample_hermite(curve, s0, s1, local=False):
    """G2 data and exact length of ``curve`` between ``s0`` and ``s1``.

    With ``local=True`` the data are translated so that ``P0 = 0``.
    """
    if not s0 < s1:
        raise ValueError("need s0 < s1")
    if local:
        P0, P1 = 0j, complex(curve.delta(s0, s1))
    else:
        P0, P1 = complex(curve.f(s0)), complex(curve.f(s1))
    return HermiteData(P0, P1, complex(curve.df(s0)), complex(curve.df(s1)),
                       float(curve.kappa(s0)), float(curve.kappa(s1)), curve.length(s0, s1))


def _positions(r, ts):
    if isinstance(r, PHSegment7):
        return cpoly.eval(r.points, ts)
    return r.points(ts)


class Reparam(NamedTuple):
    """Quintic ``phi(t) = a + offset(t)`` with ``offset`` in Bernstein form."""

    a: float
    b: float
    offset: np.ndarray
    normal_residual: float

    def __call__(self, t):
        return self.a + cpoly.eval(self.offset, t).real

    def offset_at(self, t):
        return cpoly.eval(self.offset, t).real

    def derivative(self, t):
        return cpoly.eval(cpoly.derivative(self.offset), t).real


class InvalidReparam(ArithmeticError):
    pass


def reparam_phi(r, curve, a, b, check_normal=1e-9):
    """Quintic reparameterization matching position, first and second derivative at both ends.

    The second derivative of phi comes from the tangential part of the chain
    rule; the normal part must vanish because curvatures agree, and its size
    is returned as ``normal_residual`` (relative to ``|r''|``).
    """
    d0, dd0 = r.derivatives(0.0)[:2]
    d1, dd1 = r.derivatives(1.0)[:2]
    ends = []
    worst = 0.0
    for s, rp, rpp in ((a, d0, dd0), (b, d1, dd1)):
        fp, fpp = complex(curve.df(s)), complex(curve.d2f(s))
        speed = abs(fp)
        p1 = abs(rp) / speed
        rest = (rpp - fpp * p1 * p1) * fp.conjugate()
        p2 = rest.real / speed**2
        worst = max(worst, abs(rest.imag) / speed**2 / max(abs(rpp), 1e-300) * speed)
        ends.append((p1, p2))
    (p10, p20), (p11, p21) = ends
    span = b - a
    offset = np.array([0.0, p10 / 5, 2 * p10 / 5 + p20 / 20,
                       span - 2 * p11 / 5 + p21 / 20, span - p11 / 5, span], dtype=np.complex128)
    phi = Reparam(float(a), float(b), offset, worst)
    if check_normal is not None and worst > check_normal:
        raise InvalidReparam(f"normal residual {worst:.3g} exceeds {check_normal:g}")
    ts = np.linspace(0.0, 1.0, N_SAMPLES + 1)
    if np.min(phi.derivative(ts)) <= 0.0:
        raise InvalidReparam("reparameterization is not increasing")
    return phi


def e_err(r, curve, phi, n=N_SAMPLES):
    """Maximum of ``|r(t) - f(phi(t))|`` over t in [0, 1].

    Dense uniform sampling followed by golden-section refinement around the
    largest sample.  Both curves are compared relative to their start points.
    """
    origin = _positions(r, np.array([0.0]))[0]

    def dist(ts):
        ts = np.atleast_1d(ts)
        return np.abs(_positions(r, ts) - origin - curve.delta(phi.a, phi.a + phi.offset_at(ts)))

    ts = np.linspace(0.0, 1.0, n + 1)
    ds = dist(ts)
    k = int(np.argmax(ds))
    best = float(ds[k])
    if 0 < k < n:
        res = minimize_scalar(lambda t: -dist(t)[0], bracket=(ts[k - 1], ts[k], ts[k + 1]),
                              method="golden", tol=1e-10)
        if 0.0 <= res.x <= 1.0:
            best = max(best, -float(res.fun))
    return best


class ErrorReport(NamedTuple):
    h: float
    e_err: float
    decay_exponent: float  # nan on the first row


def _with_exponents(hs, errs):
    rows = []
    for k, (h, e) in enumerate(zip(hs, errs)):
        if k == 0:
            rate = math.nan
        else:
            rate = math.log(errs[k - 1] / e) / math.log(hs[k - 1] / h)
        rows.append(ErrorReport(h, e, rate))
    return rows


def best_single(data, lam=1.0):
    sols = solve(SinglePHProblem(data, lam))
    if not sols:
        raise InfeasibleProblem("no single PH interpolant found")
    return min(sols, key=lambda s: s.energy)


def piece_error(curve, s0, s1, method="biarc", dps=None):
    """E_err of the interpolant of ``curve`` on [s0, s1].

    With ``dps`` set, the interpolant and its reparameterization are rebuilt in
    multiprecision from the double-precision solution, and distances are
    evaluated at that precision too.
    """
    data = sample_hermite(curve, s0, s1, local=True)
    if method == "biarc":
        seed = interpolate(data).selected
    elif method == "single":
        seed = best_single(data)
    else:
        raise ValueError(f"unknown method {method!r}")
    if dps is None:
        r = seed if method == "biarc" else seed.segment
        phi = reparam_phi(r, curve, s0, s1)
    else:
        from . import refine

        D = refine.MPHermite(curve.omega, s0, s1, dps)
        build = refine.refine_biarc if method == "biarc" else refine.refine_single
        return build(D, seed, dps).e_err()
    return e_err(r, curve, phi)


def decay_table(curve, h_list, method="biarc", dps=None):
    """E_err on [0, h] for each h, with the estimated decay exponents."""
    hs = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h_list must be strictly decreasing")
    return _with_exponents(hs, [piece_error(curve, 0.0, h, method, dps) for h in hs])


class CircleResult(NamedTuple):
    spline: G2Spline
    span_errors: list

    @property
    def e_err(self):
        return max(self.span_errors)


def circle_spline(N):
    """Full unit circle from ``N`` rotated copies of one biarc over an arc of 2*pi/N."""
    if N < 2:
        raise ValueError("need at least two spans")
    curve = LogSpiral(0.0)
    phi_arc = 2.0 * math.pi / N
    base = interpolate(sample_hermite(curve, 0.0, phi_arc, local=True)).selected
    spans, errs = [], []
    for k in range(N):
        rot = complex(math.cos(k * phi_arc), -math.sin(k * phi_arc))
        span = base.transformed(rot, complex(curve.f(k * phi_arc)))
        spans.append(span)
        s0 = k * phi_arc
        errs.append(e_err(span, curve, reparam_phi(span, curve, s0, s0 + phi_arc)))
    return CircleResult(G2Spline(spans), errs)


def circle_table(Ns, dps=None):
    """Per-span E_err (rotation-invariant, taken from the first span) for each N."""
    curve = LogSpiral(0.0)
    hs, errs = [], []
    for N in Ns:
        arc = 2.0 * math.pi / N
        hs.append(arc)
        errs.append(piece_error(curve, 0.0, arc, dps=dps))
    return [ErrorReport(N, e, r) for N, (_, e, r) in zip(Ns, _with_exponents(hs, errs))]


def spiral_spline(curve, s_nodes):
    """Spline through samples of ``curve`` at ``s_nodes`` and its per-span E_err."""
    from .spline import SplineNode, build

    s_nodes = [float(s) for s in s_nodes]
    nodes = [SplineNode.make(complex(curve.f(s)), complex(curve.df(s)), float(curve.kappa(s))) for s in s_nodes]
    lengths = [curve.length(a, b) for a, b in zip(s_nodes, s_nodes[1:])]
    sp = build(nodes, lengths)
    errs = [e_err(span, curve, reparam_phi(span, curve, a, b))
            for span, a, b in zip(sp.spans, s_nodes, s_nodes[1:])]
    return sp, errs


class LambdaOpt(NamedTuple):
    lam: float
    energy: float
    biarc: object
    grid: list  # (lambda, energy) pairs of the scan


def min_energy(data, lam, beta0=0.0, beta1=0.0):
    try:
        sel = interpolate(data, lam, beta0, beta1).selected
    except (InfeasibleProblem, ArithmeticError, ValueError):
        return math.inf, None
    return sel.energy, sel


def optimize_lambda(data, continuous=False, grid=None):
    """Minimum-energy lambda with zero betas, scanned on j/10 and optionally refined."""
    if grid is None:
        grid = [j / 10 for j in range(1, 101)]
    scan = [(lam, min_energy(data, lam)[0]) for lam in grid]
    k = min(range(len(scan)), key=lambda i: scan[i][1])
    lam = scan[k][0]
    if continuous:
        lo = grid[k - 1] if k > 0 else 0.5 * lam
        hi = grid[k + 1] if k + 1 < len(grid) else 2.0 * lam
        res = minimize_scalar(lambda x: min_energy(data, x)[0], bracket=(lo, lam, hi),
                              method="golden", options={"xtol": 1e-8})
        if res.fun <= scan[k][1]:
            lam = float(res.x)
    energy, sel = min_energy(data, lam)
    return LambdaOpt(lam, energy, sel, scan)


class BetaOpt(NamedTuple):
    beta0: float
    beta1: float
    energy: float
    biarc: object


def optimize_beta(data, lam=1.0, max_evals=500):
    """Nelder-Mead over (beta0, beta1) from the origin; infeasible points score +inf."""
    scale = abs(data.chord)
    res = minimize(lambda b: min_energy(data, lam, b[0], b[1])[0], np.zeros(2), method="Nelder-Mead",
                   options={"maxfev": max_evals, "initial_simplex": [[0.0, 0.0], [scale, 0.0], [0.0, scale]],
                            "xatol": 1e-6, "fatol": 1e-10})
    b0, b1 = (float(v) for v in res.x)
    energy, sel = min_energy(data, lam, b0, b1)
    start, start_sel = min_energy(data, lam)
    if not energy <= start:
        return BetaOpt(0.0, 0.0, start, start_sel)
    return BetaOpt(b0, b1, energy, sel)


def optimize_joint(data, max_evals=800):
    """Nelder-Mead over (lambda, beta0, beta1) starting from lambda=1, zero betas."""
    scale = abs(data.chord)

    def objective(x):
        if not x[0] > 0:
            return math.inf
        return min_energy(data, x[0], x[1], x[2])[0]

    res = minimize(objective, np.array([1.0, 0.0, 0.0]), method="Nelder-Mead",
                   options={"maxfev": max_evals,
                            "initial_simplex": [[1.0, 0, 0], [0.8, 0, 0], [1.0, scale, 0], [1.0, 0, scale]]})
    lam, b0, b1 = (float(v) for v in res.x)
    energy, sel = min_energy(data, lam, b0, b1)
    return lam, BetaOpt(b0, b1, energy, sel)
