"""G2 Hermite interpolation with prescribed length by a single PH curve of degree 7.

Three real equations (end point, length) in alpha0, beta0, beta1 once the
tangent-length ratio alpha1 = +-lambda * alpha0 is fixed.  No closed form
exists, so the system is solved by damped Newton from a fixed start grid.
Roots outside the basins of that grid can be missed.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import cpoly
from .biarc import HermiteData
from .phcurve import CuspError, PHSegment7

START_ALPHAS = np.arange(1, 17) * 0.25
# beta starts in units of |P1 - P0|; the +-48 pair is needed to reach a root with |beta| ~ 50
START_BETAS = (-48.0, -16.0, 0.0, 16.0, 48.0)
MAX_ITER = 200
DEDUP_TOL = 1e-6
STALL_DECREASE = 1e-6
STALL_ITERS = 5


@dataclass(frozen=True)
class SinglePHProblem:
    data: HermiteData
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass(frozen=True, eq=False)
class SinglePHSolution:
    segment: PHSegment7
    alpha0: float
    alpha1: float
    beta0: float
    beta1: float
    residual: float

    @property
    def energy(self):
        return self.segment.bending_energy()


def preimage(data, alpha0, alpha1, beta0, beta1):
    """Cubic preimage meeting the G2 end conditions over a unit interval."""
    c0, c1 = cpoly.chi(data.t0), cpoly.chi(data.t1)
    w0 = alpha0 * c0
    w3 = alpha1 * c1
    w1 = c0 * (alpha0 + beta0 / (6.0 * alpha0) + 1j * data.k0 * alpha0**3 / 6.0)
    w2 = c1 * (alpha1 - beta1 / (6.0 * alpha1) - 1j * data.k1 * alpha1**3 / 6.0)
    return np.array([w0, w1, w2, w3])


def residual_system(prob, alpha0, beta0, beta1, branch=+1):
    """End-point residual (two reals) and length residual, each scaled by 70."""
    if alpha0 == 0.0:
        raise ValueError("alpha0 must be nonzero")
    data = prob.data
    w0, w1, w2, w3 = preimage(data, alpha0, branch * prob.lam * alpha0, beta0, beta1)
    end = (10 * (w0 * w0 + w3 * w3) + 6 * (w1 * w1 + w2 * w2) + 10 * (w0 * w1 + w2 * w3)
           + w0 * w3 + 4 * (w0 * w2 + w1 * w3) + 9 * w1 * w2 - 70 * data.chord)
    length = (10 * (abs(w0)**2 + abs(w3)**2) + 6 * (abs(w1)**2 + abs(w2)**2)
              + (10 * (w0 * w1.conjugate() + w2 * w3.conjugate()) + w0 * w3.conjugate()
                 + 4 * (w0 * w2.conjugate() + w1 * w3.conjugate()) + 9 * w1 * w2.conjugate()).real
              - 70 * data.L)
    return np.array([end.real, end.imag, length])


# symmetric weights of Re(w_j conj(w_k)) in the scaled length equation
_LENGTH_FORM = np.array([
    [10.0, 5.0, 2.0, 0.5],
    [5.0, 6.0, 4.5, 2.0],
    [2.0, 4.5, 6.0, 5.0],
    [0.5, 2.0, 5.0, 10.0],
])


def _batch_system(data, ratio, x):
    """Residuals and analytic Jacobians for a batch of points ``x`` of shape (n, 3)."""
    a, b0, b1 = x[:, 0], x[:, 1], x[:, 2]
    c0, c1 = cpoly.chi(data.t0), cpoly.chi(data.t1)
    k0, k1, r = data.k0, data.k1, ratio
    w = np.empty((4, a.size), dtype=np.complex128)
    w[0] = a * c0
    w[1] = c0 * (a + b0 / (6 * a) + 1j * k0 * a**3 / 6)
    w[2] = c1 * (r * a - b1 / (6 * r * a) - 1j * k1 * (r * a)**3 / 6)
    w[3] = r * a * c1
    dw = np.zeros((4, 3, a.size), dtype=np.complex128)
    dw[0, 0] = c0
    dw[1, 0] = c0 * (1 - b0 / (6 * a * a) + 0.5j * k0 * a * a)
    dw[1, 1] = c0 / (6 * a)
    dw[2, 0] = c1 * (r + b1 / (6 * r * a * a) - 0.5j * k1 * r**3 * a * a)
    dw[2, 2] = -c1 / (6 * r * a)
    dw[3, 0] = r * c1
    w0, w1, w2, w3 = w
    end = (10 * (w0 * w0 + w3 * w3) + 6 * (w1 * w1 + w2 * w2) + 10 * (w0 * w1 + w2 * w3)
           + w0 * w3 + 4 * (w0 * w2 + w1 * w3) + 9 * w1 * w2 - 70 * data.chord)
    grad = np.array([20 * w0 + 10 * w1 + w3 + 4 * w2,
                     12 * w1 + 10 * w0 + 4 * w3 + 9 * w2,
                     12 * w2 + 10 * w3 + 4 * w0 + 9 * w1,
                     20 * w3 + 10 * w2 + w0 + 4 * w1])
    Mw = _LENGTH_FORM @ w
    length = np.einsum("jn,jn->n", np.conj(w), Mw).real - 70 * data.L
    d_end = np.einsum("jn,jkn->kn", grad, dw)
    d_len = 2 * np.einsum("jkn,jn->kn", np.conj(dw), Mw).real
    F = np.stack([end.real, end.imag, length], axis=1)
    J = np.stack([d_end.real, d_end.imag, d_len]).transpose(2, 0, 1)
    return F, J


def _batch_newton(data, ratio, x, tol):
    """Armijo-damped Newton on every row of ``x`` at once."""
    x = x.copy()
    F, J = _batch_system(data, ratio, x)
    nf = np.einsum("ni,ni->n", F, F)
    active = np.isfinite(nf)
    slow = np.zeros(nf.size, dtype=int)
    for _ in range(MAX_ITER):
        active &= nf > tol * tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        try:
            step = np.linalg.solve(J[idx], -F[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(j, -f, rcond=None)[0] for j, f in zip(J[idx], F[idx])])
        t = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        new_x = x[idx].copy()
        new_F, new_J, new_nf = F[idx].copy(), J[idx].copy(), nf[idx].copy()
        for _ in range(40):
            if not pending.any():
                break
            p = np.flatnonzero(pending)
            y = x[idx[p]] + t[p, None] * step[p]
            with np.errstate(all="ignore"):
                fy, jy = _batch_system(data, ratio, y)
            ny = np.einsum("ni,ni->n", fy, fy)
            good = np.isfinite(ny) & (y[:, 0] > 0) & (ny <= (1 - 1e-4 * t[p]) * nf[idx[p]])
            g = p[good]
            new_x[g], new_F[g], new_J[g], new_nf[g] = y[good], fy[good], jy[good], ny[good]
            pending[g] = False
            t[pending] *= 0.5
        # rows that stop reducing |F| for several iterations are creeping toward a non-root minimum
        slow[idx] = np.where(new_nf > (1.0 - STALL_DECREASE) * nf[idx], slow[idx] + 1, 0)
        stalled = pending | (slow[idx] >= STALL_ITERS)
        x[idx], F[idx], J[idx], nf[idx] = new_x, new_F, new_J, new_nf
        active[idx[stalled]] = False
    return x, np.sqrt(nf)


def solve(prob):
    """All solutions reached from the start grid, sorted and deduplicated.

    ``alpha0`` is reported positive; flipping the signs of both alphas gives
    the same curve.  Both ``alpha1 = lambda*alpha0`` and
    ``alpha1 = -lambda*alpha0`` are searched.  An empty list means no
    solution was found.
    """
    data = prob.data
    chord = abs(data.chord)
    stretch = math.sqrt(data.L / chord)
    tol = 1e-9 * (1.0 + data.L)
    grid = np.array([(a, b0, b1)
                     for a in START_ALPHAS * math.sqrt(chord) * stretch
                     for b0 in START_BETAS for b1 in START_BETAS])
    grid[:, 1:] *= chord
    found = []
    for branch in (+1, -1):
        ratio = branch * prob.lam
        with np.errstate(all="ignore"):
            xs, res = _batch_newton(data, ratio, grid, 1e-15 * 70 * data.L)
        for x, r in zip(xs, res):
            if not r <= tol:
                continue
            if any(br == branch and np.linalg.norm(x - y) <= DEDUP_TOL * max(1.0, np.linalg.norm(y))
                   for br, y, _ in found):
                continue
            found.append((branch, x, float(r)))
    found.sort(key=lambda item: (item[1][0], item[1][1], item[1][2], item[0]))
    out = []
    for branch, x, res in found:
        a0, b0, b1 = (float(v) for v in x)
        a1 = branch * prob.lam * a0
        seg = PHSegment7.from_start(preimage(data, a0, a1, b0, b1), data.P0, 1.0)
        try:
            seg.bending_energy()
        except CuspError:
            continue
        out.append(SinglePHSolution(seg, a0, a1, b0, b1, res))
    return out
