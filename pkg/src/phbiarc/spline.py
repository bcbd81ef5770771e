"""Local G2 PH splines: one length-matched biarc per span."""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .biarc import HermiteData, InfeasibleProblem, interpolate


class SplineNode(NamedTuple):
    point: complex
    tangent: complex
    curvature: float

    @classmethod
    def make(cls, point, tangent, curvature):
        tangent = complex(tangent)
        if abs(tangent) == 0.0:
            raise ValueError("node tangent must be nonzero")
        return cls(complex(point), tangent / abs(tangent), float(curvature))


class SpanError(InfeasibleProblem):
    def __init__(self, index, reason):
        super().__init__(f"span {index}: {reason}")
        self.index = index
        self.reason = reason


class KnotMismatch(NamedTuple):
    knot: int
    position: float
    tangent: float
    curvature: float


@dataclass(eq=False)
class G2Spline:
    """Spans ``spans[j]`` cover the global parameter interval [j, j+1]."""

    spans: list
    nodes: list = None

    @property
    def n_spans(self):
        return len(self.spans)

    def arc_length(self):
        return sum(s.arc_length() for s in self.spans)

    def energy(self):
        return sum(s.energy for s in self.spans)

    def _locate(self, u):
        u = float(u)
        n = self.n_spans
        if not 0.0 <= u <= n:
            raise ValueError(f"spline parameter outside [0, {n}]")
        j = min(int(math.floor(u)), n - 1)
        return self.spans[j], u - j

    def point(self, u):
        span, t = self._locate(u)
        return span.point(t)

    def evaluate_global(self, u):
        span, t = self._locate(u)
        return span.evaluate(t)

    def knot_report(self):
        """Position, tangent-direction and curvature jumps at interior knots."""
        out = []
        for j in range(1, self.n_spans):
            left = self.spans[j - 1].evaluate(1.0)
            right = self.spans[j].evaluate(0.0)
            out.append(KnotMismatch(j, abs(left.point - right.point),
                                    abs(left.unit_tangent - right.unit_tangent),
                                    abs(left.signed_curvature - right.signed_curvature)))
        return out


def build(nodes, lengths, lam=1.0, beta0=0.0, beta1=0.0):
    """Interpolate each consecutive node pair with its minimum-energy biarc."""
    nodes = [n if isinstance(n, SplineNode) else SplineNode.make(*n) for n in nodes]
    lengths = [float(x) for x in lengths]
    if len(nodes) < 2:
        raise ValueError("a spline needs at least two nodes")
    if len(lengths) != len(nodes) - 1:
        raise ValueError(f"expected {len(nodes) - 1} span lengths, got {len(lengths)}")
    spans = []
    for j, L in enumerate(lengths):
        a, b = nodes[j], nodes[j + 1]
        try:
            data = HermiteData(a.point, b.point, a.tangent, b.tangent, a.curvature, b.curvature, L)
            spans.append(interpolate(data, lam, beta0, beta1).selected)
        except InfeasibleProblem as exc:
            raise SpanError(j, str(exc)) from exc
    return G2Spline(spans, nodes)


def evaluate_global(sp, u):
    return sp.evaluate_global(u)
