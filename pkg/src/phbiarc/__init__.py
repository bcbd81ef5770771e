"""G2 Hermite interpolation with prescribed arc length by degree-7 PH biarcs."""

from .biarc import HermiteData, InfeasibleProblem, Interpolation, PHBiarc, build_biarc, interpolate
from .phcurve import CuspError, PHSegment7
from .singleph import SinglePHProblem, SinglePHSolution
from .singleph import solve as solve_single
from .spline import G2Spline, SplineNode
from .spline import build as build_spline

__version__ = "0.1.0"

__all__ = [
    "CuspError", "G2Spline", "HermiteData", "InfeasibleProblem", "Interpolation", "PHBiarc", "PHSegment7",
    "SinglePHProblem", "SinglePHSolution", "SplineNode", "build_biarc", "build_spline", "interpolate",
    "solve_single",
]
