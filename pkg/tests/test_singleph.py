import math

import numpy as np
import pytest

from phbiarc.biarc import HermiteData
from phbiarc.phcurve import PHSegment7
from phbiarc.singleph import SinglePHProblem, preimage, residual_system, solve
from problems import CONVEX, SET1, SET1_SHORT, close

STRAIGHT = HermiteData(0j, 1 + 0j, 1 + 0j, 1 + 0j, 0.0, 0.0, 1.0 + 1e-15)


@pytest.fixture(scope="module")
def set1_solutions():
    return solve(SinglePHProblem(SET1))


@pytest.fixture(scope="module")
def convex_solutions():
    return solve(SinglePHProblem(CONVEX))


class TestResidual:
    def test_straight_line_is_exact(self):
        np.testing.assert_allclose(residual_system(SinglePHProblem(STRAIGHT), 1.0, 0.0, 0.0), 0.0, atol=1e-12)

    def test_straight_preimage_is_constant(self):
        np.testing.assert_array_equal(preimage(STRAIGHT, 1.0, 1.0, 0.0, 0.0), np.ones(4))

    def test_zero_alpha(self):
        with pytest.raises(ValueError):
            residual_system(SinglePHProblem(SET1), 0.0, 0.0, 0.0)

    def test_matches_constructed_curve(self, rng):
        prob = SinglePHProblem(SET1)
        for _ in range(10):
            a0, b0, b1 = rng.uniform(0.5, 2.0), *rng.normal(scale=3, size=2)
            seg = PHSegment7.from_start(preimage(SET1, a0, a0, b0, b1), SET1.P0, 1.0)
            r = residual_system(prob, a0, b0, b1)
            d = seg.end - SET1.P1
            assert r[0] == pytest.approx(70 * d.real, abs=1e-11)
            assert r[1] == pytest.approx(70 * d.imag, abs=1e-11)
            assert r[2] == pytest.approx(70 * (seg.arc_length() - SET1.L), abs=1e-11)

    def test_bad_lambda(self):
        with pytest.raises(ValueError):
            SinglePHProblem(SET1, lam=0.0)


class TestSolve:
    def test_set1_count_and_energies(self, set1_solutions):
        energies = sorted(s.energy for s in set1_solutions)
        assert len(energies) == 2
        assert close(energies[0], 14.4481, 4) and close(energies[1], 184.113, 4)

    def test_short_length_has_no_solution(self):
        assert solve(SinglePHProblem(SET1_SHORT)) == []

    def test_convex_count_and_energies(self, convex_solutions):
        energies = sorted(s.energy for s in convex_solutions)
        expected = sorted([1.02189e6, 183.06, 2.06226e6, 4.46632e5])
        assert len(energies) == 4
        for e, x in zip(energies, expected):
            assert close(e, x, 4)

    @pytest.mark.parametrize("which", ["set1", "convex"])
    def test_solutions_interpolate(self, which, set1_solutions, convex_solutions):
        data, sols = (SET1, set1_solutions) if which == "set1" else (CONVEX, convex_solutions)
        for s in sols:
            seg = s.segment
            assert s.residual <= 1e-9 * (1 + data.L)
            assert seg.start == data.P0
            assert abs(seg.end - data.P1) <= 1e-10
            assert seg.arc_length() == pytest.approx(data.L, rel=1e-9)
            f0, f1 = seg.evaluate(0.0), seg.evaluate(1.0)
            assert abs(f0.unit_tangent - data.t0) <= 1e-10
            assert abs(f1.unit_tangent - data.t1) <= 1e-10
            assert f0.signed_curvature == pytest.approx(data.k0, abs=1e-9)
            assert f1.signed_curvature == pytest.approx(data.k1, abs=1e-9)
            assert abs(s.alpha1) == pytest.approx(s.alpha0, rel=1e-15)
            assert s.alpha0 > 0

    def test_sorted_output(self, convex_solutions):
        keys = [(s.alpha0, s.beta0, s.beta1) for s in convex_solutions]
        assert keys == sorted(keys)

    def test_both_signs_searched(self, convex_solutions):
        assert {math.copysign(1, s.alpha1) for s in convex_solutions} == {1.0, -1.0}

    def test_deterministic(self, set1_solutions):
        again = solve(SinglePHProblem(SET1))
        assert [(s.alpha0, s.beta0, s.beta1) for s in again] == [(s.alpha0, s.beta0, s.beta1)
                                                                  for s in set1_solutions]
