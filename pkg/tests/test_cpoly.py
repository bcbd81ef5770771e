import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phbiarc import cpoly

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)
cubics = st.lists(complexes, min_size=4, max_size=4)
params = st.floats(0.0, 1.0)


def naive(p, t):
    """Direct power-form sum of the Bernstein expansion."""
    m = len(p) - 1
    return sum(math.comb(m, i) * (1 - t)**(m - i) * t**i * c for i, c in enumerate(p))


class TestEval:
    def test_constant(self):
        assert cpoly.eval([1 + 0j], 0.37) == 1 + 0j

    def test_linear(self):
        assert cpoly.eval([0, 1], 0.25) == 0.25 + 0j

    def test_quadratic_midpoint(self):
        assert cpoly.eval([1, 1j, -1], 0.5) == pytest.approx(0.5j, abs=1e-15)

    @pytest.mark.parametrize("t", [-1e-12, 1.0 + 1e-12, math.nan])
    def test_domain(self, t):
        with pytest.raises(ValueError):
            cpoly.eval([1, 2], t)

    def test_array_shape(self):
        ts = np.linspace(0, 1, 12).reshape(3, 4)
        assert cpoly.eval([1, 2j, 3], ts).shape == (3, 4)

    @given(st.lists(complexes, min_size=1, max_size=9))
    def test_endpoints_bit_exact(self, p):
        assert cpoly.eval(p, 0.0) == complex(p[0])
        assert cpoly.eval(p, 1.0) == complex(p[-1])

    @given(st.lists(complexes, min_size=1, max_size=9), params)
    def test_matches_power_form(self, p, t):
        assert abs(cpoly.eval(p, t) - naive(p, t)) <= 1e-12 * (1 + sum(abs(c) for c in p))


class TestSquare:
    def test_constant(self):
        np.testing.assert_array_equal(cpoly.square([2 + 1j]), [3 + 4j])

    def test_corner_cubic(self):
        np.testing.assert_array_equal(cpoly.square([1, 0, 0, 0]), [1, 0, 0, 0, 0, 0, 0])

    def test_generic_cubic_chebyshev(self, rng):
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        out = cpoly.square(w)
        assert out.size == 7
        ts = 0.5 - 0.5 * np.cos((2 * np.arange(20) + 1) * np.pi / 40)
        np.testing.assert_allclose(cpoly.eval(out, ts), cpoly.eval(w, ts) ** 2, rtol=0, atol=1e-13 * 16)

    @given(cubics, st.lists(params, min_size=1, max_size=50))
    def test_square_identity(self, p, ts):
        sq = cpoly.square(p)
        for t in ts:
            v = cpoly.eval(p, t)
            assert abs(cpoly.eval(sq, t) - v * v) <= 1e-12 * (1 + abs(v)**2) * (1 + max(abs(c) for c in p))**2


class TestHermitianProduct:
    def test_constant(self):
        np.testing.assert_allclose(cpoly.hermitian_product([1 + 1j], [1 + 1j]), [2.0])

    def test_mixed_corners(self):
        out = cpoly.hermitian_product([1, 0, 0, 0], [0, 0, 0, 1])
        expected = np.zeros(7)
        expected[3] = 1 / 20
        np.testing.assert_allclose(out, expected, atol=1e-16)

    def test_speed_mean_is_integral(self, rng):
        from scipy.integrate import quad
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        sigma = cpoly.hermitian_product(w, w)
        exact, _ = quad(lambda t: abs(cpoly.eval(w, t))**2, 0, 1, epsabs=1e-14, epsrel=1e-13)
        assert np.sum(sigma) / 7 == pytest.approx(exact, rel=1e-12)

    @given(cubics, params)
    def test_modulus_squared(self, p, t):
        sig = cpoly.hermitian_product(p, p)
        v = abs(cpoly.eval(p, t))**2
        scale = (1 + max(abs(c) for c in p))**2
        assert abs(cpoly.eval(sig, t).real - v) <= 1e-12 * max(v, 1e-300) + 1e-13 * scale
        assert cpoly.eval(sig, t).real >= -1e-13 * scale


class TestChi:
    def test_one(self):
        assert cpoly.chi(1) == 1

    def test_i(self):
        assert cpoly.chi(1j) == pytest.approx(math.sqrt(2) / 2 * (1 + 1j), rel=1e-15)

    def test_negative_real(self):
        assert cpoly.chi(-4) == 2j
        assert cpoly.chi(complex(-4, -0.0)) == 2j

    def test_zero(self):
        assert cpoly.chi(0) == 0

    def test_random_magnitudes(self, rng):
        mags = 10.0 ** rng.uniform(-6, 6, 1000)
        cs = mags * np.exp(1j * rng.uniform(-np.pi, np.pi, 1000))
        for c in cs:
            r = cpoly.chi(c)
            assert abs(r * r - c) <= 1e-13 * abs(c)
            assert r.real >= 0.0

    def test_continuous_across_positive_axis(self):
        for x in (1e-6, 1.0, 1e6):
            above, below = cpoly.chi(complex(x, 1e-12 * x)), cpoly.chi(complex(x, -1e-12 * x))
            assert abs(above - below) <= 1e-11 * math.sqrt(x)

    def test_stable_near_negative_axis(self):
        c = complex(-1.0, 1e-20)
        r = cpoly.chi(c)
        assert r.real == pytest.approx(0.5e-20, rel=1e-15)
        assert r.imag == 1.0

    def test_array_matches_scalar(self, rng):
        cs = rng.normal(size=200) + 1j * rng.normal(size=200)
        cs[:3] = [0, -4, 9]
        expected = [cpoly.chi(c) for c in cs]
        np.testing.assert_allclose(cpoly.chi_array(cs), expected, rtol=4e-16, atol=0)

    def test_principal_root(self, rng):
        for c in rng.normal(size=50) + 1j * rng.normal(size=50):
            assert cpoly.chi(c) == pytest.approx(cmath.sqrt(c), rel=1e-15)


def test_derivative(rng):
    p = rng.normal(size=5) + 1j * rng.normal(size=5)
    d = cpoly.derivative(p)
    t, h = 0.3, 1e-6
    fd = (cpoly.eval(p, t + h) - cpoly.eval(p, t - h)) / (2 * h)
    assert cpoly.eval(d, t) == pytest.approx(fd, rel=1e-8)
