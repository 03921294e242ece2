import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugewave.radial import (
    NonFiniteFieldError, RadialGrid, dirichlet_energy, inner, integrate_volume, norm,
    radial_laplacian, rescale, stiffness_bands,
)


def smooth_cut(r):
    """1 for r <= 1, 0 for r >= 2, C-infinity in between."""
    def g(x):
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
    x = 2.0 - r
    return g(x) / (g(x) + g(1.0 - x))


class TestGrid:
    def test_nodes_and_spacing(self):
        g = RadialGrid(100, 7.0)
        assert np.all(np.diff(g.nodes) > 0)
        assert g.nodes[-1] == 7.0
        assert abs(g.spacing * g.n_points - g.r_max) <= 1e-12 * g.r_max

    @pytest.mark.parametrize("n", [0, 2, 15])
    def test_too_few_points(self, n):
        with pytest.raises(ValueError):
            RadialGrid(n, 1.0)

    def test_field_shape_and_finiteness(self):
        g = RadialGrid(32, 1.0)
        with pytest.raises(ValueError):
            g.field(np.zeros(31))
        vals = np.zeros(32)
        vals[7] = np.nan
        with pytest.raises(NonFiniteFieldError) as err:
            g.field(vals)
        assert err.value.index == 7

    def test_values_read_only(self):
        f = RadialGrid(32, 1.0).zeros()
        with pytest.raises(ValueError):
            f.values[0] = 1.0


class TestIntegrate:
    def test_zero(self):
        assert integrate_volume(RadialGrid(64, 3.0).zeros()) == 0.0

    def test_gaussian_closed_form(self):
        g = RadialGrid(4000, 12.0)
        val = integrate_volume(g.sample(lambda r: np.exp(-r**2)))
        assert abs(val / math.pi**1.5 - 1.0) <= 1e-6

    def test_smooth_cutoff_against_refined_grid(self):
        coarse = RadialGrid(2000, 4.0)
        fine = coarse.refined(10)
        a = integrate_volume(coarse.sample(smooth_cut))
        b = integrate_volume(fine.sample(smooth_cut))
        assert abs(a - b) <= 1e-6 * abs(b)

    def test_exact_for_linear_radial_integrand(self):
        # 4 pi f r^2 linear in r and zero at the origin (the origin is not a
        # node; even fields have a vanishing r^2-weighted integrand there)
        g = RadialGrid(50, 3.0)
        val = integrate_volume(g.sample(lambda r: 5.0 / r))
        exact = 4 * math.pi * 2.5 * 9.0
        assert abs(val - exact) <= 1e-12 * exact

    def test_second_order_for_polynomial(self):
        # a + b r: integrand is cubic, trapezoid error is O(h^2)
        errs = []
        for n in (50, 100, 200):
            g = RadialGrid(n, 2.0)
            exact = 4 * math.pi * (1.5 * 8 / 3 + 0.5 * 16 / 4)
            errs.append(abs(integrate_volume(g.sample(lambda r: 1.5 + 0.5 * r)) - exact))
        assert errs[0] / errs[1] > 3.9 and errs[1] / errs[2] > 3.9

    def test_non_finite_rejected(self):
        g = RadialGrid(32, 1.0)
        f = g.zeros()
        object.__setattr__(f, "values", np.full(32, np.inf))
        with pytest.raises(NonFiniteFieldError):
            integrate_volume(f)


class TestLaplacian:
    def test_constant_is_harmonic_in_interior(self):
        g = RadialGrid(200, 5.0)
        lap = radial_laplacian(g.sample(lambda r: np.full_like(r, 3.0))).values
        assert np.max(np.abs(lap[:-1])) <= 1e-10

    def test_r_squared(self):
        g = RadialGrid(500, 5.0)
        lap = radial_laplacian(g.sample(lambda r: r**2)).values
        assert np.max(np.abs(lap[:-1] - 6.0)) <= 1e-8

    def test_exponential_second_order(self):
        errs = []
        for n in (400, 800):
            g = RadialGrid(n, 20.0)
            r = g.nodes
            lap = radial_laplacian(g.sample(lambda r: np.exp(-r))).values
            sel = (r >= 1.0) & (r <= 10.0)
            errs.append(np.max(np.abs(lap[sel] - np.exp(-r[sel]) * (1 - 2 / r[sel]))))
        assert errs[0] / errs[1] >= 3.5

    def test_gradient_of_dirichlet_energy(self):
        # -Lap f is the weighted gradient of 1/2 ||f||_D^2 on the free nodes
        rng = np.random.default_rng(1)
        g = RadialGrid(100, 5.0)
        vals = rng.normal(size=100)
        vals[-1] = 0
        f = g.field(vals)
        v = rng.normal(size=100)
        v[-1] = 0
        eps = 1e-6
        fd = (dirichlet_energy(f + eps * v) - dirichlet_energy(f - eps * v)) / (4 * eps)
        assert fd == pytest.approx(inner(-radial_laplacian(f), v), rel=1e-7)


@st.composite
def dirichlet_pairs(draw):
    n = draw(st.integers(16, 120))
    R = draw(st.floats(1.0, 30.0))
    g = RadialGrid(n, R)
    elems = st.floats(-10, 10, allow_nan=False)
    a = np.array(draw(st.lists(elems, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(elems, min_size=n, max_size=n)))
    a[-1] = b[-1] = 0.0
    return g.field(a), g.field(b)


@given(dirichlet_pairs())
def test_laplacian_self_adjoint(pair):
    f, g = pair
    lhs = inner(radial_laplacian(f), g)
    rhs = inner(f, radial_laplacian(g))
    scale = np.sqrt(dirichlet_energy(f) * dirichlet_energy(g)) + 1e-300
    assert abs(lhs - rhs) <= 1e-10 * scale


@given(dirichlet_pairs(), st.floats(-5, 5), st.floats(-5, 5))
def test_integrate_linear(pair, a, b):
    f, g = pair
    lhs = integrate_volume(a * f + b * g)
    rhs = a * integrate_volume(f) + b * integrate_volume(g)
    assert abs(lhs - rhs) <= 1e-9 * (abs(a) * norm(f, "L2") + abs(b) * norm(g, "L2") + 1) * 1e3


class TestNorms:
    def test_zero(self):
        z = RadialGrid(64, 3.0).zeros()
        for which in ("L2", "L3", "L6", "L12_5", "D", "H1"):
            assert norm(z, which) == 0.0

    def test_gaussian_l2(self):
        g = RadialGrid(4000, 12.0)
        # int e^{-2 r^2} dx = (pi/2)^{3/2}
        assert norm(g.sample(lambda r: np.exp(-r**2)), "L2") == pytest.approx(
            (math.pi / 2) ** 0.75, rel=1e-6)

    def test_gaussian_d(self):
        g = RadialGrid(4000, 12.0)
        # |grad e^{-r^2}|^2 = 4 r^2 e^{-2 r^2}; integral = 3 (pi/2)^{3/2}
        assert norm(g.sample(lambda r: np.exp(-r**2)), "D") ** 2 == pytest.approx(
            3 * (math.pi / 2) ** 1.5, rel=1e-5)

    def test_h1_pythagoras(self):
        f = RadialGrid(300, 6.0).sample(lambda r: np.exp(-r) * np.cos(r))
        assert norm(f, "H1") ** 2 == pytest.approx(norm(f, "L2") ** 2 + norm(f, "D") ** 2, rel=1e-14)

    def test_unknown(self):
        with pytest.raises(ValueError):
            norm(RadialGrid(32, 1.0).zeros(), "L4")


class TestRescaleAndBands:
    def test_identity(self):
        f = RadialGrid(64, 5.0).sample(lambda r: np.exp(-r**2))
        assert np.array_equal(rescale(f, 1.0).values, f.values)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rescale(RadialGrid(32, 1.0).zeros(), 0.0)

    def test_stiffness_quadratic_form(self):
        g = RadialGrid(64, 5.0)
        f = g.sample(lambda r: np.exp(-r**2) * (1 - r / 5.0), "exterior_harmonic")
        diag, off = stiffness_bands(g, "exterior_harmonic")
        v = f.values
        quad = float(np.dot(diag * v, v) + 2 * np.dot(off * v[:-1], v[1:]))
        assert quad == pytest.approx(dirichlet_energy(f), rel=1e-12)

    def test_interpolation_even_and_exterior(self):
        g = RadialGrid(400, 10.0)
        f = g.sample(lambda r: np.exp(-r**2))
        assert f(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-4)
        assert f(np.array([-0.5]))[0] == f(np.array([0.5]))[0]
        phi = g.sample(lambda r: 1.0 / r, "exterior_harmonic")
        assert phi(np.array([20.0]))[0] == pytest.approx(0.05, rel=1e-12)
        assert f(np.array([20.0]))[0] == 0.0
