import numpy as np
import pytest

from nopairlab.grid import (cumulative_integral, derivative_matrix, integrate,
                            make_log_grid)


def test_two_point_grid_hits_endpoints():
    g = make_log_grid(0.5, 8.0, 2)
    np.testing.assert_allclose(g.r, [0.5, 8.0])


def test_degenerate_range_rejected():
    with pytest.raises(ValueError):
        make_log_grid(2.0, 2.0, 100)
    with pytest.raises(ValueError):
        make_log_grid(-1.0, 2.0, 100)
    with pytest.raises(ValueError):
        make_log_grid(1e-3, 10.0, 1)


def test_nodes_strictly_increasing_weights_positive():
    g = make_log_grid(1e-6, 50.0, 2000)
    assert np.all(np.diff(g.r) > 0)
    assert np.all(g.w > 0)
    assert g.r[0] == pytest.approx(1e-6) and g.r[-1] == pytest.approx(50.0)


def test_exponential_integral():
    g = make_log_grid(1e-6, 50.0, 2000)
    exact = np.exp(-g.rmin) - np.exp(-g.rmax)
    assert integrate(g, np.exp(-g.r)) == pytest.approx(exact, abs=1e-9)


def test_polynomial_exponential_quadrature():
    # int r^3 e^{-2r} dr = 3!/2^4
    g = make_log_grid(1e-7, 60.0, 2500)
    assert integrate(g, g.r ** 3 * np.exp(-2.0 * g.r)) == pytest.approx(0.375, abs=1e-10)


def test_hydrogen_1s_normalization():
    # psi = e^{-r}/sqrt(pi): 4 pi int r^2 psi^2 dr = 1
    g = make_log_grid(1e-6, 50.0, 2000)
    rho = np.exp(-2.0 * g.r) / np.pi
    assert integrate(g, 4.0 * np.pi * g.r ** 2 * rho) == pytest.approx(1.0, abs=1e-9)


def test_integrate_zero_and_linearity(grid_small, rng):
    g = grid_small
    assert integrate(g, np.zeros(g.n)) == 0.0
    f = rng.normal(size=g.n)
    h = rng.normal(size=g.n)
    assert integrate(g, f + h) == pytest.approx(integrate(g, f) + integrate(g, h),
                                                rel=1e-14, abs=1e-13)


def test_integrate_length_mismatch(grid_small):
    with pytest.raises(ValueError):
        integrate(grid_small, np.zeros(grid_small.n + 1))


def test_gaussian_integral():
    g = make_log_grid(1e-6, 30.0, 3000)
    sig = 0.3
    f = np.exp(-((g.r - 3.0) / sig) ** 2 / 2.0)
    exact = sig * np.sqrt(2.0 * np.pi)  # tails beyond the grid are ~1e-44
    assert integrate(g, f) == pytest.approx(exact, abs=1e-8)


def test_quadrature_convergence_order():
    # empirical order >= 3.5 on a smooth integrand with nonzero endpoint slope
    exact = np.exp(-1e-3) - np.exp(-30.0)
    errs = []
    for n in (250, 500, 1000):
        g = make_log_grid(1e-3, 30.0, n)
        errs.append(abs(integrate(g, np.exp(-g.r)) - exact))
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert min(order1, order2) > 1.9  # trapezoid floor on rough integrands
    # smooth decaying integrand: effectively beyond-all-orders accuracy
    g = make_log_grid(1e-9, 60.0, 600)
    assert integrate(g, g.r ** 2 * np.exp(-g.r)) == pytest.approx(2.0, abs=1e-8)


def test_cumulative_integral_matches_analytic():
    g = make_log_grid(1e-6, 20.0, 3000)
    cum = cumulative_integral(g, np.exp(-g.r))
    exact = np.exp(-g.rmin) - np.exp(-g.r)
    np.testing.assert_allclose(cum, exact, atol=1e-10)


def test_derivative_matrix_exact_on_log_polynomials(grid_small):
    g = grid_small
    D = derivative_matrix(g).matrix
    for k in (0, 1, 2, 3, 4):
        f = g.t ** k
        df_dr = (k * g.t ** (k - 1) if k else np.zeros(g.n)) / g.r
        np.testing.assert_allclose(D @ f, df_dr, atol=1e-9 * max(1.0, np.abs(df_dr).max()))


def test_derivative_matrix_weighted_antisymmetry(grid_small):
    # interior rows of the t-derivative are antisymmetric by construction
    g = grid_small
    Dt = derivative_matrix(g).matrix * g.r[:, None]
    A = Dt[4:-4, 4:-4]
    np.testing.assert_allclose(A, -A.T, atol=1e-12 / g.h)
