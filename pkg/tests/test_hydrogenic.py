import numpy as np
import pytest

from nopairlab.channel import coulomb_channel, diagonalize
from nopairlab.grid import make_log_grid
from nopairlab.hydrogenic import (SupercriticalLevelError, br_channel_spectrum,
                                  dirac_level, level_table, schrodinger_level,
                                  scott_br, scott_furry, shell_channels)

KAPPA = 0.5


def test_ground_state_closed_form():
    assert dirac_level(KAPPA, 1, -1) == pytest.approx(np.sqrt(1.0 - KAPPA ** 2))


def test_free_limit():
    for (n, kj) in ((1, -1), (3, 2), (5, -4)):
        assert dirac_level(0.0, n, kj) == pytest.approx(1.0)


def test_second_shell_value():
    expect = (1.0 + 0.25 / (1.0 + np.sqrt(0.75)) ** 2) ** -0.5
    assert dirac_level(KAPPA, 2, -1) == pytest.approx(expect, rel=1e-14)


def test_dirac_level_cross_checks_numeric(grid_mid):
    num = diagonalize(coulomb_channel(grid_mid, -1, 1.0, KAPPA)).gap_energies()
    assert dirac_level(KAPPA, 2, -1) == pytest.approx(num[1], rel=1e-7)


def test_level_errors():
    with pytest.raises(ValueError):
        dirac_level(KAPPA, 1, 0)
    with pytest.raises(ValueError):
        dirac_level(KAPPA, 1, -2)
    with pytest.raises(ValueError):
        dirac_level(1.2, 1, -1)
    # integer channels with kappa < 1 are never supercritical; the guard
    # protects hypothetical non-integer use
    assert issubclass(SupercriticalLevelError, ValueError)


def test_dirac_level_decreasing_in_kappa():
    for n, kj in ((1, -1), (3, -2), (4, 3)):
        vals = [dirac_level(k, n, kj) for k in np.linspace(0.05, 0.9, 12)]
        assert np.all(np.diff(vals) < 0.0)


def test_schrodinger_level():
    assert schrodinger_level(KAPPA, 1) == pytest.approx(0.875)
    assert schrodinger_level(0.0, 7) == pytest.approx(1.0)
    assert schrodinger_level(KAPPA, 10 ** 6) == pytest.approx(1.0, abs=1e-12)


def test_shell_multiplicity_identity():
    for n in range(1, 12):
        assert sum(2 * abs(kj) for kj in shell_channels(n)) == 2 * n * n


def test_level_table_sorted_and_complete():
    table = level_table(KAPPA, 4)
    energies = [e[2] for e in table.entries]
    assert energies == sorted(energies)
    total = sum(e[3] for e in table.entries)
    assert total == sum(2 * n * n for n in range(1, 5))


def test_scott_furry_small_kappa_limit():
    est = scott_furry(1e-3, 60)
    assert est.estimate == pytest.approx(0.5, abs=1e-5)


def test_scott_furry_partial_sums_cauchy():
    ests = [scott_furry(KAPPA, n).partial_sum for n in (50, 100, 200)]
    assert abs(ests[2] - ests[1]) < abs(ests[1] - ests[0])


def test_scott_furry_golden_value():
    # frozen from tail-extrapolated sums at n_max in {50, 100, 200, 400}
    # agreeing to better than 1e-5
    est = scott_furry(KAPPA, 200)
    assert est.estimate == pytest.approx(0.265799, abs=2e-5)
    assert est.tail_error < 1e-5
    for nmax in (100, 400):
        assert scott_furry(KAPPA, nmax).estimate == pytest.approx(est.estimate,
                                                                  abs=1e-5)


@pytest.fixture(scope="module")
def br_grid():
    return make_log_grid(2e-6, 700.0, 900)


def test_br_spectrum_below_dirac(br_grid):
    br = br_channel_spectrum(br_grid, KAPPA, -1)
    dn = diagonalize(coulomb_channel(br_grid, -1, 1.0, KAPPA)).gap_energies()
    m = min(len(br), len(dn), 6)
    assert np.all(br[:m] < dn[:m])
    # two-sided bracket for the lowest projected level
    assert np.sqrt(1.0 - KAPPA ** 2) * 0.9 < br[0] < dn[0]


def test_br_free_coupling_empty(br_grid):
    assert br_channel_spectrum(br_grid, 0.0, -1).size == 0


def test_br_variational_refinement():
    vals = []
    for n, rmax in ((400, 300.0), (700, 500.0), (1000, 700.0)):
        g = make_log_grid(2e-6, rmax, n)
        vals.append(br_channel_spectrum(g, KAPPA, -1)[0])
    assert vals[0] >= vals[1] >= vals[2] - 1e-12


def test_scott_br_below_furry(br_grid):
    br = scott_br(KAPPA, br_grid, n_max=5)
    fu = scott_furry(KAPPA, 200)
    assert br.estimate < fu.estimate
    # golden window from the first computation
    assert br.estimate == pytest.approx(0.194, abs=0.02)


def test_scott_br_small_kappa(br_grid):
    g = make_log_grid(1e-6, 2000.0, 900)
    est = scott_br(1e-2, g, n_max=3)
    assert est.estimate == pytest.approx(0.5, abs=5e-3)
