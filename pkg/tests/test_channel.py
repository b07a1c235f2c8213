import numpy as np
import pytest

from nopairlab.channel import (IllConditionedProjectionError, assemble_channel,
                               coulomb_channel, diagonalize, free_channel,
                               operator_order, positive_projector,
                               resolvent_projector, spectrum_power)
from nopairlab.grid import make_log_grid
from nopairlab.hydrogenic import dirac_level

KAPPA = 0.5   # scaled units: c = 1, Z = kappa


def sommerfeld_first(kj):
    n0 = abs(kj) if kj < 0 else kj + 1
    return [dirac_level(KAPPA, n0 + i, kj) for i in range(5)]


@pytest.fixture(scope="module")
def coulomb_spec(grid_mid):
    return diagonalize(coulomb_channel(grid_mid, -1, 1.0, KAPPA))


def test_assemble_rejects_bad_input(grid_small):
    v = np.zeros(grid_small.n)
    with pytest.raises(ValueError):
        assemble_channel(grid_small, 0, 1.0, v)
    v_bad = v.copy()
    v_bad[3] = np.nan
    with pytest.raises(ValueError):
        assemble_channel(grid_small, -1, 1.0, v_bad)


def test_hamiltonian_symmetric(grid_small):
    op = coulomb_channel(grid_small, -2, 1.0, KAPPA)
    defect = np.max(np.abs(op.H - op.H.T))
    assert defect <= 1e-10 * np.max(np.abs(op.H))


def test_free_channel_gap_and_symmetry(grid_small):
    spec = free_channel(grid_small, -1, 1.0)
    w = spec.eigenvalues
    assert np.min(np.abs(w)) >= 1.0 - 1e-6     # no eigenvalue inside the gap
    np.testing.assert_allclose(np.sort(w), -np.sort(-w)[::-1], atol=1e-8)
    assert spec.gap_indices.size == 0


def test_free_projector_half_rank(grid_small):
    spec = free_channel(grid_small, 1, 1.0)
    P = positive_projector(spec)
    assert np.trace(P) == pytest.approx(grid_small.n, abs=1e-8)


@pytest.mark.parametrize("kj", [-1, 1, -2, 2, -3, 3])
def test_sommerfeld_oracle(grid_mid, kj):
    # |kj| = 3 reaches principal n = 8 whose orbit grazes this grid's box;
    # the acceptance suite certifies 1e-6 on the production grid
    spec = diagonalize(coulomb_channel(grid_mid, kj, 1.0, KAPPA))
    got = spec.gap_energies()[:5]
    ref = sommerfeld_first(kj)
    np.testing.assert_allclose(got, ref, rtol=1e-7 if abs(kj) < 3 else 5e-5)
    assert spec.spurious_indices.size == 0


def test_ground_state_matches_gap_lower_edge(coulomb_spec):
    lam1 = coulomb_spec.gap_energies()[0]
    assert lam1 == pytest.approx(np.sqrt(1.0 - KAPPA ** 2), rel=1e-8)
    # all gap states above the certified lower edge
    assert np.all(coulomb_spec.gap_energies() >= np.sqrt(1 - KAPPA**2) - 1e-6)


def test_degenerate_partner_channels(grid_mid):
    # 2s_{1/2} (kj=-1, second) and 2p_{1/2} (kj=+1, first) share the energy
    sm = diagonalize(coulomb_channel(grid_mid, -1, 1.0, KAPPA)).gap_energies()
    sp = diagonalize(coulomb_channel(grid_mid, +1, 1.0, KAPPA)).gap_energies()
    assert sm[1] == pytest.approx(sp[0], rel=1e-6)


def test_gap_count_grows_under_refinement():
    counts = []
    for n, rmax in ((300, 80.0), (500, 200.0), (800, 500.0)):
        g = make_log_grid(2e-6, rmax, n)
        counts.append(diagonalize(coulomb_channel(g, -1, 1.0, KAPPA)).gap_indices.size)
    assert counts[0] <= counts[1] <= counts[2]
    assert counts[2] > counts[0]


def test_eigenbasis_orthonormal_and_residual(grid_small):
    op = coulomb_channel(grid_small, -1, 1.0, KAPPA)
    spec = diagonalize(op)
    v = spec.eigenvectors
    gram = v.T @ v
    assert np.max(np.abs(gram - np.eye(gram.shape[0]))) < 1e-10
    i = spec.gap_indices[0]
    resid = op.H @ v[:, i] - spec.eigenvalues[i] * v[:, i]
    assert np.linalg.norm(resid) < 1e-8 * np.linalg.norm(op.H, ord=np.inf)


def test_two_by_two_analytic_toy():
    # single-point grid: eigenvalues are +-sqrt(c^4 + (cK)^2)
    g = make_log_grid(0.9, 1.1, 2)
    op = assemble_channel(g, -1, 1.0, np.zeros(2), np.zeros(2))
    w = np.linalg.eigvalsh(op.H)
    k2 = (op.K @ np.eye(2))  # 2x2 block; compare against its singular values
    s = np.linalg.svd(op.K, compute_uv=False)
    expect = np.sort(np.concatenate([np.sqrt(1.0 + s ** 2), -np.sqrt(1.0 + s ** 2)]))
    np.testing.assert_allclose(w, expect, atol=1e-12)


def test_positive_projector_properties(coulomb_spec):
    P = positive_projector(coulomb_spec)
    assert np.max(np.abs(P @ P - P)) < 1e-10
    assert np.max(np.abs(P - P.T)) < 1e-12
    assert np.trace(P) == pytest.approx(np.sum(coulomb_spec.eigenvalues > 0))


def test_positive_projector_diagonal_toy(grid_small):
    spec = diagonalize(coulomb_channel(grid_small, -1, 1.0, KAPPA))
    # diagonal spectrum (-2,-1,1,2) -> diag(0,0,1,1), built by hand
    from dataclasses import replace
    toy = replace(spec, eigenvalues=np.array([-2.0, -1.0, 1.0, 2.0]),
                  eigenvectors=np.eye(4))
    P = positive_projector(toy)
    np.testing.assert_allclose(P, np.diag([0.0, 0.0, 1.0, 1.0]))


def test_positive_projector_zero_guard(grid_small):
    spec = diagonalize(coulomb_channel(grid_small, -1, 1.0, KAPPA))
    from dataclasses import replace
    toy = replace(spec, eigenvalues=np.array([-1.0, 1e-12]), eigenvectors=np.eye(2))
    with pytest.raises(IllConditionedProjectionError):
        positive_projector(toy)


def test_resolvent_projector_scalar_cases():
    g = make_log_grid(0.9, 1.1, 2)
    for a in (2.5, -2.5):
        op = assemble_channel(g, -1, 1.0, np.zeros(2), np.zeros(2))
        H1 = np.array([[a]])
        object.__setattr__(op, "H", H1)
        P = resolvent_projector(op, z_max=2000.0, n_quad=300)
        assert P[0, 0] == pytest.approx(1.0 if a > 0 else 0.0, abs=1e-9)


def test_resolvent_projector_matches_spectral():
    g = make_log_grid(1e-3, 60.0, 50)
    op = coulomb_channel(g, -1, 1.0, KAPPA)
    P_spec = positive_projector(diagonalize(op))
    P_res = resolvent_projector(op)
    assert np.linalg.norm(P_res - P_spec) < 1e-6


def test_operator_order():
    A = np.diag([1.0, 2.0])
    assert operator_order(A, A) == pytest.approx(0.0, abs=1e-14)
    B = A + np.diag([0.5, 0.1])
    assert operator_order(A, B) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        operator_order(A, np.eye(3))


def test_mean_field_sandwich_bound(grid_small):
    # C' |D_0| <= |D_{Z,rho}| <= (1+4k)|D_0| certified on the physical band
    # (sub-grid boundary modes violate relative bounds by construction)
    from nopairlab.channel import band_projector, banded_operator_order
    from nopairlab.constants import kappa_constants
    from nopairlab.meanfield import RadialDensity, hartree_potential
    from nopairlab.grid import integrate
    g = grid_small
    rho = np.exp(-g.r)
    rho *= KAPPA / integrate(g, 4 * np.pi * g.r ** 2 * rho)   # N = Z = kappa at c = 1
    phi = hartree_potential(RadialDensity(grid=g, rho=rho, total=KAPPA))
    op = assemble_channel(g, -1, 1.0, -KAPPA / g.r + phi)
    spec = diagonalize(op)
    free = free_channel(g, -1, 1.0)
    absD = spectrum_power(spec, 1.0)
    abs0 = spectrum_power(free, 1.0)
    Q = band_projector(spec)
    assert banded_operator_order(absD, (1.0 + 4.0 * KAPPA) * abs0, Q) >= -1e-8
    ck = kappa_constants(KAPPA).c_lower
    assert banded_operator_order(ck * abs0, absD, Q) >= -1e-8
    # unrestricted comparison on the same band edge modes is documented
    # to fail; the raw primitive still reports the signed slack
    assert operator_order(absD, (1.0 + 4.0 * KAPPA) * abs0) < 0.0
