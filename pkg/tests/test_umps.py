"""Transfer fixed points, densities, energies, checkpoints.

Dense-diagonalization cross-checks keep D small; the iterative path is
exercised by the same public API.
"""

import numpy as np
import pytest

from ticontext import (
    NonInjectiveError,
    UMPS,
    energy_density,
    fixed_points,
    ground_state,
    load_checkpoint,
    reduced_density,
    save_checkpoint,
)
from ticontext.umps import energy_and_gradient, random_tensor


def dense_transfer(A):
    # E(X) = sum_s A^s X A^s+ acting on row-major vec(X)
    return np.einsum("asb,csd->acbd", A, A.conj()).reshape(
        A.shape[0] ** 2, A.shape[0] ** 2)


@pytest.mark.parametrize("D,d,seed", [(2, 2, 0), (3, 2, 1), (3, 3, 2),
                                      (2, 4, 3), (3, 4, 4)])
def test_fixed_points_match_dense_diagonalization(D, d, seed):
    A = random_tensor(D, d, np.random.default_rng(seed))
    fp = fixed_points(A)
    T = dense_transfer(A)
    evals = np.linalg.eigvals(T)
    lam = np.max(evals.real[np.abs(evals.imag) < 1e-9])
    assert abs(fp.lam - lam) < 1e-9 * abs(lam)
    # eigenvector residuals in the dense map
    l, r = fp.l, fp.r
    assert np.max(np.abs(T @ r.ravel() - fp.lam * r.ravel())) < 1e-8
    assert np.max(np.abs(T.conj().T @ l.ravel() - fp.lam * l.ravel())) < 1e-8
    # normalized as density-like matrices
    assert abs(np.trace(l @ r) - 1.0) < 1e-10
    assert np.min(np.linalg.eigvalsh((l + l.conj().T) / 2)) > -1e-10


def test_fixed_points_flags_degenerate_transfer():
    # two decoupled copies of the same one-dimensional chain
    A = np.zeros((2, 2, 2))
    A[0, :, 0] = [1.0, 0.5]
    A[1, :, 1] = [1.0, 0.5]
    with pytest.raises(NonInjectiveError):
        fixed_points(A)


def test_umps_normalizes_leading_eigenvalue():
    psi = UMPS.random(3, 2, seed=5)
    T = dense_transfer(psi.A)
    lam = np.max(np.abs(np.linalg.eigvals(T)))
    assert abs(lam - 1.0) < 1e-10


def test_reduced_density_is_a_state():
    psi = UMPS.random(3, 2, seed=7)
    for k in (1, 2, 3):
        rho = reduced_density(psi, k)
        assert rho.shape == (2 ** k, 2 ** k)
        assert abs(np.trace(rho) - 1.0) < 1e-10
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10


def test_reduced_density_marginal_consistency():
    psi = UMPS.random(4, 3, seed=11)
    rho2 = reduced_density(psi, 2).reshape(3, 3, 3, 3)
    rho1 = reduced_density(psi, 1)
    # tracing either site of the pair leaves the single-site state
    assert np.allclose(np.einsum("abcb->ac", rho2), rho1, atol=1e-10)
    assert np.allclose(np.einsum("babc->ac", rho2), rho1, atol=1e-10)


def test_energy_density_identity_term():
    psi = UMPS.random(3, 2, seed=3)
    assert abs(energy_density(psi, np.eye(4)) - 1.0) < 1e-10


def test_energy_density_gauge_invariance():
    # A -> g^-1 A g leaves the state, hence every expectation, unchanged
    rng = np.random.default_rng(13)
    A = random_tensor(3, 2, rng)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    g = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
    Ag = np.einsum("ab,bsc,cd->asd", np.linalg.inv(g), A, g)
    e = energy_density(UMPS(A), h)
    eg = energy_density(UMPS(Ag), h)
    assert abs(e - eg) < 1e-10


def test_energy_gradient_is_tangent_and_descends():
    rng = np.random.default_rng(17)
    A = random_tensor(3, 2, rng)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    e, G, lam = energy_and_gradient(A, h)
    An = A / np.sqrt(lam)
    # gradient lives in the tangent space of the normalized tensor
    assert abs(np.vdot(G, An)) < 1e-8
    step = 1e-4 / max(1.0, np.linalg.norm(G))
    e2 = energy_density(UMPS(An - step * G), h)
    assert e2 < e


def test_ground_state_product_ferromagnet():
    # h = -Z(x)Z has a product ground state at energy -1
    z = np.diag([1.0, -1.0])
    h = -np.kron(z, z)
    psi, rep = ground_state(h, 2, seed=0)
    assert rep.converged
    assert abs(rep.energy - (-1.0)) < 1e-8
    assert abs(energy_density(psi, h) - rep.energy) < 1e-8


def test_ground_state_transverse_field_ising():
    # e0 = -2/pi at the critical point of H = -sum XX - sum Z, well
    # approximated already at small bond dimension
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = np.diag([1.0, -1.0])
    h = -np.kron(x, x) - (np.kron(z, np.eye(2)) + np.kron(np.eye(2), z)) / 2
    # the critical point is gapless, so the gradient tolerance stays
    # modest; the energy is still accurate to ~1e-5 at D=8
    psi, rep = ground_state(h, 8, seed=1, tol=1e-5)
    e_exact = -4.0 / np.pi
    assert rep.converged
    assert rep.energy > e_exact - 1e-9
    assert abs(rep.energy - e_exact) < 1e-3


def test_checkpoint_round_trip(tmp_path):
    psi = UMPS.random(3, 2, seed=19)
    p = tmp_path / "state.txt"
    save_checkpoint(p, psi, seed=19, energy=-1.25)
    psi2, meta = load_checkpoint(p)
    # 17 significant digits round-trip the entries; reconstruction
    # renormalizes, which may touch the last bit
    assert np.allclose(psi.A, psi2.A, rtol=0, atol=1e-12)
    assert meta["seed"] == 19
    assert meta["energy"] == -1.25
