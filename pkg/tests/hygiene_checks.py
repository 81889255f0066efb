"""Shared numerical hygiene checks.

Each function runs a batch of randomized comparisons and returns the
worst deviation seen, so callers can assert against their own budget.
Used by the unit tests (small batches) and the acceptance suite (full
batches).
"""

import numpy as np
import scipy.linalg

from ticontext import (
    UMPS,
    energy_density,
    fixed_points,
    gradient,
    povm_project,
    resolve,
)
from ticontext.observables import Signature, n_parameters
from ticontext.umps import random_tensor

FD_POOL = ["222/1", "322/1", "322/17", "322/63",
           "232/1", "232/2", "232/3", "232/4", "232/5"]


def worst_fd_gradient_error(n_instances: int, seed: int = 0) -> float:
    """Max relative deviation between analytic and central-difference
    parameter gradients over random (functional, signature, W, state)
    draws."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        f = resolve(FD_POOL[i % len(FD_POOL)])
        d = int(rng.integers(2, 4))
        kind = "real" if i % 2 == 0 else "full"
        n_set = len(f.settings)
        sig = Signature(tuple(int(rng.integers(0, d + 1))
                              for _ in range(n_set)), d)
        W = rng.uniform(-np.pi / 2, np.pi / 2,
                        size=n_set * n_parameters(d, kind))
        d_site = d if f.window == 2 else d * d
        A = UMPS.random(3, d_site, rng=rng)
        ga = gradient(f, sig, W, A, kind=kind)
        gfd = gradient(f, sig, W, A, kind=kind, method="fd")
        err = np.max(np.abs(ga - gfd)) / max(1.0, np.max(np.abs(ga)))
        worst = max(worst, float(err))
    return worst


def worst_povm_projection_error(n_matrices: int, seed: int = 0) -> float:
    """Max entry deviation between povm_project and an independent
    eigenvalue-clipping computation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_matrices):
        d = int(rng.integers(2, 7))
        r = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        if i % 3 == 0:
            r = r.real.astype(complex)
        s = (r + r.conj().T) * rng.uniform(0.2, 2.0)
        w, v = scipy.linalg.eigh(s)
        expect = (v * np.clip(w, -1.0, 1.0)) @ v.conj().T
        pair = povm_project(s)
        worst = max(worst, float(np.max(np.abs(pair.sigma - expect))))
        # the pair itself must be a POVM resolving the observable
        assert np.max(np.abs(pair.m0 + pair.m1 - np.eye(d))) < 1e-12
        assert np.min(np.linalg.eigvalsh(pair.m0)) > -1e-10
        assert np.min(np.linalg.eigvalsh(pair.m1)) > -1e-10
    return worst


def worst_gauge_invariance_error(n_cases: int, seed: int = 0) -> float:
    """Max energy drift under A -> g^-1 A g with random invertible g."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        D = int(rng.integers(2, 5))
        d = int(rng.integers(2, 4))
        A = random_tensor(D, d, rng)
        h = rng.normal(size=(d * d, d * d))
        h = h + h.T
        g = np.eye(D) + 0.3 * rng.normal(size=(D, D))
        Ag = np.einsum("ab,bsc,cd->asd", np.linalg.inv(g), A, g)
        e = energy_density(UMPS(A), h)
        eg = energy_density(UMPS(Ag), h)
        worst = max(worst, abs(e - eg))
    return worst


def worst_fixed_point_residual(max_D: int = 3, seed: int = 0) -> float:
    """Max residual of the computed fixed points in the dense transfer
    matrix, over all D <= max_D and a few local dimensions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for D in range(1, max_D + 1):
        for d in (2, 3, 4):
            A = random_tensor(D, d, rng)
            fp = fixed_points(A)
            T = np.einsum("asb,csd->acbd", A, A.conj()).reshape(D * D, D * D)
            evals = np.linalg.eigvals(T)
            lam = float(np.max(evals.real))
            worst = max(
                worst,
                abs(fp.lam - lam) / abs(lam),
                float(np.max(np.abs(T @ fp.r.ravel() - fp.lam * fp.r.ravel()))),
                float(np.max(np.abs(T.conj().T @ fp.l.ravel()
                                    - fp.lam * fp.l.ravel()))),
                abs(np.trace(fp.l @ fp.r) - 1.0),
            )
    return worst
