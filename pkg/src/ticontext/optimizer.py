"""Outer optimization of observable parameters over uMPS ground states.

A descent step alternates an inner uMPS ground-state solve (the
observables, hence the chain Hamiltonian, held fixed) with a gradient
step on the observable parameters W. Includes the projected
gradient-with-momentum variant for POVM-valued observables and
two-parameter energy-surface scans.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, expm_frechet

from .classical import classical_bound
from .functionals import (BellFunctional, LocalTerm, block_nnn, local_term,
                          resolve)
from .observables import (Signature, build_observable, generator,
                          n_parameters, n_structured_parameters,
                          reference_diagonal, skew_basis, structured_pair,
                          structured_signature)
from .umps import UMPS, ground_state, reduced_density

__all__ = [
    "Schedule", "TraceStep", "Trace", "DescentResult", "POVMPair",
    "energy_of_params", "gradient", "descend", "descend_multistart",
    "povm_project", "povm_descend", "scan_surface",
]


@dataclass(frozen=True)
class Schedule:
    """Step-size schedule gamma(k) = max(gamma0 * alpha^(q_slope k),
    gamma_min), plus the stop threshold and iteration budget."""

    gamma0: float = 0.5
    alpha: float = 0.9
    q_slope: float = 1.0
    gamma_min: float = 1e-3
    eps_star: float = 1e-4
    max_outer: int = 200
    momentum: float = 0.9

    def __post_init__(self) -> None:
        if self.gamma0 <= 0 or self.gamma_min <= 0:
            raise ValueError("step sizes must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.q_slope < 0:
            raise ValueError("q_slope must be non-negative")
        if self.eps_star <= 0:
            raise ValueError("eps_star must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")

    def gamma(self, k: int) -> float:
        return max(self.gamma0 * self.alpha ** (self.q_slope * k),
                   self.gamma_min)


@dataclass
class TraceStep:
    k: int
    W: np.ndarray
    e: float
    grad_norm: float
    inner_converged: bool = True


@dataclass
class Trace:
    """Per-iteration records of one descent run."""

    steps: list[TraceStep] = field(default_factory=list)
    status: str = "max-iter"
    flagged: bool = False
    restarts: int = 0

    def append(self, step: TraceStep) -> None:
        self.steps.append(step)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.e for s in self.steps])

    def to_csv(self, path: str | Path) -> None:
        lines = ["k,e,grad_norm"]
        lines += [f"{s.k},{s.e:.17g},{s.grad_norm:.17g}" for s in self.steps]
        lines.append(f"# status: {self.status}")
        if self.flagged:
            lines.append("# flagged: restart budget exhausted")
        if self.restarts:
            lines.append(f"# restarts: {self.restarts}")
        if self.steps:
            w = " ".join(f"{v:.17g}" for v in self.steps[-1].W)
            lines.append(f"# W: {w}")
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class DescentResult:
    W: np.ndarray
    energy: float
    state: UMPS
    trace: Trace
    seed: int | None = None


# ---------------------------------------------------------------------------
# parametrized Hamiltonians and their derivatives
# ---------------------------------------------------------------------------

def _as_signature(signature, d: int | None,
                  n_settings: int | None = None) -> Signature:
    if isinstance(signature, Signature):
        if d is not None and signature.dim != d:
            raise ValueError("signature dimension disagrees with d")
        return signature
    if d is None:
        raise ValueError("d is required when the signature is a bare tuple")
    if signature is None:
        if n_settings is None:
            raise ValueError("signature is required here")
        # balanced default: each observable gets floor(d/2) eigenvalues -1
        return Signature((d // 2,) * n_settings, d)
    return Signature(tuple(int(n) for n in signature), d)


def _split_params(W, n_settings: int, m: int) -> list[np.ndarray]:
    W = np.asarray(W, dtype=float)
    if W.shape != (n_settings * m,):
        raise ValueError(f"expected {n_settings * m} parameters, "
                         f"got {W.shape}")
    return [W[a * m:(a + 1) * m] for a in range(n_settings)]


def build_observables(f: BellFunctional, signature: Signature, W,
                      kind: str = "real") -> list[np.ndarray]:
    """One exp(S)-rotated observable per setting from the flat W."""
    d = signature.dim
    if signature.n_settings != len(f.settings):
        raise ValueError("signature length disagrees with the scenario")
    m = n_parameters(d, kind)
    chunks = _split_params(W, signature.n_settings, m)
    return [build_observable(n, d, w, kind)
            for n, w in zip(signature, chunks)]


def chain_term(f: BellFunctional, obs: Sequence[np.ndarray]) -> LocalTerm:
    """Nearest-neighbour chain term; three-site windows are blocked."""
    term = local_term(f, obs)
    if term.n_sites == 3:
        term = block_nnn(term)
    return term


def _term_directional(f: BellFunctional, obs: Sequence[np.ndarray],
                      a: str, X: np.ndarray) -> np.ndarray:
    """Derivative of local_term(f, obs).matrix as sig[a] moves along X."""
    names = f.settings
    sig = dict(zip(names, obs))
    d = obs[0].shape[0]
    eye = np.eye(d, dtype=complex)

    if f.scenario == "322":
        dh = np.zeros((d ** 3, d ** 3), dtype=complex)
        c = float(f.one_body(a))
        if c:
            dh += c * np.kron(np.kron(X, eye), eye)
        for p in names:
            for q in names:
                for dist in (1, 2):
                    c = float(f.pair(p, q, dist))
                    if not c:
                        continue
                    if p == a:
                        parts = (X, sig[q]) if dist == 1 else (X, eye, sig[q])
                        dh += c * _kron3(parts, dist)
                    if q == a:
                        parts = ((sig[p], X) if dist == 1
                                 else (sig[p], eye, X))
                        dh += c * _kron3(parts, dist)
        return dh

    # product rule: X can sit at any slot holding sig[a]
    dh = np.zeros((d ** 2, d ** 2), dtype=complex)
    c = float(f.one_body(a))
    if c:
        dh += c * np.kron(X, eye)
    for p in names:
        for q in names:
            c = float(f.pair(p, q, 1))
            if not c:
                continue
            if p == a:
                dh += c * np.kron(X, sig[q])
            if q == a:
                dh += c * np.kron(sig[p], X)
    return dh


def _kron3(parts, dist) -> np.ndarray:
    if dist == 1:
        a, b = parts
        d = a.shape[0]
        return np.kron(np.kron(a, b), np.eye(d, dtype=complex))
    a, mid, b = parts
    return np.kron(np.kron(a, mid), b)


def _window_density(f: BellFunctional, A: "UMPS | np.ndarray") -> np.ndarray:
    """Translation-averaged density of one functional window.

    For a blocked chain (three-site windows folded onto pair blocks) the
    two embeddings of the window inside a block pair are averaged, so
    Tr(rho h) is the energy per original site.
    """
    if f.window == 2:
        return reduced_density(A, 2)
    tensor = A.A if isinstance(A, UMPS) else np.asarray(A)
    d2 = tensor.shape[1]
    d = int(round(np.sqrt(d2)))
    if d * d != d2:
        raise ValueError("blocked chain needs a square local dimension")
    rho4 = reduced_density(A, 2).reshape((d,) * 8)
    left = np.einsum("abcxuvwx->abcuvw", rho4)
    right = np.einsum("xabcxuvw->abcuvw", rho4)
    return ((left + right) / 2.0).reshape(d ** 3, d ** 3)


def energy_of_params(f: BellFunctional, signature, W,
                     A: "UMPS | np.ndarray", *, d: int | None = None,
                     kind: str = "real") -> float:
    """Energy density for observables at W with the state held fixed."""
    f = resolve(f)
    signature = _as_signature(signature, d, len(f.settings))
    obs = build_observables(f, signature, W, kind)
    h = local_term(f, obs)
    rho = _window_density(f, A)
    return float(np.real(np.einsum("ij,ji->", h.matrix, rho)))


def _observable_derivatives(n_minus: int, d: int, w, kind: str):
    """sigma and its derivative along every basis direction of S(W)."""
    lam = np.diag(reference_diagonal(n_minus, d)).astype(complex)
    S = generator(w, d, kind)
    U = expm(S)
    sigma = U @ lam @ U.conj().T
    derivs = []
    for B in skew_basis(d, kind):
        L = expm_frechet(S, B, compute_expm=False)
        dsig = L @ lam @ U.conj().T + U @ lam @ L.conj().T
        derivs.append(dsig)
    return sigma, derivs


def gradient(f: BellFunctional, signature, W, A: "UMPS | np.ndarray",
             *, d: int | None = None, kind: str = "real",
             method: str = "analytic", fd_step: float = 1e-5) -> np.ndarray:
    """d e(W) / d W at fixed state, analytic or central-difference."""
    f = resolve(f)
    signature = _as_signature(signature, d, len(f.settings))
    if method == "fd":
        W = np.asarray(W, dtype=float)
        g = np.zeros_like(W)
        for i in range(W.size):
            up, dn = W.copy(), W.copy()
            up[i] += fd_step
            dn[i] -= fd_step
            g[i] = (energy_of_params(f, signature, up, A, kind=kind)
                    - energy_of_params(f, signature, dn, A, kind=kind)) \
                / (2 * fd_step)
        return g
    if method != "analytic":
        raise ValueError(f"unknown gradient method {method!r}")

    dloc = signature.dim
    m = n_parameters(dloc, kind)
    chunks = _split_params(W, signature.n_settings, m)
    obs, dobs = [], []
    for n, w in zip(signature, chunks):
        sigma, derivs = _observable_derivatives(n, dloc, w, kind)
        obs.append(sigma)
        dobs.append(derivs)
    rho = _window_density(f, A)
    g = np.zeros(signature.n_settings * m)
    for ai, a in enumerate(f.settings):
        for ki, dsig in enumerate(dobs[ai]):
            dh = _term_directional(f, obs, a, dsig)
            g[ai * m + ki] = float(np.real(np.einsum("ij,ji->", dh, rho)))
    return g


# ---------------------------------------------------------------------------
# outer descent
# ---------------------------------------------------------------------------

def descend(f: BellFunctional, d: int | None = None, signature=None,
            seed: int | None = None, schedule: Schedule | None = None,
            *, D: int = 5, kind: str = "real", inner_tol: float = 1e-6,
            inner_sweeps: int = 2000, rng: np.random.Generator | None = None,
            W0: np.ndarray | None = None,
            polish_tol: float | None = None) -> DescentResult:
    """Gradient descent W(k+1) = W(k) - gamma(k) grad e(W; k).

    Each iteration re-solves the uMPS ground state for the current
    observables (warm-started from the previous tensor) and takes one
    step against the parameter gradient. Stops when the gradient norm
    falls under schedule.eps_star.
    """
    f = resolve(f)
    signature = _as_signature(signature, d, len(f.settings))
    schedule = schedule or Schedule()
    if rng is None:
        rng = np.random.default_rng(seed)
    m = n_parameters(signature.dim, kind)
    n = signature.n_settings * m
    W = (rng.uniform(-np.pi / 2, np.pi / 2, n) if W0 is None
         else np.asarray(W0, dtype=float).copy())
    if W.shape != (n,):
        raise ValueError(f"W0 must have {n} entries")

    trace = Trace()
    best = None
    A_prev = None
    for k in range(schedule.max_outer):
        obs = build_observables(f, signature, W, kind)
        term = chain_term(f, obs)
        psi, rep = ground_state(term, D, tol=inner_tol,
                                max_sweeps=inner_sweeps, rng=rng,
                                A0=A_prev)
        A_prev = psi.A
        e = rep.energy / term.sites_per_block
        g = gradient(f, signature, W, psi, kind=kind)
        gn = float(np.linalg.norm(g))
        trace.append(TraceStep(k, W.copy(), e, gn, rep.converged))
        if best is None or e < best[1]:
            best = (W.copy(), e, psi)
        if gn < schedule.eps_star:
            trace.status = "converged"
            break
        W = W - schedule.gamma(k) * g
    else:
        trace.status = "max-iter"

    W_out, e_out, psi_out = best
    if polish_tol is not None:
        obs = build_observables(f, signature, W_out, kind)
        term = chain_term(f, obs)
        psi_out, rep = ground_state(term, D, tol=polish_tol,
                                    max_sweeps=10 * inner_sweeps,
                                    rng=rng, A0=psi_out.A)
        e_out = rep.energy / term.sites_per_block
    return DescentResult(W=W_out, energy=e_out, state=psi_out,
                         trace=trace, seed=seed)


def _descend_seed(args) -> DescentResult:
    f, d, signature, seed, schedule, kw = args
    return descend(f, d, signature, seed, schedule, **kw)


def descend_multistart(f: BellFunctional, d: int | None = None,
                       signature=None, seeds: Sequence[int] | None = None,
                       schedule: Schedule | None = None, *,
                       n_starts: int = 16, workers: int | None = None,
                       polish_tol: float | None = None,
                       **kw) -> tuple[DescentResult, list[DescentResult]]:
    """Best-of-N independent descents (seeds default to 0..N-1)."""
    f = resolve(f)
    signature = _as_signature(signature, d, len(f.settings))
    if seeds is None:
        seeds = range(n_starts)
    seeds = list(seeds)
    if workers is None:
        workers = int(os.environ.get("TICONTEXT_THREADS", "1"))
    jobs = [(f, None, signature, s, schedule, kw) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_descend_seed, jobs))
    else:
        runs = [_descend_seed(j) for j in jobs]
    best = min(runs, key=lambda r: r.energy)
    if polish_tol is not None:
        obs = build_observables(f, signature, best.W, kw.get("kind", "real"))
        term = chain_term(f, obs)
        psi, rep = ground_state(term, kw.get("D", 5), tol=polish_tol,
                                max_sweeps=20000, A0=best.state.A)
        best = DescentResult(W=best.W,
                             energy=rep.energy / term.sites_per_block,
                             state=psi, trace=best.trace, seed=best.seed)
    return best, runs


# ---------------------------------------------------------------------------
# POVM-valued observables (projected gradient with momentum)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class POVMPair:
    """Two-outcome POVM and the observable it defines."""

    m0: np.ndarray
    m1: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        d = self.m0.shape[0]
        if np.max(np.abs(self.m0 + self.m1 - np.eye(d))) > 1e-9:
            raise ValueError("effects must sum to the identity")
        for m in (self.m0, self.m1):
            if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -1e-9:
                raise ValueError("effects must be positive semidefinite")

    def __iter__(self):
        return iter((self.sigma, self.m0, self.m1))


def povm_project(sigma_tilde: np.ndarray) -> POVMPair:
    """Frobenius-nearest observable with spectrum in [-1, 1].

    Clips the eigenvalues of the Hermitian input; the POVM effects are
    (I + sigma)/2 and (I - sigma)/2.
    """
    s = np.asarray(sigma_tilde, dtype=complex)
    if np.max(np.abs(s - s.conj().T)) > 1e-9:
        raise ValueError("input must be Hermitian")
    s = (s + s.conj().T) / 2
    if not np.abs(s.imag).any():
        # real symmetric input: the real eigensolver keeps the
        # eigenvectors real even on degenerate spectra, where the
        # complex one is free to mix in arbitrary phases
        w, v = np.linalg.eigh(s.real)
        v = v.astype(complex)
    else:
        w, v = np.linalg.eigh(s)
    sigma = (v * np.clip(w, -1.0, 1.0)) @ v.conj().T
    eye = np.eye(s.shape[0])
    return POVMPair(m0=(eye + sigma) / 2, m1=(eye - sigma) / 2, sigma=sigma)


def _herm_basis(d: int) -> list[np.ndarray]:
    """Real basis of Hermitian matrices: diagonal units, then
    (E_ij + E_ji) and i(E_ij - E_ji) for i < j, row-major."""
    out = []
    for i in range(d):
        b = np.zeros((d, d), dtype=complex)
        b[i, i] = 1.0
        out.append(b)
    for i in range(d):
        for j in range(i + 1, d):
            b = np.zeros((d, d), dtype=complex)
            b[i, j] = b[j, i] = 1.0
            out.append(b)
    for i in range(d):
        for j in range(i + 1, d):
            b = np.zeros((d, d), dtype=complex)
            b[i, j] = -1.0j
            b[j, i] = 1.0j
            out.append(b)
    return out


def _povm_obs(params: np.ndarray, n_settings: int,
              basis: list[np.ndarray]) -> list[np.ndarray]:
    m = len(basis)
    out = []
    for a in range(n_settings):
        p = params[a * m:(a + 1) * m]
        out.append(sum(pk * bk for pk, bk in zip(p, basis)))
    return out


def _povm_params(obs: Sequence[np.ndarray],
                 basis: list[np.ndarray]) -> np.ndarray:
    # Hermitian basis is orthogonal; diagonal units have norm 1, the
    # off-diagonal pairs norm sqrt(2)
    out = []
    for s in obs:
        for b in basis:
            out.append(float(np.real(np.trace(b.conj().T @ s)))
                       / float(np.real(np.trace(b.conj().T @ b))))
    return np.asarray(out)


def _snap_params_real(params: np.ndarray, n_settings: int,
                      d: int) -> np.ndarray:
    """Zero noise-level coefficients on the imaginary basis elements.

    A degenerate eigendecomposition inside the projection can leak
    ~1e-16 of imaginary dirt into otherwise real observables; left
    alone it seeds the complex-mode eigenvector instability of the
    inner solver and grows by orders of magnitude. Coefficients above
    the noise threshold are genuine and stay untouched.
    """
    m = d * d
    n_imag = d * (d - 1) // 2
    imax = max(abs(params[(a + 1) * m - n_imag:(a + 1) * m]).max()
               for a in range(n_settings))
    if imax <= 1e-13 * max(float(np.abs(params).max()), 1e-300):
        params = params.copy()
        for a in range(n_settings):
            params[(a + 1) * m - n_imag:(a + 1) * m] = 0.0
    return params


def povm_descend(f: BellFunctional, seed: int | None = None,
                 schedule: Schedule | None = None, *, D: int = 3,
                 inner_tol: float = 1e-6, inner_sweeps: int = 2000,
                 restarts: int = 10, target: float | None = None,
                 target_tol: float = 1e-5,
                 rng: np.random.Generator | None = None
                 ) -> tuple[np.ndarray, float, Trace]:
    """Momentum descent over POVM observables for a two-site window.

    Observables are parametrized by their Hermitian matrix entries,
    updated with momentum, and projected back to spectrum in [-1, 1]
    every iteration. A run stops when |e(k+1) - e(k)| <= eps_star; runs
    that stop short of the target (the classical bound by default) are
    restarted with a fresh seed until the budget runs out, and the
    best run is returned (flagged if it never reached the target).
    """
    f = resolve(f)
    if f.window != 2:
        raise ValueError("POVM descent handles two-site windows only")
    d = 2
    schedule = schedule or Schedule(eps_star=1e-8)
    if rng is None:
        rng = np.random.default_rng(seed)
    if target is None:
        target = float(f.classical_bound if f.classical_bound is not None
                       else classical_bound(f))
    basis = _herm_basis(d)
    m = len(basis)
    n_set = len(f.settings)

    best: tuple[np.ndarray, float, Trace] | None = None
    n_runs = 0
    n_imag = d * (d - 1) // 2
    for attempt in range(restarts + 1):
        params = rng.uniform(-1.0, 1.0, n_set * m)
        # start from real observables; the imaginary directions are
        # gauge-flat at real optima and would otherwise never decay
        for a in range(n_set):
            params[(a + 1) * m - n_imag:(a + 1) * m] = 0.0
        obs = [povm_project(s).sigma
               for s in _povm_obs(params, n_set, basis)]
        params = _snap_params_real(_povm_params(obs, basis), n_set, d)
        V = np.zeros_like(params)
        trace = Trace()
        A_prev = rng.standard_normal((D, d, D)).astype(complex)
        e_prev = np.inf
        n_runs += 1
        for k in range(schedule.max_outer):
            obs = _povm_obs(params, n_set, basis)
            term = local_term(f, obs)
            psi, rep = ground_state(term, D, tol=inner_tol,
                                    max_sweeps=inner_sweeps, rng=rng,
                                    A0=A_prev)
            A_prev = psi.A
            e = rep.energy
            rho = _window_density(f, psi)
            g = np.empty_like(params)
            for ai, a in enumerate(f.settings):
                for ki, B in enumerate(basis):
                    dh = _term_directional(f, obs, a, B)
                    g[ai * m + ki] = float(np.real(
                        np.einsum("ij,ji->", dh, rho)))
            if not any(params[(a + 1) * m - n_imag:(a + 1) * m].any()
                       for a in range(n_set)):
                # on the real slice those directions are exactly flat
                # (the window density is real there); what the gradient
                # picks up is numerical dirt, and momentum would
                # accumulate it past the snap threshold
                for a in range(n_set):
                    g[(a + 1) * m - n_imag:(a + 1) * m] = 0.0
            gn = float(np.linalg.norm(g))
            trace.append(TraceStep(k, params.copy(), e, gn, rep.converged))
            if abs(e - e_prev) <= schedule.eps_star:
                trace.status = "converged"
                break
            e_prev = e
            V = schedule.momentum * V - schedule.gamma(k) * g
            params = params + V
            obs = [povm_project(s).sigma
                   for s in _povm_obs(params, n_set, basis)]
            params = _snap_params_real(_povm_params(obs, basis), n_set, d)
        else:
            trace.status = "max-iter"

        # momentum can overshoot at the end; keep the run's best iterate
        i_best = int(np.argmin(trace.energies))
        run_best = (trace.steps[i_best].W.copy(), trace.steps[i_best].e,
                    trace)
        if best is None or run_best[1] < best[1]:
            best = run_best
        if best[1] <= target + target_tol:
            break

    params, e, trace = best
    trace.restarts = n_runs - 1
    trace.flagged = bool(e > target + target_tol)
    return params, e, trace


def povm_observables(params: np.ndarray, n_settings: int,
                     d: int = 2) -> list[POVMPair]:
    """Parameter vector -> projected POVM pairs, one per setting."""
    basis = _herm_basis(d)
    return [povm_project(s) for s in _povm_obs(params, n_settings, basis)]


def max_imaginary_part(params: np.ndarray, n_settings: int,
                       d: int = 2) -> float:
    """Largest |Im| entry over the observables encoded by params."""
    basis = _herm_basis(d)
    return max(float(np.max(np.abs(np.imag(s))))
               for s in _povm_obs(params, n_settings, basis))


# ---------------------------------------------------------------------------
# energy surfaces
# ---------------------------------------------------------------------------

def _two_parameter_builder(f: BellFunctional, signature: Signature,
                           kind: str) -> Callable[[float, float], list]:
    """Resolve a (w1, w2) -> observables map for the given signature."""
    d = signature.dim
    m = n_parameters(d, kind)
    if signature.n_settings * m == 2:
        return lambda w1, w2: build_observables(
            f, signature, np.array([w1, w2]), kind)
    for variant in (1, 2, 3):
        try:
            ref = structured_signature(f.scenario, d, variant)
        except (KeyError, ValueError):
            continue
        if (ref.minus_counts == signature.minus_counts
                and n_structured_parameters(f.scenario, d, variant) == 2):
            return lambda w1, w2: list(
                structured_pair(f.scenario, d, (w1, w2), variant))
    raise ValueError("surface scans need exactly two free parameters")


def scan_surface(f: BellFunctional, d: int | None = None, signature=None,
                 w1_values: Sequence[float] = (), w2_values: Sequence[float] = (),
                 *, D: int = 5, kind: str = "real", inner_tol: float = 1e-6,
                 inner_sweeps: int = 2000, seed: int | None = None
                 ) -> np.ndarray:
    """Ground-state energy on a (w1, w2) grid; e[i, j] at
    (w1_values[i], w2_values[j]). Solves are warm-started along rows."""
    f = resolve(f)
    signature = _as_signature(signature, d, len(f.settings))
    build = _two_parameter_builder(f, signature, kind)
    w1_values = np.asarray(w1_values, dtype=float)
    w2_values = np.asarray(w2_values, dtype=float)
    out = np.empty((w1_values.size, w2_values.size))
    rng = np.random.default_rng(seed)
    row_start = None
    for i, w1 in enumerate(w1_values):
        A_prev = row_start
        for j, w2 in enumerate(w2_values):
            term = chain_term(f, build(w1, w2))
            psi, rep = ground_state(term, D, tol=inner_tol,
                                    max_sweeps=inner_sweeps, rng=rng,
                                    A0=A_prev)
            A_prev = psi.A
            if j == 0:
                row_start = psi.A
            out[i, j] = rep.energy / term.sites_per_block
    return out
