"""Parametrized dichotomic observables on a d-dimensional local site.

An observable here is a Hermitian matrix with eigenvalues in {+1, -1}.
Families of them are generated by conjugating a fixed diagonal sign
matrix with a matrix exponential,

    sigma(W) = exp(S(W)) Lambda exp(-S(W)),   S(W) = sum_k W_k B_k,

where the B_k form a basis of skew-Hermitian generators and Lambda is a
diagonal of +1/-1 entries. The number of -1 eigenvalues per observable
(the "signature") is the discrete invariant of the family; the W vector
is the continuous part.

Besides the generic builder, this module carries the structured
block-diagonal families used by the chain optimizers: two-by-two
rotation blocks stacked along the diagonal, with explicit per-class
diagonal layouts so that published parameter vectors reproduce the same
matrices entry for entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import expm

HERMITICITY_TOL = 1e-12
SPECTRUM_TOL = 1e-10

_SCENARIOS = {"222": 2, "322": 2, "232": 3}


@dataclass(frozen=True)
class Signature:
    """Counts of -1 eigenvalues, one entry per observable at a site."""

    minus_counts: tuple[int, ...]
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("local dimension must be positive")
        for n in self.minus_counts:
            if not 0 <= n <= self.dim:
                raise ValueError(
                    f"signature entry {n} outside [0, {self.dim}]")

    @property
    def n_settings(self) -> int:
        return len(self.minus_counts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.minus_counts)


def enumerate_signatures(d: int, n_settings: int) -> list[Signature]:
    """All (d+1)^n_settings signatures in lexicographic order."""
    if d < 1 or n_settings < 1:
        raise ValueError("d and n_settings must be positive")
    return [Signature(tuple(t), d)
            for t in product(range(d + 1), repeat=n_settings)]


def reference_diagonal(n_minus: int, d: int) -> np.ndarray:
    """Canonical +1/-1 diagonal with n_minus entries equal to -1.

    Layout: alternating (+1, -1) two-blocks first, then the leftover
    sign repeated. This makes the W=0 matrix coincide with the
    block-diagonal forms used by the structured families below.
    """
    if not 0 <= n_minus <= d:
        raise ValueError(f"n_minus={n_minus} outside [0, {d}]")
    pairs = min(n_minus, d - n_minus)
    diag: list[float] = []
    for _ in range(pairs):
        diag += [1.0, -1.0]
    leftover = -1.0 if n_minus > d - n_minus else 1.0
    diag += [leftover] * (d - 2 * pairs)
    return np.asarray(diag)


def skew_basis(d: int, kind: str = "real") -> list[np.ndarray]:
    """Orthogonal basis of skew-Hermitian generators.

    kind="real": the d(d-1)/2 real antisymmetric matrices E_ij - E_ji,
    upper triangle in row-major order, so W maps onto the upper
    triangle of S(W) one entry at a time.

    kind="full": the real antisymmetric set followed by the d(d-1)/2
    purely imaginary symmetric off-diagonal matrices i(E_ij + E_ji).
    """
    if d < 1:
        raise ValueError("d must be positive")
    if kind not in ("real", "full"):
        raise ValueError(f"unknown basis kind {kind!r}")
    basis: list[np.ndarray] = []
    for i in range(d):
        for j in range(i + 1, d):
            b = np.zeros((d, d), dtype=complex)
            b[i, j] = 1.0
            b[j, i] = -1.0
            basis.append(b)
    if kind == "full":
        for i in range(d):
            for j in range(i + 1, d):
                b = np.zeros((d, d), dtype=complex)
                b[i, j] = 1.0j
                b[j, i] = 1.0j
                basis.append(b)
    return basis


def n_parameters(d: int, kind: str = "real") -> int:
    """Length of the W vector for one observable."""
    m = d * (d - 1) // 2
    return m if kind == "real" else 2 * m


def generator(w: Sequence[float], d: int, kind: str = "real") -> np.ndarray:
    """S(W) = sum_k W_k B_k for the chosen basis."""
    basis = skew_basis(d, kind)
    w = np.asarray(w, dtype=float)
    if w.shape != (len(basis),):
        raise ValueError(
            f"expected {len(basis)} parameters for d={d} kind={kind!r}, "
            f"got {w.shape}")
    s = np.zeros((d, d), dtype=complex)
    for wk, bk in zip(w, basis):
        s += wk * bk
    return s


def build_observable(n_minus: int, d: int, w: Sequence[float],
                     kind: str = "real",
                     diagonal: Sequence[float] | None = None) -> np.ndarray:
    """exp(S(W)) Lambda exp(-S(W)) for the canonical (or given) Lambda."""
    lam = (reference_diagonal(n_minus, d) if diagonal is None
           else np.asarray(diagonal, dtype=float))
    if lam.shape != (d,):
        raise ValueError("diagonal layout has wrong length")
    if sorted(np.abs(lam)) != [1.0] * d or int(np.sum(lam < 0)) != n_minus:
        raise ValueError("diagonal layout inconsistent with signature")
    u = expm(generator(w, d, kind))
    sigma = u @ np.diag(lam) @ u.conj().T
    return sigma


def check_observable(sigma: np.ndarray, n_minus: int | None = None,
                     herm_tol: float = HERMITICITY_TOL,
                     spec_tol: float = SPECTRUM_TOL) -> None:
    """Raise unless sigma is Hermitian with +1/-1 spectrum (and the
    stated count of -1 eigenvalues, when given)."""
    sigma = np.asarray(sigma)
    if np.max(np.abs(sigma - sigma.conj().T)) > herm_tol:
        raise ValueError("observable is not Hermitian within tolerance")
    evals = np.linalg.eigvalsh(sigma)
    if np.max(np.abs(np.abs(evals) - 1.0)) > spec_tol:
        raise ValueError("observable spectrum is not +1/-1 within tolerance")
    if n_minus is not None and int(np.sum(evals < 0)) != n_minus:
        raise ValueError("wrong number of -1 eigenvalues")


# ---------------------------------------------------------------------------
# structured block families
# ---------------------------------------------------------------------------

def rotation_block(w: float) -> np.ndarray:
    """2x2 observable cos(2w)*Z-ish block:
    [[cos 2w, -sin 2w], [-sin 2w, -cos 2w]].

    Equals exp(S) diag(1,-1) exp(-S) with S = [[0, w], [-w, 0]].
    """
    c, s = np.cos(2.0 * w), np.sin(2.0 * w)
    return np.array([[c, -s], [-s, -c]])


def _blocks(*parts) -> np.ndarray:
    """Block-diagonal assembly; scalars become 1x1 blocks."""
    mats = [np.atleast_2d(np.asarray(p, dtype=float)) for p in parts]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    k = 0
    for m in mats:
        out[k:k + m.shape[0], k:k + m.shape[1]] = m
        k += m.shape[0]
    return out


_LAMBDA2 = np.diag([1.0, -1.0])
_I2 = np.eye(2)

# Explicit diagonal layouts for the three-observable classes. Keys are
# (d, variant); values are per-setting diagonals, in x, y, z order.
# These are a committed interface: published parameter tables assume
# exactly these layouts.
_LAYOUTS_232: dict[tuple[int, int], tuple[tuple[float, ...], ...]] = {
    (3, 1): ((1, -1, -1), (1, 1, -1), (1, 1, -1)),    # [2, 1, 1]
    (3, 2): ((1, -1, -1), (1, 1, -1), (1, -1, -1)),   # [2, 1, 2]
    (4, 1): ((1, -1, -1, -1), (1, 1, 1, -1), (1, 1, 1, -1)),    # [3, 1, 1]
    (4, 2): ((1, -1, -1, -1), (1, -1, 1, -1), (1, -1, -1, -1)),  # [3, 2, 3]
    (4, 3): ((1, -1, -1, -1), (1, -1, 1, -1), (1, 1, 1, -1)),   # [3, 2, 1]
    (4, 4): ((1, -1, 1, -1), (1, 1, 1, -1), (1, -1, 1, -1)),    # [2, 1, 2]
}


def structured_pair(scenario: str, d: int, w: Sequence[float],
                    variant: int = 1) -> tuple[np.ndarray, ...]:
    """Structured observables for one scenario class.

    Two-setting chains ("222", and "322" which shares the forms at
    d=2,4) get explicit two-by-two rotation-block families; the
    three-setting chain ("232") gets full exponential parametrizations
    over fixed per-class diagonal layouts. Returns one matrix per
    setting.
    """
    w = tuple(float(x) for x in np.atleast_1d(np.asarray(w, dtype=float)))

    def need(k: int) -> None:
        if len(w) != k:
            raise ValueError(
                f"class {scenario}/d={d}/variant {variant} takes {k} "
                f"parameters, got {len(w)}")

    if scenario in ("222", "322"):
        if scenario == "322" and d == 3:
            need(1)
            b = rotation_block(w[0])
            if variant == 1:   # [1, 2]
                return _blocks(_LAMBDA2, 1.0), _blocks(b, -1.0)
            if variant == 2:   # [1, 1]
                return _blocks(1.0, _LAMBDA2), _blocks(1.0, b)
            raise ValueError(f"unknown variant {variant} for 322 d=3")
        if scenario == "322" and d == 5:
            need(2)
            b1, b2 = rotation_block(w[0]), rotation_block(w[1])
            if variant == 1:   # [2, 2]
                return (_blocks(_LAMBDA2, _LAMBDA2, 1.0),
                        _blocks(b1, b2, 1.0))
            if variant == 2:   # [3, 3]
                return (_blocks(_LAMBDA2, _LAMBDA2, -1.0),
                        _blocks(b1, b2, -1.0))
            raise ValueError(f"unknown variant {variant} for 322 d=5")
        if variant != 1:
            raise ValueError(f"unknown variant {variant} for {scenario} d={d}")
        if d == 2:
            need(1)
            return _LAMBDA2.copy(), rotation_block(w[0])
        if d == 3:
            need(1)
            return _blocks(_LAMBDA2, -1.0), _blocks(rotation_block(w[0]), -1.0)
        if d == 4:
            need(2)
            return (_blocks(_LAMBDA2, _LAMBDA2),
                    _blocks(rotation_block(w[0]), rotation_block(w[1])))
        if d == 5:
            need(2)
            return (_blocks(_LAMBDA2, _LAMBDA2, 1.0),
                    _blocks(rotation_block(w[0]), rotation_block(w[1]), 1.0))
        if d == 6:
            need(3)
            return (_blocks(_LAMBDA2, _LAMBDA2, _LAMBDA2),
                    _blocks(*[rotation_block(x) for x in w]))
        raise ValueError(f"no structured class for {scenario} d={d}")

    if scenario == "232":
        if d == 2:
            need(2)
            return (-_I2.copy(), rotation_block(w[0]), rotation_block(w[1]))
        key = (d, variant)
        if key not in _LAYOUTS_232:
            raise ValueError(f"no structured class for 232 d={d} "
                             f"variant {variant}")
        m = n_parameters(d, "real")
        need(3 * m)
        layouts = _LAYOUTS_232[key]
        out = []
        for a, lam in enumerate(layouts):
            wa = w[a * m:(a + 1) * m]
            u = expm(generator(wa, d, "real"))
            out.append(u @ np.diag(np.asarray(lam, dtype=float)) @ u.conj().T)
        return tuple(out)

    raise ValueError(f"unknown scenario {scenario!r}")


def structured_signature(scenario: str, d: int, variant: int = 1) -> Signature:
    """Signature realized by structured_pair for the given class."""
    zeros = {
        "222": {2: 1, 3: 1, 4: 2, 5: 2, 6: 3},
        "322": {2: 1, 3: 1, 4: 2, 5: 2},
        "232": {2: 2},
    }[scenario].get(d)
    if zeros is None and scenario == "232":
        lam = _LAYOUTS_232[(d, variant)]
        return Signature(tuple(int(sum(1 for v in row if v < 0))
                               for row in lam), d)
    if zeros is None:
        raise ValueError(f"no structured class for {scenario} d={d}")
    w0 = [0.0] * zeros
    mats = structured_pair(scenario, d, w0, variant)
    return Signature(tuple(int(np.sum(np.linalg.eigvalsh(m) < 0))
                           for m in mats), d)


def n_structured_parameters(scenario: str, d: int, variant: int = 1) -> int:
    """Parameter count of the structured class."""
    if scenario in ("222", "322"):
        return {2: 1, 3: 1, 4: 2, 5: 2, 6: 3}[d]
    if scenario == "232":
        if d == 2:
            return 2
        return 3 * n_parameters(d, "real")
    raise ValueError(f"unknown scenario {scenario!r}")
