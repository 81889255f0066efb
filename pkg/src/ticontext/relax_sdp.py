"""Certified quantum lower bounds from moment-matrix relaxations.

The relaxation at level (n, 1) works on a window of n consecutive
sites. Monomials are all products with at most one measurement
operator per site (identity allowed), so there are (1 + X)^n of them
for X settings. The moment matrix Gamma over this index has entries
Gamma_{ab} = <m_a m_b>; any translation-invariant state of the chain,
measured with binary observables of unit square, produces such a
matrix that is positive semidefinite, has unit diagonal, and whose
entries depend only on an equivalence class of the entry's operator
word. The classes identify entries equal by Hermitian conjugation,
commutation across sites, sigma^2 = I within a site, and shifts of
the whole word along the chain. Minimizing the functional's energy
density over assignments of one real variable per class therefore
lower-bounds the energy density of every such model.

Two reductions keep the program small and real:

* Taking real parts is lossless. Conjugating a feasible moment
  matrix entrywise gives another feasible one (it is the transpose),
  and the objective only reads single-site and cross-site moments,
  which are real. The average of the two is feasible with the same
  objective, so one real variable per conjugation class suffices and
  no complex-to-real doubling is needed.

* Observables with spectrum in [-1, 1] that square to less than the
  identity (measurement effects rather than projective observables)
  are covered as well: the standard unitary dilation reproduces
  their single-site and cross-site moments with unit-square
  observables on a doubled local dimension, and appending the
  ancilla sitewise keeps the state translation invariant. The bound
  computed here therefore applies to every model the optimizers in
  this package search over.

The solve path uses a first-order conic solver. Its inexact dual is
turned into a rigorous bound by projecting the dual matrix onto the
positive cone and charging each stationarity residual against the
a-priori bound |moment| <= 1, so the reported certificate is valid
independently of solver tolerance.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from .functionals import BellFunctional, resolve

__all__ = [
    "MonomialIndex",
    "MomentSDP",
    "SDPResult",
    "build_ltinpa",
    "solve_sdp",
]

# one moment matrix entry, written as a word over the window's sites:
# None marks a site acting trivially, ('s', a) a single operator with
# setting a, ('p', a, b) the ordered same-site product sigma_a sigma_b
Letter = Optional[tuple]
Word = tuple

# (1 + X)^n past this size makes the entry table and the cone
# projection impractically large
_MAX_MATRIX = 3000


def _entry_letter(la: int, lb: int) -> Letter:
    """Per-site letter of the product m_a m_b.

    Site letters 0 mean identity, k > 0 the observable with setting
    index k - 1. Equal letters cancel because sigma^2 = I.
    """
    if la == lb:
        return None
    if la == 0:
        return ("s", lb - 1)
    if lb == 0:
        return ("s", la - 1)
    return ("p", la - 1, lb - 1)


def _entry_word(alpha: Sequence[int], beta: Sequence[int]) -> Optional[Word]:
    """Word of the entry (alpha, beta), shift-anchored, or None if it
    reduces to the identity."""
    letters = [_entry_letter(la, lb) for la, lb in zip(alpha, beta)]
    support = [i for i, x in enumerate(letters) if x is not None]
    if not support:
        return None
    return tuple(letters[support[0]:support[-1] + 1])


def _conjugate_word(word: Word) -> Word:
    """Hermitian conjugate of a word. Only same-site products react;
    their factors swap order."""
    return tuple(("p", x[2], x[1]) if x is not None and x[0] == "p" else x
                 for x in word)


def _canonical_word(word: Word) -> Word:
    """Representative of the conjugation class; the two orderings of a
    same-site product carry the same real part."""
    return min(word, _conjugate_word(word))


@dataclass(frozen=True)
class MonomialIndex:
    """Ordered monomial list for a level-(n, 1) moment matrix.

    Monomials are tuples over the window's sites; entry 0 keeps the
    site idle and entry k > 0 places the observable with setting
    index k - 1 there. The list enumerates every such tuple, identity
    first, in lexicographic order.
    """

    n: int
    n_settings: int
    monomials: tuple[tuple[int, ...], ...]

    @classmethod
    def level_one(cls, n: int, n_settings: int) -> "MonomialIndex":
        monos = tuple(itertools.product(range(n_settings + 1), repeat=n))
        return cls(n=n, n_settings=n_settings, monomials=monos)

    @property
    def size(self) -> int:
        return len(self.monomials)

    def entry_word(self, i: int, j: int) -> Optional[Word]:
        """Canonical class of entry (i, j); None on the diagonal and
        wherever the operator word cancels to the identity."""
        w = _entry_word(self.monomials[i], self.monomials[j])
        return None if w is None else _canonical_word(w)

    def classes(self) -> dict:
        """All entry classes, mapped to contiguous variable indices."""
        out: dict = {}
        for alpha, beta in itertools.combinations(self.monomials, 2):
            w = _entry_word(alpha, beta)
            if w is None:
                continue
            out.setdefault(_canonical_word(w), len(out))
        return out


@dataclass(frozen=True)
class MomentSDP:
    """Moment-matrix program min c.y s.t. Gamma(y) >= 0.

    Gamma(y) = I + sum_k y_k A_k where A_k collects the entries whose
    word falls in class k; stored row-major flattened as the sparse
    map P with Gamma(y).ravel() = P y + vec(I). All diagonal entries
    are pinned to one (every monomial squares to the identity), and
    the matrix is symmetric by construction because an entry and its
    transpose share a class.
    """

    functional: BellFunctional
    index: MonomialIndex
    classes: dict
    P: sp.csr_matrix
    objective: np.ndarray

    @property
    def size(self) -> int:
        return self.index.size

    @property
    def n_class_variables(self) -> int:
        return len(self.classes)

    def gamma(self, y: np.ndarray) -> np.ndarray:
        """Moment matrix for a class assignment."""
        N = self.size
        return (self.P @ np.asarray(y, dtype=float)).reshape(N, N) + np.eye(N)

    def objective_of(self, y: np.ndarray) -> float:
        return float(self.objective @ np.asarray(y, dtype=float))


def _objective_vector(f: BellFunctional, n: int, anchor: int,
                      classes: dict) -> np.ndarray:
    """Energy density of f in class coordinates.

    The anchor picks which window site the functional's first site
    lands on; shift anchoring of the classes makes the choice
    immaterial, which is exactly the translation invariance being
    imposed.
    """
    c = np.zeros(len(classes))

    def add(word: Word, coeff: Fraction) -> None:
        full = (None,) * anchor + word
        if len(full) > n:
            raise ValueError(
                f"anchor {anchor} pushes a {len(word)}-site term past the "
                f"{n}-site window")
        c[classes[_canonical_word(word)]] += float(coeff)

    for ia, a in enumerate(f.settings):
        coeff = f.one_body(a)
        if coeff:
            add((("s", ia),), coeff)
    for dist in f.pair_distances:
        for ia, a in enumerate(f.settings):
            for ib, b in enumerate(f.settings):
                coeff = f.pair(a, b, dist)
                if coeff:
                    add((("s", ia),) + (None,) * (dist - 1) + (("s", ib),),
                        coeff)
    return c


def build_ltinpa(f: Union[BellFunctional, str], n: int, s: int = 1, *,
                 anchor: int = 0) -> MomentSDP:
    """Assemble the level-(n, s) moment program for a functional.

    Only s = 1 (at most one operator per site) is implemented; higher
    levels raise. The anchor shifts where in the window the
    functional's terms are read and must leave room for them; the
    resulting program is identical for every valid anchor.
    """
    if s != 1:
        raise ValueError(f"relaxation order s={s} is not supported (only s=1)")
    f = resolve(f)
    if n < f.window:
        raise ValueError(f"window of {n} sites cannot hold a {f.window}-site "
                         f"functional")
    if anchor < 0:
        raise ValueError("anchor must be nonnegative")
    X = len(f.settings)
    index = MonomialIndex.level_one(n, X)
    if index.size > _MAX_MATRIX:
        raise ValueError(
            f"moment matrix of size {index.size} exceeds the supported "
            f"maximum of {_MAX_MATRIX}; lower n")

    N = index.size
    classes: dict = {}
    rows = []
    cols = []
    kidx = []
    for r, alpha in enumerate(index.monomials):
        for q, beta in enumerate(index.monomials):
            if r == q:
                continue
            w = _entry_word(alpha, beta)
            if w is None:
                continue
            k = classes.setdefault(_canonical_word(w), len(classes))
            rows.append(r * N + q)
            cols.append(k)
            kidx.append(1.0)
    P = sp.coo_matrix((kidx, (rows, cols)),
                      shape=(N * N, len(classes))).tocsr()
    c = _objective_vector(f, n, anchor, classes)
    return MomentSDP(functional=f, index=index, classes=classes, P=P,
                     objective=c)


@dataclass(frozen=True)
class SDPResult:
    """Solve outcome. certified is a rigorous lower bound on the
    program's value regardless of solver accuracy; gap measures how
    far the solver's primal sits above it."""

    primal: float
    dual: float
    certified: float
    gap: float
    size: int
    status: str


def _certified_bound(sdp: MomentSDP, Z: np.ndarray) -> tuple[float, float]:
    """Rigorous bound from an approximate dual matrix.

    For any Z' >= 0 and any feasible y (all |y_k| <= 1, since every
    monomial has operator norm one):

        c.y = tr(Z' Gamma(y)) - tr(Z') + sum_k (c_k - tr(A_k Z')) y_k
            >= -tr(Z') - sum_k |c_k - tr(A_k Z')|

    Returns (certified bound, plain dual objective -tr(Z)).
    """
    Z = np.asarray(Z, dtype=float)
    Z = (Z + Z.T) / 2
    # the solver's sign convention for the cone dual is checked, not
    # assumed: the correct sign makes the stationarity residual small
    r_plus = sdp.objective - sdp.P.T @ Z.ravel()
    r_minus = sdp.objective + sdp.P.T @ Z.ravel()
    if np.linalg.norm(r_minus) < np.linalg.norm(r_plus):
        Z = -Z
    w, v = np.linalg.eigh(Z)
    Zp = (v * np.clip(w, 0.0, None)) @ v.T
    residual = sdp.objective - sdp.P.T @ Zp.ravel()
    certified = -float(np.trace(Zp)) - float(np.abs(residual).sum())
    return certified, -float(np.trace(Z))


def solve_sdp(sdp: MomentSDP, tol: float = 1e-7, *,
              max_iters: int = 200_000,
              verbose: bool = False) -> SDPResult:
    """Solve the moment program and certify the result.

    The primal and dual values come from the conic solver; certified
    is the projected-dual bound, valid even when the solver stops
    early (in which case a warning is issued and the best certificate
    obtained is returned).
    """
    N = sdp.size
    y = cp.Variable(sdp.n_class_variables)
    gamma = cp.reshape(sdp.P @ y + np.eye(N).ravel(), (N, N), order="C")
    constraint = gamma >> 0
    problem = cp.Problem(cp.Minimize(sdp.objective @ y), [constraint])
    problem.solve(solver=cp.SCS, eps=tol, max_iters=max_iters,
                  use_indirect=True, verbose=verbose)

    status = problem.status
    if constraint.dual_value is None:
        raise RuntimeError(f"no dual iterate returned (status {status})")
    certified, dual = _certified_bound(sdp, constraint.dual_value)
    primal = float(problem.value)
    if status != cp.OPTIMAL:
        warnings.warn(
            f"solver stopped with status {status}; returning the best "
            f"certified bound obtained", RuntimeWarning, stacklevel=2)
    return SDPResult(primal=primal, dual=dual, certified=certified,
                     gap=primal - certified, size=N, status=status)
