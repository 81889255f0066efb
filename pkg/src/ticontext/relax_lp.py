"""Exact lower bounds from the no-signaling relaxation with a
shift-invariance constraint.

A functional on a translation-invariant chain is bounded below by its
minimum over n-site no-signaling boxes whose (n-1)-site marginals are
shift invariant: every window of the infinite chain is such a marginal,
so the box minimum can only undercut the chain value. The bound improves
with n and the whole hierarchy is a linear program over the box
probabilities, solvable in exact rational arithmetic.

Binary observables make a Fourier picture natural: a no-signaling box
is equivalently described by correlators c(S, settings) over site
subsets S, with normalization and no-signaling holding identically.
Shift invariance then says c depends only on the shift class of
(S, settings), which shrinks the variable count from (2X)^n table
entries to about 2(X+1)^(n-1) class correlators while keeping the
feasible sets in exact bijection. The full probability table is
reconstructed from any class solution on demand, so solutions can be
checked against every table-level constraint exactly.

The solver tries a certified-basis path first: a floating point solve
proposes the active set, and exact linear algebra either proves it
optimal (primal and dual feasibility plus matching objectives, all in
rationals) or rejects it, in which case an exact Bland simplex takes
over.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog

from . import exactlp
from .functionals import BellFunctional, resolve

__all__ = [
    "NSBoxLP",
    "NSSolution",
    "build_ltins",
    "solve_exact",
    "solve_float",
    "fitted_sequence_check",
]

_MAX_TABLE = 2_000_000


# ---------------------------------------------------------------------------
# LP construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NSBoxLP:
    """LP data for the n-site no-signaling box with shift-invariant
    marginals.

    The box variables are the (2X)^n table probabilities
    P(a_1..a_n | x_1..x_n), row-indexed outcomes-major; internally the
    program runs over class correlators y, one per shift class of
    (subset, settings). M maps y to table space: table = (1 + M y)/2^n,
    which builds normalization and no-signaling in identically, leaving
    nonnegativity as the only inequality.
    """
    functional: BellFunctional
    n: int
    n_settings: int
    classes: tuple = field(repr=False)       # ((shape, settings), ...)
    M: np.ndarray = field(repr=False)        # (2X)^n rows x len(classes)
    objective: tuple = field(repr=False)     # mpq per class

    @property
    def n_outcome_tuples(self) -> int:
        return 2 ** self.n

    @property
    def n_setting_tuples(self) -> int:
        return self.n_settings ** self.n

    @property
    def n_table_variables(self) -> int:
        return (2 * self.n_settings) ** self.n

    @property
    def n_class_variables(self) -> int:
        return len(self.classes)

    @property
    def constraints(self) -> list[tuple[str, int]]:
        n, X = self.n, self.n_settings
        return [
            ("nonnegativity", self.n_table_variables),
            ("normalization", self.n_setting_tuples),
            ("no-signaling", n * (X - 1) * 2 ** (n - 1) * X ** (n - 1)),
            ("shift-invariance", (2 * X) ** (n - 1)),
        ]

    def row_index(self, outcomes, settings) -> int:
        """Table row for outcome tuple (entries +-1) and setting tuple
        (indices into the functional's settings)."""
        a = 0
        for v in outcomes:
            a = 2 * a + (0 if v == 1 else 1)
        x = 0
        for v in settings:
            x = self.n_settings * x + int(v)
        return a * self.n_setting_tuples + x

    def table(self, y) -> np.ndarray:
        """Exact probability table for class correlators y (rationals)."""
        y = [mpq(v) for v in y]
        den = 1
        for q in y:
            den = den * q.denominator // gcd(den, int(q.denominator))
        U = [int(q * den) for q in y]
        s = self.M.astype(object) @ np.asarray(U, dtype=object)
        scale = mpq(1, den * 2 ** self.n)
        return np.asarray([(den + int(v)) * scale for v in s], dtype=object)

    def check_box(self, table) -> dict[str, bool]:
        """Exact verdicts for every constraint group on a full table."""
        n, X = self.n, self.n_settings
        t = np.asarray(table, dtype=object)
        out = {"nonnegativity": all(v >= 0 for v in t)}
        A, Xn = 2 ** n, X ** n
        P = t.reshape(A, Xn)
        out["normalization"] = all(
            sum(P[a, x] for a in range(A)) == 1 for x in range(Xn))
        ok = True
        for i in range(n):
            src = np.arange(A)
            keep = (src >> (n - 1 - i)) & 1 == 0
            lo = src[keep]
            hi = lo | (1 << (n - 1 - i))
            xs = np.arange(Xn)
            digit = (xs // X ** (n - 1 - i)) % X
            base = xs[digit == 0]
            for v in range(1, X):
                other = base + v * X ** (n - 1 - i)
                for a0, a1 in zip(lo, hi):
                    for x0, x1 in zip(base, other):
                        if P[a0, x0] + P[a1, x0] != P[a0, x1] + P[a1, x1]:
                            ok = False
        out["no-signaling"] = ok
        ok = True
        for a in range(2 ** (n - 1)):
            for x in range(X ** (n - 1)):
                left = sum(P[(a << 1) | alast, x * X]
                           for alast in (0, 1))
                right = sum(P[(afirst << (n - 1)) | a, x]
                            for afirst in (0, 1))
                if left != right:
                    ok = False
        out["shift-invariance"] = ok
        return out

    def objective_of(self, y) -> Fraction:
        v = sum(cj * mpq(yj) for cj, yj in zip(self.objective, y))
        return Fraction(int(v.numerator), int(v.denominator))


def _class_keys(n: int, X: int):
    """Shift-class representatives: subsets anchored at site 0, with a
    setting per subset element."""
    keys = []
    for rest_size in range(n):
        for rest in itertools.combinations(range(1, n), rest_size):
            shape = (0,) + rest
            for xs in itertools.product(range(X), repeat=len(shape)):
                keys.append((shape, xs))
    return tuple(keys)


def build_ltins(f: BellFunctional, n: int) -> NSBoxLP:
    """Assemble the n-site LP for functional f.

    Requires n >= the functional's window (2, or 3 when next-nearest
    couplings are present); the objective reads the leading window's
    marginal, which shift invariance makes representative of every
    window.
    """
    f = resolve(f)
    if n < f.window:
        raise ValueError(f"n={n} is below the functional's "
                         f"window size {f.window}")
    X = len(f.settings)
    if (2 * X) ** n > _MAX_TABLE:
        raise ValueError(f"table with (2*{X})^{n} entries is too large")
    keys = _class_keys(n, X)
    col_of = {k: j for j, k in enumerate(keys)}

    A, Xn = 2 ** n, X ** n
    a_signs = np.empty((A, n), dtype=np.int64)
    for i in range(n):
        a_signs[:, i] = 1 - 2 * ((np.arange(A) >> (n - 1 - i)) & 1)
    x_dig = np.empty((Xn, n), dtype=np.int64)
    for i in range(n):
        x_dig[:, i] = (np.arange(Xn) // X ** (n - 1 - i)) % X

    M = np.zeros((A * Xn, len(keys)), dtype=np.int64)
    for j, (shape, xs) in enumerate(keys):
        span = shape[-1]
        col = np.zeros((A, Xn), dtype=np.int64)
        for t in range(n - span):
            sites = [s + t for s in shape]
            par = a_signs[:, sites].prod(axis=1)
            match = np.all(x_dig[:, sites] == np.asarray(xs), axis=1)
            col += np.outer(par, match.astype(np.int64))
        M[:, j] = col.ravel()

    setting_index = {name: i for i, name in enumerate(f.settings)}
    c = [mpq(0)] * len(keys)

    def add(shape, names, coupling):
        xs = tuple(setting_index[nm] for nm in names)
        c[col_of[(shape, xs)]] += mpq(coupling.numerator,
                                      coupling.denominator)

    for a in f.settings:
        add((0,), (a,), f.one_body(a))
    for dist in f.pair_distances:
        for a in f.settings:
            for b in f.settings:
                add((0, dist), (a, b), f.pair(a, b, dist))
    return NSBoxLP(functional=f, n=n, n_settings=X, classes=keys,
                   M=M, objective=tuple(c))


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

@dataclass
class NSSolution:
    value: Fraction
    correlators: dict                  # class key -> Fraction
    table: np.ndarray                  # exact probabilities, object dtype
    duals: list                        # multipliers on the tight rows
    basis: list                        # tight table rows certifying optimum
    method: str                        # "verified-basis" | "simplex"

    def __repr__(self) -> str:
        return (f"NSSolution(value={self.value}, method={self.method!r}, "
                f"basis={len(self.basis)} rows)")


def _float_solve(lp: NSBoxLP):
    c = np.asarray([float(q) for q in lp.objective])
    G = -lp.M.astype(np.float64)
    res = linprog(c, A_ub=G, b_ub=np.ones(G.shape[0]), method="highs",
                  bounds=[(None, None)] * lp.n_class_variables)
    if not res.success:
        raise RuntimeError(f"float presolve failed: {res.message}")
    return res


def solve_float(lp: NSBoxLP) -> float:
    """Floating point bound (no certificate); for table sizes where the
    exact path is too slow."""
    return float(_float_solve(lp).fun)


def _certify(lp: NSBoxLP, basis: list[int]):
    """Exact primal/dual check of a candidate active set.

    Returns (value, y, lam, table) or raises ValueError /
    exactlp.SingularMatrixError when the basis does not certify.
    """
    K = lp.n_class_variables
    G = -lp.M
    B = G[basis, :].T.astype(np.int64)         # K x K
    neg_c = [-q for q in lp.objective]
    lam = exactlp.solve_square(B, neg_c)
    if any(v < 0 for v in lam):
        raise ValueError("negative multiplier: basis not dual feasible")
    u = exactlp.solve_square(B.T, [1] * K)
    den = 1
    for q in u:
        den = den * q.denominator // gcd(den, int(q.denominator))
    U = [int(q * den) for q in u]
    u_max = max(abs(x) for x in U)
    if int(np.abs(lp.M).max()) * u_max * lp.M.shape[1] < 2 ** 62:
        # products cannot overflow, so plain integer BLAS is exact
        s = lp.M @ np.asarray(U, dtype=np.int64)
    else:
        s = lp.M.astype(object) @ np.asarray(U, dtype=object)
    if any(den + int(v) < 0 for v in s):
        raise ValueError("candidate box has a negative probability")
    value = sum(cj * uj for cj, uj in zip(lp.objective, u))
    if value != -sum(lam):
        raise ValueError("objective mismatch: basis not optimal")
    scale = mpq(1, den * 2 ** lp.n)
    table = np.asarray([(den + int(v)) * scale for v in s], dtype=object)
    return value, u, lam, table


def solve_exact(lp: NSBoxLP) -> NSSolution:
    """Certified rational minimum of the LP.

    A float solve proposes the tight rows; exact rational algebra either
    proves that active set optimal or falls back to an exact Bland
    simplex. Either way the returned value, box table and multipliers
    satisfy all optimality conditions in exact arithmetic.
    """
    res = _float_solve(lp)
    K = lp.n_class_variables
    G = -lp.M
    lam_f = -np.asarray(res.ineqlin.marginals)
    slack = np.asarray(res.ineqlin.residual)
    prio = np.lexsort((slack, -(lam_f > 1e-9).astype(int)))
    try:
        basis = exactlp.select_independent_columns(G.T, K, prio)
        value, y, lam, table = _certify(lp, sorted(basis))
        basis = sorted(basis)
        method = "verified-basis"
    except (ValueError, exactlp.SingularMatrixError):
        A = [[int(G[r, k]) for r in range(G.shape[0])] for k in range(K)]
        neg_c = [-q for q in lp.objective]
        res_x = exactlp.bland_simplex(A, neg_c, [1] * G.shape[0])
        if res_x.status != "optimal":
            raise RuntimeError(f"exact simplex: {res_x.status}")
        y = res_x.y
        value = sum(cj * yj for cj, yj in zip(lp.objective, y))
        if value != -res_x.value:
            raise RuntimeError("simplex duality check failed")
        lam = [res_x.x[r] for r in res_x.basis]
        table = lp.table(y)
        if any(v < 0 for v in table):
            raise RuntimeError("simplex box has a negative probability")
        basis = list(res_x.basis)
        method = "simplex"
    corr = {k: Fraction(int(v.numerator), int(v.denominator))
            for k, v in zip(lp.classes, y)}
    return NSSolution(
        value=Fraction(int(value.numerator), int(value.denominator)),
        correlators=corr, table=table,
        duals=lam, basis=basis, method=method)


# ---------------------------------------------------------------------------
# the fitted sequence
# ---------------------------------------------------------------------------

def fitted_sequence_check(values: Mapping[int, object]) -> dict:
    """Residuals of bound values against -2 - 4/(n^2 - 3n + 6).

    Exact zero residual means the value sits on the fitted curve as a
    rational identity, not merely within tolerance.
    """
    out = {}
    for n, v in sorted(values.items()):
        fit = Fraction(-2) - Fraction(4, n * n - 3 * n + 6)
        if isinstance(v, float):
            resid = v - float(fit)
            out[n] = {"residual": resid, "exact": resid == 0.0}
        else:
            resid = Fraction(v) - fit
            out[n] = {"residual": resid, "exact": resid == 0}
    return out
