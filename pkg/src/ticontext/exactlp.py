"""Exact rational linear algebra and a small exact simplex solver.

Everything here works over gmpy2 rationals (mpq), so results carry no
floating point error at all: solutions to linear systems are exact and
the simplex solver certifies optima as honest fractions.

Square systems with integer coefficients are solved through a modular
(CRT) path: eliminate mod a few 31-bit primes with vectorized numpy
integer arithmetic, reconstruct rational entries, then verify the
candidate exactly. That is orders of magnitude faster than rational
elimination once matrices reach a few hundred rows, while the final
verification keeps it exact. Rational elimination remains as the
general fallback.

The simplex is a dense two-phase revised method with Bland's rule, for
problems in standard form

    min c.x   s.t.  A x = b,  x >= 0.

It is deliberately simple; callers that can guess a basis from a
floating point solve should verify it with verify_basis first and use
the simplex only when the guess fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from gmpy2 import isqrt, mpq, mpz

__all__ = [
    "SingularMatrixError",
    "SimplexResult",
    "solve_square",
    "select_independent_columns",
    "verify_basis",
    "bland_simplex",
]


class SingularMatrixError(ValueError):
    pass


# 31-bit primes for the modular path; products of two residues fit
# comfortably in int64. The cache grows on demand, so denominators of
# any size can be reconstructed.
_PRIMES = [2147483647, 2147483629, 2147483587, 2147483579, 2147483563,
           2147483549, 2147483543, 2147483497, 2147483489, 2147483477,
           2147483423, 2147483399, 2147483353, 2147483323, 2147483269,
           2147483249, 2147483237, 2147483179, 2147483171, 2147483137,
           2147483123, 2147483077, 2147483069, 2147483059, 2147483053,
           2147483033, 2147483029, 2147482951, 2147482949, 2147482943,
           2147482937, 2147482921, 2147482877, 2147482873, 2147482867,
           2147482859, 2147482819, 2147482817, 2147482811, 2147482801]


def _is_prime_31(n: int) -> bool:
    # Miller-Rabin with bases 2, 3, 5, 7 is deterministic below
    # 3 215 031 751, which covers every 31-bit candidate
    if n < 11:
        return n in (2, 3, 5, 7)
    if n % 2 == 0:
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_stream():
    """Yields 31-bit primes, largest first, extending past the cache."""
    yield from _PRIMES
    n = _PRIMES[-1] - 2
    while n > 1 << 30:
        if _is_prime_31(n):
            _PRIMES.append(n)
            yield n
        n -= 2
    raise SingularMatrixError("prime pool exhausted")


def _q(x):
    return mpq(int(x)) if isinstance(x, np.integer) else mpq(x)


def _as_mpq_vector(v) -> list:
    return [_q(x) for x in v]


# ---------------------------------------------------------------------------
# exact square solves
# ---------------------------------------------------------------------------

def _solve_rational(M, rhs) -> list:
    """Gaussian elimination over mpq; M is consumed as lists of rows."""
    m = len(M)
    a = [[_q(x) for x in row] + [_q(rhs[i])] for i, row in enumerate(M)]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular system")
        a[col], a[piv] = a[piv], a[col]
        prow = a[col]
        inv = 1 / prow[col]
        for j in range(col, m + 1):
            prow[j] *= inv
        for r in range(m):
            if r == col:
                continue
            f = a[r][col]
            if f:
                row = a[r]
                for j in range(col, m + 1):
                    row[j] -= f * prow[j]
    return [a[i][m] for i in range(m)]


def _solve_mod_p(M: np.ndarray, rhs: np.ndarray, p: int) -> np.ndarray | None:
    """Solve M x = rhs over GF(p); None if M is singular mod p."""
    m = M.shape[0]
    a = np.concatenate([M % p, rhs.reshape(m, 1) % p], axis=1)
    for col in range(m):
        nz = np.nonzero(a[col:, col])[0]
        if nz.size == 0:
            return None
        piv = col + int(nz[0])
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
        inv = pow(int(a[col, col]), -1, p)
        a[col] = (a[col] * inv) % p
        f = a[:, col].copy()
        f[col] = 0
        a = (a - np.outer(f, a[col])) % p
    return a[:, m]


def _rational_reconstruct(r: int, M: int):
    """Find p/q = r (mod M) with |p|, q <= sqrt(M/2), or None."""
    bound = isqrt(mpz(M // 2))
    v0, v1 = mpz(M), mpz(r % M)
    s0, s1 = mpz(0), mpz(1)
    while v1 > bound:
        q = v0 // v1
        v0, v1 = v1, v0 - q * v1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        v1, s1 = -v1, -s1
    return mpq(v1, s1)


def _solve_modular(M: np.ndarray, rhs_num: list, rhs_den: int) -> list:
    """Exact solve of (integer M) x = rhs_num / rhs_den by CRT lifting.

    Residues are accumulated prime by prime; reconstruction is attempted
    early and the winner verified exactly, so well-conditioned answers
    (small denominators) cost only a couple of primes.
    """
    m = M.shape[0]
    Mint = [[int(x) for x in row] for row in M.tolist()]
    used = 0
    crt: list[int] | None = None
    mod = 1
    skipped = 0
    checkpoint = 2
    for p in _prime_stream():
        r = np.asarray([n % p for n in rhs_num], dtype=np.int64)
        sol = _solve_mod_p(M.astype(np.int64), r, p)
        if sol is None:
            skipped += 1
            if skipped >= 3:
                raise SingularMatrixError("singular for several primes")
            continue
        if crt is None:
            crt = [int(x) for x in sol]
            mod = p
        else:
            # lift: x = a + M*t with t = (b - a)/M mod p
            minv = pow(mod % p, -1, p)
            crt = [a + mod * (((int(b) - a) * minv) % p)
                   for a, b in zip(crt, sol.tolist())]
            mod *= p
        used += 1
        if used >= checkpoint:
            checkpoint = used + max(2, used // 2)
            cand = [_rational_reconstruct(x, mod) for x in crt]
            if any(c is None for c in cand):
                continue
            x = [c / rhs_den for c in cand]
            ok = all(
                sum(Mint[i][j] * x[j] for j in range(m) if Mint[i][j])
                == mpq(rhs_num[i], rhs_den)
                for i in range(m))
            if ok:
                return x


def solve_square(M, rhs) -> list:
    """Exact solution of a square linear system; entries may be int,
    Fraction or mpq. Raises SingularMatrixError when rank-deficient."""
    m = len(M)
    arr = np.asarray(M, dtype=object)
    ints = all(isinstance(x, (int, np.integer)) for x in arr.ravel().tolist())
    if ints and m >= 40:
        num = [_q(x) for x in rhs]
        den = 1
        for q in num:
            den = den * int(q.denominator) // gcd(den, int(q.denominator))
        rhs_num = [int(q * den) for q in num]
        try:
            return _solve_modular(np.asarray(M, dtype=np.int64),
                                  rhs_num, den)
        except SingularMatrixError:
            raise
        except OverflowError:
            pass
    return _solve_rational([list(row) for row in M], list(rhs))


# primes small enough that a length-m dot product of residues stays
# exactly representable in float64 (m * p^2 < 2^53 up to m ~ 2e6),
# letting BLAS do the modular reductions
_SELECT_PRIMES = (65521, 65519, 65497)


def select_independent_columns(cols: np.ndarray, m: int,
                               order) -> list[int]:
    """Greedy maximal-rank column subset, scanned in the given order.

    Rank decisions are made mod a small prime. Columns independent mod
    p are independent over the rationals, so the selection is always
    sound; at worst a mod-p coincidence (probability ~m/p per column)
    skips a usable column, which the retry primes and the caller's
    exact verification absorb.
    """
    first_error: SingularMatrixError | None = None
    for p in _SELECT_PRIMES:
        try:
            return _select_columns_mod(cols, m, order, p)
        except SingularMatrixError as exc:
            first_error = first_error or exc
    raise first_error


def _select_columns_mod(cols: np.ndarray, m: int, order, p: int
                        ) -> list[int]:
    # rows of R are kept fully reduced with unit pivots, so reducing a
    # candidate is a single exact float64 matvec
    R = np.zeros((m, m))
    piv = np.zeros(m, dtype=np.intp)
    chosen: list[int] = []
    k = 0
    for j in order:
        v = np.asarray(cols[:, j] % p, dtype=np.float64)
        if k:
            coef = v[piv[:k]]
            if coef.any():
                v = (v - coef @ R[:k]) % p
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        lead = int(nz[0])
        v = (v * float(pow(int(v[lead]), -1, p))) % p
        if k:
            col = R[:k, lead].copy()
            if col.any():
                R[:k] = (R[:k] - np.outer(col, v)) % p
        R[k] = v
        piv[k] = lead
        chosen.append(int(j))
        k += 1
        if k == m:
            return chosen
    raise SingularMatrixError(f"rank {k} < {m}")


# ---------------------------------------------------------------------------
# simplex
# ---------------------------------------------------------------------------

@dataclass
class SimplexResult:
    status: str            # "optimal" | "infeasible" | "unbounded"
    value: object          # mpq
    x: list                # primal solution, length n
    basis: list            # basic column indices
    y: list                # duals, length m


def verify_basis(A_cols, b, c, basis) -> SimplexResult:
    """Certify a candidate optimal basis for min c.x, Ax=b, x>=0.

    A_cols must yield column j as an indexable of length m. Raises
    SingularMatrixError for a rank-deficient basis and ValueError when
    the basis is primal or dual infeasible; on success the result is a
    proved optimum (all checks exact).
    """
    m = len(b)
    B = [[A_cols[j][i] for j in basis] for i in range(m)]
    xB = solve_square(B, b)
    if any(x < 0 for x in xB):
        raise ValueError("basis is primal infeasible")
    Bt = [[B[i][j] for i in range(m)] for j in range(m)]
    y = solve_square(Bt, [c[j] for j in basis])
    for j in range(len(c)):
        if j in basis:
            continue
        col = A_cols[j]
        rc = c[j] - sum(yi * col[i] for i, yi in enumerate(y) if col[i])
        if rc < 0:
            raise ValueError("basis is dual infeasible")
    x = [mpq(0)] * len(c)
    for i, j in enumerate(basis):
        x[j] = xB[i]
    val = sum(c[j] * x[j] for j in basis)
    return SimplexResult("optimal", val, x, list(basis), y)


def _pivot(Binv, xB, d, r):
    """Update the explicit basis inverse after column d enters in row r."""
    m = len(xB)
    dr = d[r]
    Binv[r] = [v / dr for v in Binv[r]]
    xB[r] = xB[r] / dr
    row_r = Binv[r]
    xr = xB[r]
    for i in range(m):
        if i == r:
            continue
        f = d[i]
        if f:
            Bi = Binv[i]
            for j in range(m):
                Bi[j] -= f * row_r[j]
            xB[i] -= f * xr


def _phase(A_cols, c, basis, Binv, xB, *, forbid=()) -> str:
    """Run Bland-rule iterations in place; returns 'optimal'/'unbounded'."""
    m = len(xB)
    n = len(c)
    forbid = set(forbid)
    while True:
        cB = [c[j] for j in basis]
        y = [sum(cB[i] * Binv[i][k] for i in range(m)) for k in range(m)]
        enter = -1
        in_basis = set(basis)
        for j in range(n):
            if j in in_basis or j in forbid:
                continue
            col = A_cols[j]
            rc = c[j] - sum(y[i] * col[i] for i in range(m) if col[i])
            if rc < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        col = A_cols[enter]
        d = [sum(Binv[i][k] * col[k] for k in range(m) if col[k])
             for i in range(m)]
        ratio = None
        r = -1
        for i in range(m):
            if d[i] > 0:
                t = xB[i] / d[i]
                if ratio is None or t < ratio or \
                        (t == ratio and basis[i] < basis[r]):
                    ratio, r = t, i
        if r < 0:
            return "unbounded"
        _pivot(Binv, xB, d, r)
        basis[r] = enter


def bland_simplex(A, b, c) -> SimplexResult:
    """Two-phase exact simplex for min c.x s.t. A x = b, x >= 0.

    A is a dense matrix (rows of int/Fraction/mpq). Bland's rule keeps
    it cycle-free; expect it to be slow on large instances, it exists as
    the certified fallback behind verify_basis.
    """
    m, n = len(A), len(c)
    rows = [[_q(x) for x in row] for row in A]
    b = _as_mpq_vector(b)
    c = _as_mpq_vector(c)
    flipped = [False] * m
    for i in range(m):
        if b[i] < 0:
            rows[i] = [-x for x in rows[i]]
            b[i] = -b[i]
            flipped[i] = True
    # column access view including artificials
    art = [[mpq(1) if i == k else mpq(0) for i in range(m)]
           for k in range(m)]

    class _Cols:
        def __getitem__(self, j):
            if j < n:
                return [rows[i][j] for i in range(m)]
            return art[j - n]

    cols = _Cols()
    basis = list(range(n, n + m))
    Binv = [[mpq(1) if i == k else mpq(0) for k in range(m)]
            for i in range(m)]
    xB = list(b)
    c1 = [mpq(0)] * n + [mpq(1)] * m
    st = _phase(cols, c1, basis, Binv, xB)
    if st != "optimal" or sum(xB[i] for i, j in enumerate(basis)
                              if j >= n) != 0:
        return SimplexResult("infeasible", mpq(0), [], basis, [])
    # drive leftover artificials out of the basis (they sit at zero)
    for i in range(m):
        if basis[i] >= n:
            repl = -1
            for j in range(n):
                if j in basis:
                    continue
                col = cols[j]
                dij = sum(Binv[i][k] * col[k] for k in range(m) if col[k])
                if dij != 0:
                    repl = j
                    break
            if repl >= 0:
                col = cols[repl]
                d = [sum(Binv[r][k] * col[k] for k in range(m) if col[k])
                     for r in range(m)]
                _pivot(Binv, xB, d, i)
                basis[i] = repl
            # an all-zero row is a redundant constraint; the artificial
            # stays basic at level zero and never re-enters
    c2 = c + [mpq(0)] * m
    st = _phase(cols, c2, basis, Binv, xB, forbid=range(n, n + m))
    if st == "unbounded":
        return SimplexResult("unbounded", mpq(0), [], basis, [])
    x = [mpq(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = xB[i]
    val = sum(c[j] * x[j] for j in range(n))
    cB = [c2[j] for j in basis]
    y = [sum(cB[i] * Binv[i][k] for i in range(m)) for k in range(m)]
    # duals refer to the sign-corrected rows; map back to the caller's
    y = [-v if flipped[k] else v for k, v in enumerate(y)]
    return SimplexResult("optimal", val, x,
                         [j for j in basis if j < n], y)
