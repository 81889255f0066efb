"""Exact classical bounds of TI Bell functionals.

Over classical deterministic strategies the per-site value of a
functional is the mean edge weight of an infinite walk on a finite
strategy graph, so the classical bound is the minimum mean cycle of
that graph. Karp's dynamic program computes it exactly in rational
arithmetic.

Nodes are single-site setting assignments (+-1 per setting) for
nearest-neighbour functionals. Next-nearest-neighbour functionals use
ordered pairs of assignments as nodes, so that an edge
(s1, s2) -> (s2, s3) sees all three sites it needs.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from gmpy2 import mpq

from .functionals import BellFunctional


def _q(x: Fraction) -> mpq:
    return mpq(x.numerator, x.denominator)


def site_assignments(f: BellFunctional) -> list[tuple[int, ...]]:
    """All +-1 assignments to one site's settings, lexicographic."""
    return [tuple(v) for v in product((1, -1), repeat=len(f.settings))]


def _edge_tables(f: BellFunctional):
    """Strategy graph as (n_nodes, successor table).

    successors[u] is a list of (v, weight) pairs with mpq weights.
    """
    names = f.settings
    sites = site_assignments(f)
    one = [sum(_q(f.one_body(a)) * s[i] for i, a in enumerate(names))
           for s in sites]

    def pair_val(k: int, s, t) -> mpq:
        return sum(_q(f.pair(a, b, k)) * s[i] * t[j]
                   for i, a in enumerate(names)
                   for j, b in enumerate(names))

    if f.scenario != "322":
        succ = [[(v, one[u] + pair_val(1, sites[u], sites[v]))
                 for v in range(len(sites))]
                for u in range(len(sites))]
        return len(sites), succ

    # pair nodes (s1, s2); edge to (s2, s3) carries terms anchored at s1
    m = len(sites)
    nodes = [(i, j) for i in range(m) for j in range(m)]
    index = {node: k for k, node in enumerate(nodes)}
    succ = [[] for _ in nodes]
    for (i, j) in nodes:
        base = one[i]
        nn = pair_val(1, sites[i], sites[j])
        for k in range(m):
            w = base + nn + pair_val(2, sites[i], sites[k])
            succ[index[(i, j)]].append((index[(j, k)], w))
    return len(nodes), succ


def classical_bound(f: BellFunctional) -> Fraction:
    """Exact minimum mean cycle of the strategy graph (Karp)."""
    n, succ = _edge_tables(f)
    # d[k][v] = least weight of an exactly-k-edge walk from node 0
    d = [[None] * n for _ in range(n + 1)]
    d[0][0] = mpq(0)
    for k in range(1, n + 1):
        prev, cur = d[k - 1], d[k]
        for u in range(n):
            du = prev[u]
            if du is None:
                continue
            for v, w in succ[u]:
                cand = du + w
                if cur[v] is None or cand < cur[v]:
                    cur[v] = cand
    best = None
    for v in range(n):
        if d[n][v] is None:
            continue
        worst = None
        for k in range(n):
            if d[k][v] is None:
                continue
            ratio = (d[n][v] - d[k][v]) / (n - k)
            if worst is None or ratio > worst:
                worst = ratio
        if worst is not None and (best is None or worst < best):
            best = worst
    if best is None:
        raise RuntimeError("strategy graph has no reachable cycle")
    return Fraction(best.numerator, best.denominator)


def brute_force_periodic(f: BellFunctional, max_period: int) -> Fraction:
    """Minimum mean value over periodic strategies up to a period.

    Independent oracle for classical_bound: enumerates every cyclic
    assignment of period p <= max_period and averages the per-site
    value exactly. Converges to the classical bound once max_period
    covers the optimal cycle length.
    """
    if max_period < 1:
        raise ValueError("max_period must be positive")
    names = f.settings
    sites = site_assignments(f)
    one = {s: sum(_q(f.one_body(a)) * s[i] for i, a in enumerate(names))
           for s in sites}

    def pair_val(k, s, t):
        return sum(_q(f.pair(a, b, k)) * s[i] * t[j]
                   for i, a in enumerate(names)
                   for j, b in enumerate(names))

    distances = f.pair_distances
    best = None
    for p in range(1, max_period + 1):
        for config in product(sites, repeat=p):
            total = mpq(0)
            for i in range(p):
                total += one[config[i]]
                for k in distances:
                    total += pair_val(k, config[i], config[(i + k) % p])
            mean = total / p
            if best is None or mean < best:
                best = mean
    return Fraction(best.numerator, best.denominator)
