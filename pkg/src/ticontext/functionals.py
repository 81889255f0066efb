"""Translation-invariant Bell functionals and the bundled catalog.

A functional is a set of rational couplings on one- and two-site
correlators of a translation-invariant chain. Three scenario layouts
exist:

    "222"  two settings per site, nearest-neighbour pairs
    "322"  two settings, nearest and next-nearest neighbour pairs
    "232"  three settings per site, nearest-neighbour pairs

The same couplings serve double duty: contracted with observables they
give the local Hamiltonian term whose ground energy density is the
variational value; contracted with a correlator vector they give the
functional value of a behaviour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

SETTINGS = {"222": ("x", "y"), "322": ("x", "y"), "232": ("x", "y", "z")}

WINDOW = {"222": 2, "322": 3, "232": 2}


def _slots(scenario: str) -> tuple[str, ...]:
    names = SETTINGS[scenario]
    slots = ["J" + a for a in names]
    if scenario == "322":
        slots += ["J" + a + b + "AB" for a in names for b in names]
        slots += ["J" + a + b + "AC" for a in names for b in names]
    else:
        slots += ["J" + a + b for a in names for b in names]
    return tuple(slots)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean coupling")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if x != int(x):
            raise TypeError(
                f"non-integral float coupling {x!r}; use a 'p/q' string")
        return Fraction(int(x))
    raise TypeError(f"cannot interpret coupling {x!r}")


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Rational couplings of one TI Bell functional."""

    scenario: str
    couplings: Mapping[str, Fraction]
    classical_bound: Fraction | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if self.scenario not in SETTINGS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        slots = _slots(self.scenario)
        given = dict(self.couplings)
        unknown = set(given) - set(slots)
        if unknown:
            raise ValueError(f"unknown coupling keys {sorted(unknown)}")
        full = {k: _to_fraction(given.get(k, 0)) for k in slots}
        object.__setattr__(self, "couplings", full)
        if self.classical_bound is not None:
            object.__setattr__(self, "classical_bound",
                               _to_fraction(self.classical_bound))

    @property
    def settings(self) -> tuple[str, ...]:
        return SETTINGS[self.scenario]

    @property
    def window(self) -> int:
        """Number of consecutive sites the functional reads."""
        return WINDOW[self.scenario]

    def one_body(self, a: str) -> Fraction:
        return self.couplings["J" + a]

    def pair(self, a: str, b: str, distance: int = 1) -> Fraction:
        if self.scenario == "322":
            tag = {1: "AB", 2: "AC"}[distance]
            return self.couplings["J" + a + b + tag]
        if distance != 1:
            raise KeyError(f"scenario {self.scenario} has no "
                           f"distance-{distance} couplings")
        return self.couplings["J" + a + b]

    @property
    def pair_distances(self) -> tuple[int, ...]:
        return (1, 2) if self.scenario == "322" else (1,)

    def __repr__(self) -> str:
        name = self.label or self.scenario
        nz = {k: str(v) for k, v in self.couplings.items() if v}
        return f"BellFunctional({name}, {nz}, L={self.classical_bound})"


# ---------------------------------------------------------------------------
# catalog and file I/O
# ---------------------------------------------------------------------------

def _functional_from_record(rec: dict, label: str | None) -> BellFunctional:
    extra = set(rec) - {"scenario", "couplings", "classical_bound"}
    if extra:
        raise ValueError(f"unknown functional fields {sorted(extra)}")
    return BellFunctional(
        scenario=rec["scenario"],
        couplings={k: _to_fraction(v) for k, v in rec["couplings"].items()},
        classical_bound=(None if rec.get("classical_bound") is None
                         else _to_fraction(rec["classical_bound"])),
        label=label,
    )


@lru_cache(maxsize=1)
def catalog() -> dict[str, BellFunctional]:
    """The bundled functionals, keyed 'scenario/row'."""
    raw = json.loads(resources.files("ticontext.data")
                     .joinpath("catalog.json").read_text())
    return {key: _functional_from_record(rec, key)
            for key, rec in raw["entries"].items()}


def catalog_entry(key: str) -> BellFunctional:
    try:
        return catalog()[key]
    except KeyError:
        raise KeyError(
            f"no catalog entry {key!r}; known ids look like "
            f"'222/1', '322/1'..'322/63', '232/1'..'232/5'") from None


@lru_cache(maxsize=1)
def reference_values() -> dict:
    """Bundled reference results used by the reproduce command."""
    return json.loads(resources.files("ticontext.data")
                      .joinpath("reference_values.json").read_text())


def load_functional(path: str | Path) -> BellFunctional:
    """Read a functional from a JSON file.

    Schema: {"scenario": "322", "couplings": {"Jx": -11, ...},
    "classical_bound": -8}. Couplings may be integers or "p/q" strings;
    omitted slots are zero.
    """
    rec = json.loads(Path(path).read_text())
    return _functional_from_record(rec, Path(path).stem)


def save_functional(f: BellFunctional, path: str | Path) -> None:
    def enc(x: Fraction):
        return int(x) if x.denominator == 1 else str(x)

    rec = {
        "scenario": f.scenario,
        "couplings": {k: enc(v) for k, v in f.couplings.items() if v},
        "classical_bound": (None if f.classical_bound is None
                            else enc(f.classical_bound)),
    }
    Path(path).write_text(json.dumps(rec, indent=1) + "\n")


def resolve(selector: str | Path | BellFunctional) -> BellFunctional:
    """Catalog id, JSON file path, or an already-built functional."""
    if isinstance(selector, BellFunctional):
        return selector
    s = str(selector)
    if s in catalog():
        return catalog()[s]
    p = Path(s)
    if p.exists():
        return load_functional(p)
    raise KeyError(f"{s!r} is neither a catalog id nor an existing file")


# ---------------------------------------------------------------------------
# correlator vectors
# ---------------------------------------------------------------------------

@dataclass
class CorrelatorVector:
    """Moments of a behaviour as read by a functional.

    one[a] is the single-site moment of setting a; pair[k][(a, b)] the
    two-site moment of settings (a, b) at site distance k.
    """

    one: dict[str, object]
    pair: dict[int, dict[tuple[str, str], object]] = field(
        default_factory=dict)

    def moment(self, key) -> object:
        if isinstance(key, str):
            return self.one[key]
        k, a, b = key
        return self.pair[k][(a, b)]


def evaluate(f: BellFunctional, corr: CorrelatorVector):
    """Value of the functional on a correlator vector.

    Exact when the moments are Fractions; float otherwise.
    """
    total = 0
    for a in f.settings:
        total += f.one_body(a) * corr.one[a]
    for k in f.pair_distances:
        for a in f.settings:
            for b in f.settings:
                total += f.pair(a, b, k) * corr.pair[k][(a, b)]
    return total


def deterministic_correlators(f: BellFunctional,
                              values: Mapping[str, int]) -> CorrelatorVector:
    """Correlators of the TI deterministic assignment a -> values[a]."""
    for a in f.settings:
        if values[a] not in (-1, 1):
            raise ValueError("assignment values must be +-1")
    one = {a: Fraction(values[a]) for a in f.settings}
    pair = {k: {(a, b): Fraction(values[a] * values[b])
                for a in f.settings for b in f.settings}
            for k in f.pair_distances}
    return CorrelatorVector(one=one, pair=pair)


def correlators_from_density(f: BellFunctional, rho: np.ndarray,
                             obs: Sequence[np.ndarray]) -> CorrelatorVector:
    """Moments of a window density matrix under the given observables.

    rho acts on f.window sites of local dimension d = obs[0].shape[0];
    its trace is assumed to be one.
    """
    d = obs[0].shape[0]
    w = f.window
    if rho.shape != (d ** w, d ** w):
        raise ValueError(f"density matrix must act on {w} sites of "
                         f"dimension {d}")
    eye = np.eye(d)
    names = f.settings

    def on_sites(ops: dict[int, np.ndarray]) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for site in range(w):
            out = np.kron(out, ops.get(site, eye))
        return out

    sig = dict(zip(names, obs))
    one = {a: float(np.real(np.trace(rho @ on_sites({0: sig[a]}))))
           for a in names}
    pair: dict[int, dict[tuple[str, str], object]] = {}
    for k in f.pair_distances:
        pair[k] = {(a, b): float(np.real(np.trace(
            rho @ on_sites({0: sig[a], k: sig[b]}))))
            for a in names for b in names}
    return CorrelatorVector(one=one, pair=pair)


# ---------------------------------------------------------------------------
# local Hamiltonian terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalTerm:
    """One translation-invariant term of a chain Hamiltonian.

    matrix acts on n_sites consecutive sites of local dimension
    site_dim. sites_per_block records how many original chain sites one
    tensor leg represents (2 after next-nearest-neighbour blocking), so
    energy per original site = energy per leg-site / sites_per_block.
    """

    matrix: np.ndarray
    site_dim: int
    n_sites: int
    sites_per_block: int = 1

    def __post_init__(self) -> None:
        n = self.site_dim ** self.n_sites
        if self.matrix.shape != (n, n):
            raise ValueError("matrix shape inconsistent with site_dim/n_sites")

    @property
    def tensor(self) -> np.ndarray:
        """matrix reshaped to one index per bra/ket site."""
        d, n = self.site_dim, self.n_sites
        return self.matrix.reshape((d,) * (2 * n))


def local_term(f: BellFunctional, obs: Sequence[np.ndarray]) -> LocalTerm:
    """Couplings contracted with observables: the local chain term."""
    names = f.settings
    if len(obs) != len(names):
        raise ValueError(f"scenario {f.scenario} takes {len(names)} "
                         f"observables, got {len(obs)}")
    d = obs[0].shape[0]
    for m in obs:
        if m.shape != (d, d):
            raise ValueError("observables must share one square shape")
    sig = dict(zip(names, [np.asarray(m, dtype=complex) for m in obs]))
    eye = np.eye(d, dtype=complex)

    if f.scenario == "322":
        h = np.zeros((d ** 3, d ** 3), dtype=complex)
        for a in names:
            c = float(f.one_body(a))
            if c:
                h += c * np.kron(np.kron(sig[a], eye), eye)
        for a in names:
            for b in names:
                c1 = float(f.pair(a, b, 1))
                if c1:
                    h += c1 * np.kron(np.kron(sig[a], sig[b]), eye)
                c2 = float(f.pair(a, b, 2))
                if c2:
                    h += c2 * np.kron(np.kron(sig[a], eye), sig[b])
        return LocalTerm(h, site_dim=d, n_sites=3)

    h = np.zeros((d ** 2, d ** 2), dtype=complex)
    for a in names:
        c = float(f.one_body(a))
        if c:
            h += c * np.kron(sig[a], eye)
    for a in names:
        for b in names:
            c = float(f.pair(a, b, 1))
            if c:
                h += c * np.kron(sig[a], sig[b])
    return LocalTerm(h, site_dim=d, n_sites=2)


def block_nnn(term: LocalTerm) -> LocalTerm:
    """Fold a three-site term into a nearest-neighbour term on pair
    blocks.

    Sites are grouped two per block; the blocked term on blocks
    (b, b+1) collects the three-site term anchored at each of the two
    sites inside block b, so the blocked energy per block is twice the
    original energy per site.
    """
    if term.n_sites != 3:
        raise ValueError("blocking applies to three-site terms")
    d = term.site_dim
    eye = np.eye(d, dtype=complex)
    h4 = np.kron(term.matrix, eye) + np.kron(eye, term.matrix)
    return LocalTerm(h4, site_dim=d * d, n_sites=2,
                     sites_per_block=2 * term.sites_per_block)
