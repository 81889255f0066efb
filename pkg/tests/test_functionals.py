"""Catalog integrity, serialization round-trips, and correlator evaluation."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from ticontext import (
    BellFunctional,
    CorrelatorVector,
    catalog,
    catalog_entry,
    evaluate,
    load_functional,
    local_term,
    resolve,
    save_functional,
)
from ticontext.functionals import correlators_from_density, deterministic_correlators


def test_catalog_row_counts():
    keys = set(catalog())
    assert "222/1" in keys
    assert sum(1 for k in keys if k.startswith("322/")) == 63
    assert sum(1 for k in keys if k.startswith("232/")) == 5
    assert len(keys) == 69


def test_catalog_entries_are_consistent():
    for key, f in catalog().items():
        scenario, _, row = key.partition("/")
        assert f.scenario == scenario
        assert int(row) >= 1
        # tabulated bounds are integers
        assert f.classical_bound is not None
        assert f.classical_bound.denominator == 1


def test_catalog_entry_unknown_key():
    with pytest.raises(KeyError):
        catalog_entry("999/1")


def test_resolve_accepts_functional_id_and_path(tmp_path):
    f = catalog_entry("222/1")
    assert resolve(f) is f
    assert resolve("222/1") is f
    p = tmp_path / "f.json"
    save_functional(f, p)
    g = resolve(str(p))
    assert (g.scenario, g.couplings, g.classical_bound) \
        == (f.scenario, f.couplings, f.classical_bound)
    with pytest.raises(KeyError):
        resolve("no/such/functional")


def test_save_load_round_trip_exact(tmp_path):
    f = BellFunctional(
        scenario="222",
        couplings={"Jx": Fraction(1, 3), "Jxy": Fraction(-2, 7)},
        classical_bound=Fraction(-5, 21),
    )
    p = tmp_path / "frac.json"
    save_functional(f, p)
    g = load_functional(p)
    assert g.couplings == f.couplings
    assert g.classical_bound == f.classical_bound
    assert g.scenario == f.scenario


def test_unknown_coupling_keys_rejected():
    with pytest.raises(ValueError):
        BellFunctional(scenario="222", couplings={"Jq": 1})


def test_window_matches_scenario():
    assert resolve("222/1").window == 2
    assert resolve("322/1").window == 3
    assert resolve("232/1").window == 2


def test_evaluate_on_zero_correlators():
    # all-zero correlators sit inside every polytope: value 0
    for key in ("222/1", "322/1", "232/1"):
        f = resolve(key)
        corr = CorrelatorVector(
            one={a: Fraction(0) for a in f.settings},
            pair={k: {(a, b): Fraction(0)
                      for a in f.settings for b in f.settings}
                  for k in f.pair_distances},
        )
        assert evaluate(f, corr) == 0


def test_deterministic_assignments_respect_classical_bound():
    # uniform assignments are a subset of the TI classical strategies
    for key in ("222/1", "232/1", "232/5", "322/1", "322/63"):
        f = resolve(key)
        for vals in product((-1, 1), repeat=len(f.settings)):
            corr = deterministic_correlators(f, dict(zip(f.settings, vals)))
            assert evaluate(f, corr) >= f.classical_bound


def test_correlators_from_maximally_mixed_state():
    # traceless observables on the maximally mixed state: every
    # correlator vanishes
    f = resolve("222/1")
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.diag([1.0, -1.0])
    rho = np.eye(4) / 4.0
    corr = correlators_from_density(f, rho, [sz, sx])
    for a in f.settings:
        assert abs(corr.moment(a)) < 1e-12
    for (a, b) in corr.pair[1]:
        assert abs(corr.moment((1, a, b))) < 1e-12


def test_local_term_shape_and_hermiticity():
    f = resolve("322/1")
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    term = local_term(f, [sz, sx])
    assert term.n_sites == 3
    assert term.matrix.shape == (8, 8)
    assert np.allclose(term.matrix, term.matrix.conj().T)


def test_local_term_rejects_wrong_observable_count():
    f = resolve("232/1")
    sz = np.diag([1.0, -1.0])
    with pytest.raises(ValueError):
        local_term(f, [sz, sz])
