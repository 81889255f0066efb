"""Classical bound: exactness, and agreement with periodic brute force.

The production path runs a minimum mean cycle search on the de Bruijn
graph of site assignments; brute_force_periodic enumerates periodic
assignments directly, so the two agree exactly whenever the brute-force
period cap covers the optimal cycle length (number of graph nodes).
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ticontext import BellFunctional, brute_force_periodic, classical_bound, resolve

rationals = st.fractions(
    min_value=-3, max_value=3, max_denominator=4)


def test_known_bound_is_exact_rational():
    b = classical_bound(resolve("222/1"))
    assert isinstance(b, Fraction)
    assert b == Fraction(-2)


def test_returns_fraction_not_float():
    f = BellFunctional("222", {"Jxx": Fraction(1, 3)})
    b = classical_bound(f)
    assert isinstance(b, Fraction)
    assert b == Fraction(-1, 3)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(
    st.sampled_from(["Jx", "Jy", "Jxx", "Jxy", "Jyx", "Jyy"]),
    rationals, min_size=1))
def test_matches_periodic_brute_force_222(couplings):
    # window 2, two settings: 4 site assignments, so the optimal cycle
    # has period at most 4 and the brute force is exhaustive
    f = BellFunctional("222", couplings)
    assert classical_bound(f) == brute_force_periodic(f, 4)


@settings(max_examples=15, deadline=None)
@given(st.dictionaries(
    st.sampled_from(["Jx", "Jy", "Jz", "Jxx", "Jyy", "Jzz",
                     "Jxy", "Jyz", "Jzx"]),
    rationals, min_size=1))
def test_brute_force_never_beats_bound_232(couplings):
    # period cap below the graph size: brute force sees a subset of the
    # classical strategies, so it can only do worse or equal
    f = BellFunctional("232", couplings)
    assert classical_bound(f) <= brute_force_periodic(f, 4)


@settings(max_examples=10, deadline=None)
@given(st.dictionaries(
    st.sampled_from(["Jx", "JxxAB", "JxyAB", "JyxAB", "JxxAC", "JyyAC"]),
    rationals, min_size=1))
def test_brute_force_never_beats_bound_322(couplings):
    f = BellFunctional("322", couplings)
    assert classical_bound(f) <= brute_force_periodic(f, 3)


@pytest.mark.parametrize("key", ["222/1", "322/1", "322/30", "322/63",
                                 "232/1", "232/3", "232/5"])
def test_catalog_rows_match_brute_force(key):
    f = resolve(key)
    # tabulated facet bounds are attained by short periodic assignments
    assert classical_bound(f) == brute_force_periodic(f, 4)
