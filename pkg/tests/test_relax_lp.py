"""No-signaling window relaxation: exact values, box validity, fit."""

from fractions import Fraction

import numpy as np
import pytest

from ticontext import (
    build_ltins,
    fitted_sequence_check,
    resolve,
    solve_exact,
    solve_float,
)
from ticontext.exactlp import SingularMatrixError


@pytest.fixture(scope="module")
def chain():
    return resolve("222/1")


def test_small_window_exact_value(chain):
    sol = solve_exact(build_ltins(chain, 3))
    assert sol.value == Fraction(-8, 3)
    assert sol.method in ("verified-basis", "simplex")


def test_solution_table_is_a_valid_box(chain):
    lp = build_ltins(chain, 3)
    sol = solve_exact(lp)
    checks = lp.check_box(sol.table)
    assert checks and all(checks.values())
    # exact rational probabilities in [0, 1]
    assert all(0 <= x <= 1 for x in sol.table.ravel())


def test_objective_of_recovers_value(chain):
    lp = build_ltins(chain, 3)
    sol = solve_exact(lp)
    y = [sol.correlators[k] for k in lp.classes]
    assert lp.objective_of(y) == sol.value


def test_float_solver_agrees(chain):
    lp = build_ltins(chain, 4)
    v = solve_float(lp)
    assert abs(v - (-12.0 / 5.0)) < 1e-7


def test_sequence_monotone_and_below_classical(chain):
    vals = {}
    for n in (3, 4, 5):
        vals[n] = solve_exact(build_ltins(chain, n)).value
    assert vals[3] == Fraction(-8, 3)
    assert vals[4] == Fraction(-12, 5)
    assert vals[5] == Fraction(-9, 4)
    # tightening windows can only raise the bound, never past the
    # classical value
    assert vals[3] <= vals[4] <= vals[5] <= chain.classical_bound


def test_window_too_small_rejected(chain):
    with pytest.raises(ValueError):
        build_ltins(chain, 1)


def test_three_site_window_scenario():
    f = resolve("322/1")
    lp = build_ltins(f, 3)
    v = solve_float(lp)
    assert v <= float(f.classical_bound) + 1e-9


def test_fitted_sequence_check_exact_hits():
    vals = {3: Fraction(-8, 3), 4: Fraction(-12, 5),
            5: Fraction(-9, 4), 6: Fraction(-13, 6)}
    rep = fitted_sequence_check(vals)
    for n, cell in rep.items():
        assert cell["exact"], n
        assert cell["residual"] == 0


def test_fitted_sequence_check_flags_mismatch():
    rep = fitted_sequence_check({3: Fraction(-5, 2)})
    assert not rep[3]["exact"]
    assert rep[3]["residual"] != 0


def test_fitted_sequence_check_float_inputs():
    rep = fitted_sequence_check({3: -8 / 3})
    assert abs(rep[3]["residual"]) < 1e-12


def test_simplex_fallback_same_value(chain, monkeypatch):
    from ticontext import exactlp

    def boom(*a, **k):
        raise SingularMatrixError("forced")

    monkeypatch.setattr(exactlp, "select_independent_columns", boom)
    sol = solve_exact(build_ltins(chain, 3))
    assert sol.value == Fraction(-8, 3)
    assert sol.method == "simplex"
