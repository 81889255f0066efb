"""Outer descent machinery: gradients, projections, schedules, surfaces."""

import numpy as np
import pytest

from hygiene_checks import (
    worst_fd_gradient_error,
    worst_gauge_invariance_error,
    worst_povm_projection_error,
)
from ticontext import (
    Schedule,
    Signature,
    UMPS,
    descend,
    descend_multistart,
    energy_of_params,
    evaluate,
    max_imaginary_part,
    povm_observables,
    povm_project,
    reduced_density,
    resolve,
    scan_surface,
)
from ticontext.functionals import correlators_from_density
from ticontext.optimizer import build_observables


def test_analytic_gradient_matches_finite_differences():
    assert worst_fd_gradient_error(12, seed=42) < 1e-5


def test_povm_project_is_eigenvalue_clipping():
    assert worst_povm_projection_error(25, seed=7) < 1e-8


def test_energy_gauge_invariance():
    assert worst_gauge_invariance_error(8, seed=3) < 1e-10


def test_povm_project_rejects_non_hermitian():
    with pytest.raises(ValueError):
        povm_project(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_povm_project_real_input_stays_real():
    rng = np.random.default_rng(11)
    s = rng.normal(size=(4, 4))
    pair = povm_project(s + s.T)
    assert np.max(np.abs(pair.sigma.imag)) == 0.0
    assert np.max(np.abs(pair.m0.imag)) == 0.0


def test_energy_of_params_agrees_with_correlator_route():
    # same number through an independent path: window density ->
    # correlators -> functional value
    for key, d in (("222/1", 2), ("232/1", 3)):
        f = resolve(key)
        rng = np.random.default_rng(5)
        sig = Signature((1,) * len(f.settings), d)
        W = rng.uniform(-1.0, 1.0, size=len(f.settings) * (d * (d - 1) // 2))
        A = UMPS.random(3, d, rng=rng)
        obs = build_observables(f, sig, W)
        e = energy_of_params(f, sig, W, A)
        corr = correlators_from_density(f, reduced_density(A, 2), obs)
        assert abs(e - float(evaluate(f, corr))) < 1e-10


def test_schedule_decay_and_floor():
    s = Schedule(gamma0=0.5, alpha=0.5, gamma_min=0.01)
    assert s.gamma(0) == 0.5
    assert s.gamma(1) == 0.25
    assert s.gamma(100) == 0.01
    gs = [s.gamma(k) for k in range(30)]
    assert all(a >= b for a, b in zip(gs, gs[1:]))


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(gamma0=0.0)
    with pytest.raises(ValueError):
        Schedule(alpha=1.0)
    with pytest.raises(ValueError):
        Schedule(momentum=1.0)
    with pytest.raises(ValueError):
        Schedule(max_outer=0)


def test_descend_smoke_two_setting_chain():
    sched = Schedule(max_outer=40, eps_star=1e-6)
    res = descend("222/1", d=2, seed=0, schedule=sched, D=2)
    assert res.energy <= -1.9
    assert res.energy >= -2.0 - 1e-6
    assert len(res.trace.steps) >= 1
    assert res.trace.status in ("converged", "max-iter")
    assert res.seed == 0


def test_descend_trace_csv(tmp_path):
    sched = Schedule(max_outer=5, eps_star=1e-6)
    res = descend("222/1", d=2, seed=1, schedule=sched, D=2)
    p = tmp_path / "trace.csv"
    res.trace.to_csv(p)
    text = p.read_text()
    assert text.startswith("k,e,grad_norm")
    assert "# status:" in text
    assert "# W:" in text


def test_descend_multistart_returns_best_of_runs():
    sched = Schedule(max_outer=10, eps_star=1e-6)
    best, runs = descend_multistart("222/1", d=2, seeds=[0, 1, 2],
                                    schedule=sched, D=2, workers=1)
    assert len(runs) == 3
    assert best.energy == min(r.energy for r in runs)
    assert {r.seed for r in runs} == {0, 1, 2}


def test_povm_observables_are_valid_pairs():
    rng = np.random.default_rng(23)
    params = rng.normal(size=3 * 4)  # three settings, d=2 basis size 4
    for pair in povm_observables(params, 3):
        assert np.max(np.abs(pair.m0 + pair.m1 - np.eye(2))) < 1e-12
        evals = np.linalg.eigvalsh(pair.sigma)
        assert np.all(evals >= -1.0 - 1e-12)
        assert np.all(evals <= 1.0 + 1e-12)


def test_max_imaginary_part_zero_on_real_params():
    params = np.zeros(3 * 4)
    params[0] = 0.7
    assert max_imaginary_part(params, 3) == 0.0


def test_scan_surface_grid_shape_and_floor():
    w1 = np.linspace(0.0, 1.2, 3)
    w2 = np.linspace(0.0, 1.2, 2)
    e = scan_surface("222/1", d=2, w1_values=w1, w2_values=w2,
                     D=2, seed=0)
    assert e.shape == (3, 2)
    # the two-observable chain never dips under its quantum value
    assert np.min(e) >= -2.0 - 1e-6


def test_scan_surface_needs_two_parameters():
    with pytest.raises(ValueError):
        scan_surface("222/1", d=3, w1_values=[0.0], w2_values=[0.0], D=2)
