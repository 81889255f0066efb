"""Observable construction: spectrum, signatures, parameter counts."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ticontext import (
    Signature,
    build_observable,
    check_observable,
    enumerate_signatures,
    n_parameters,
)
from ticontext.observables import (
    generator,
    reference_diagonal,
    rotation_block,
    skew_basis,
    structured_pair,
    structured_signature,
)

angles = st.floats(min_value=-1.6, max_value=1.6,
                   allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.data())
def test_build_observable_is_involution(d, data):
    n_minus = data.draw(st.integers(0, d))
    kind = data.draw(st.sampled_from(["real", "full"]))
    w = data.draw(st.lists(angles, min_size=n_parameters(d, kind),
                           max_size=n_parameters(d, kind)))
    sigma = build_observable(n_minus, d, w, kind)
    assert np.allclose(sigma @ sigma, np.eye(d), atol=1e-10)
    assert np.allclose(sigma, sigma.conj().T, atol=1e-12)
    evals = np.linalg.eigvalsh(sigma)
    assert int(np.sum(evals < 0)) == n_minus


def test_real_kind_gives_real_matrices():
    w = np.linspace(0.1, 0.9, n_parameters(4, "real"))
    sigma = build_observable(2, 4, w, "real")
    assert np.max(np.abs(sigma.imag)) == 0.0


def test_parameter_counts():
    # real: antisymmetric generators; full: those plus the imaginary
    # symmetric off-diagonal family
    for d in range(2, 7):
        assert n_parameters(d, "real") == d * (d - 1) // 2
        assert n_parameters(d, "full") == d * (d - 1)
        assert len(skew_basis(d, "real")) == n_parameters(d, "real")
        assert len(skew_basis(d, "full")) == n_parameters(d, "full")


def test_generator_is_skew():
    for kind in ("real", "full"):
        m = n_parameters(3, kind)
        S = generator(np.linspace(-0.4, 0.7, m), 3, kind)
        assert np.allclose(S, -S.conj().T, atol=1e-14)


def test_reference_diagonal_counts():
    lam = reference_diagonal(2, 5)
    assert lam.shape == (5,)
    assert int(np.sum(lam < 0)) == 2
    assert set(np.abs(lam)) == {1.0}


def test_enumerate_signatures_count():
    assert len(enumerate_signatures(3, 2)) == 16
    sigs = enumerate_signatures(2, 3)
    assert len(sigs) == 27
    assert all(s.dim == 2 and s.n_settings == 3 for s in sigs)


def test_signature_validation():
    with pytest.raises(ValueError):
        Signature((3,), 2)
    with pytest.raises(ValueError):
        Signature((0,), 0)


def test_check_observable_rejects_bad_input():
    with pytest.raises(ValueError):
        check_observable(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        check_observable(np.diag([1.0, 0.5]))
    with pytest.raises(ValueError):
        check_observable(np.diag([1.0, -1.0]), n_minus=2)
    check_observable(np.diag([1.0, -1.0]), n_minus=1)


def test_rotation_block_spectrum():
    b = rotation_block(0.7)
    assert b.shape == (2, 2)
    assert np.allclose(np.sort(np.linalg.eigvalsh(b)), [-1.0, 1.0])


@pytest.mark.parametrize("scenario,d,variant", [
    ("222", 2, 1), ("222", 4, 1),
    ("322", 3, 1), ("322", 3, 2), ("322", 5, 1),
    ("232", 2, 1),
])
def test_structured_pair_matches_structured_signature(scenario, d, variant):
    sig = structured_signature(scenario, d, variant)
    w = np.full(_n_struct(scenario, d, variant), 0.3)
    mats = structured_pair(scenario, d, w, variant)
    assert len(mats) == sig.n_settings
    for m, n_minus in zip(mats, sig):
        check_observable(m, n_minus)


def _n_struct(scenario, d, variant):
    from ticontext.observables import n_structured_parameters
    return n_structured_parameters(scenario, d, variant)


def test_structured_pair_wrong_parameter_count():
    with pytest.raises(ValueError):
        structured_pair("322", 3, [0.1, 0.2])
