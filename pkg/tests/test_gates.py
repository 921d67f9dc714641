import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlayout.gates import CNOT, FSWAP, SWAP, absorb_swap_matrix, fsim, is_unitary

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_swap_absorbs_to_identity():
    assert np.array_equal(absorb_swap_matrix(SWAP), np.eye(4))


def test_cnot_rows():
    got = absorb_swap_matrix(CNOT)
    # SWAP . CNOT sends |01> to |10>, |10> to |11> and |11> to |01>
    expected = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]], dtype=complex)
    assert np.array_equal(got, expected)


def test_fermionic_fsim_has_negated_corner():
    th, ph = 0.3, 1.1
    got = absorb_swap_matrix(fsim(th, ph), swap="fermionic")
    c, s = np.cos(th), np.sin(th)
    expected = np.array(
        [[1, 0, 0, 0], [0, -1j * s, c, 0], [0, c, -1j * s, 0], [0, 0, 0, -np.exp(-1j * ph)]]
    )
    assert np.max(np.abs(got - expected)) <= 1e-12


def test_rejects_non_unitary():
    with pytest.raises(ValueError):
        absorb_swap_matrix(2 * np.eye(4))
    with pytest.raises(ValueError):
        absorb_swap_matrix(np.eye(3))
    with pytest.raises(ValueError):
        absorb_swap_matrix(SWAP, swap="iswap")


@settings(max_examples=50)
@given(angles, angles)
def test_absorption_is_unitary_and_involutive(th, ph):
    w = fsim(th, ph)
    once = absorb_swap_matrix(w)
    assert is_unitary(once)
    assert np.max(np.abs(absorb_swap_matrix(once) - w)) <= 1e-12
    assert np.max(np.abs(absorb_swap_matrix(once, "fermionic") - FSWAP @ SWAP @ w)) <= 1e-12
