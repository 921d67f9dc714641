"""Two-qubit gate matrices and SWAP absorption.

Basis order is ``|00>, |01>, |10>, |11>``.
"""
from __future__ import annotations

import numpy as np

UNITARY_TOL = 1e-9

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)

SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]],
    dtype=complex,
)

# fermionic SWAP used in chemistry circuits: |11> picks up a sign
FSWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, -1]],
    dtype=complex,
)


def fsim(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [[1, 0, 0, 0],
         [0, c, -1j * s, 0],
         [0, -1j * s, c, 0],
         [0, 0, 0, np.exp(-1j * phi)]],
        dtype=complex,
    )


def is_unitary(w: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    w = np.asarray(w)
    if w.shape != (4, 4):
        return False
    return bool(np.max(np.abs(w.conj().T @ w - np.eye(4))) <= tol)


def absorb_swap_matrix(w: np.ndarray, swap: str = "standard") -> np.ndarray:
    """Matrix of ``SWAP . w``, the gate that also performs a following SWAP.

    ``swap="fermionic"`` uses the sign-carrying SWAP from fermionic
    simulation instead of the plain one.
    """
    w = np.asarray(w, dtype=complex)
    if not is_unitary(w):
        raise ValueError("input is not a 4x4 unitary")
    if swap == "standard":
        # plain SWAP only exchanges the |01> and |10> rows
        return w[[0, 2, 1, 3], :].copy()
    if swap == "fermionic":
        return FSWAP @ w
    raise ValueError(f"unknown swap kind {swap!r}")
