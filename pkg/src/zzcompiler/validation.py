"""Input validation helpers shared by the IR, the passes and the estimators."""
from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .matcore import MAX_QUBITS, unitarity_error

UNITARY_ATOL = 1e-10


class NotUnitaryError(ValueError):
    pass


def check_unitary(u, dim: int | None = None, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Return ``u`` as a complex square ndarray, raising if it is not unitary."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    if dim is not None and u.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {u.shape}")
    err = unitarity_error(u)
    if err > atol:
        raise NotUnitaryError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
    return u


def check_n_qubits(n: int, cap: int = MAX_QUBITS) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n!r}")
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the dense simulation cap of {cap}")
    return int(n)


def check_permutation(perm, n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    return perm


def check_probabilities(p, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("expected a non-empty 1-d probability vector")
    if np.any(p < -atol):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if abs(total - 1.0) > atol:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return np.clip(p, 0.0, None)


def check_circuits(X) -> list:
    """Accept one circuit or an iterable of circuits; always return a list."""
    from .circuit import Circuit

    if isinstance(X, Circuit):
        return [X]
    if not isinstance(X, Iterable):
        raise TypeError(f"expected a Circuit or an iterable of Circuits, got {type(X)}")
    out = list(X)
    for c in out:
        if not isinstance(c, Circuit):
            raise TypeError(f"expected Circuit instances, got {type(c)}")
    return out
