"""Dense complex matrix helpers, Haar sampling and phase-invariant comparison.

Unitaries are plain ``complex128`` ndarrays; :func:`check_unitary` in
:mod:`zzcompiler.validation` enforces the unitarity bound wherever a matrix
enters the IR.

Random streams
--------------
All randomness goes through :func:`make_rng`, which returns a numpy
``Generator`` over the Philox-4x64 counter-based bit generator keyed by a
``SeedSequence`` built from integer words ``(seed, *stream)``.  Child streams
(circuit index, shot index, ...) are therefore addressable without sharing
state between workers.
"""
from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

MAX_QUBITS = 8


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional child-stream path."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) for s in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(0 if rng is None else rng)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron expects two matrices")
    return np.kron(a, b)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def unitary_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``1 - |tr(u^dagger v)| / d``; zero iff ``u`` and ``v`` differ by a global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    overlap = abs(np.vdot(u, v)) / d
    return float(min(1.0, max(0.0, 1.0 - overlap)))


def haar_random_unitary(dim: int, rng=None) -> np.ndarray:
    """Haar-distributed element of U(dim) via phase-corrected QR of a Ginibre matrix."""
    rng = as_rng(rng)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_random_su4(rng=None) -> np.ndarray:
    """Haar-random U(4) sample rescaled by ``det**(-1/4)`` so that it lies in SU(4)."""
    u = haar_random_unitary(4, rng)
    return u / np.linalg.det(u) ** 0.25


def rz(theta: float) -> np.ndarray:
    """``exp(-i theta Z / 2)``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)
