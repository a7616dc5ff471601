"""Gate-level IR for the native ZZ gateset plus opaque one- and two-qubit blocks.

Bit order: qubit 0 is the most significant bit of a basis index and the
leftmost character of a bitstring.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matcore import MAX_QUBITS
from .synth import r_phi, vz, zz_matrix
from .validation import NotUnitaryError, check_n_qubits, check_permutation, check_unitary

GATE_KINDS = ("R", "VZ", "ZZ", "U2", "U4")
_ARITY = {"R": 1, "VZ": 1, "ZZ": 2, "U2": 1, "U4": 2}
_NPARAMS = {"R": 2, "VZ": 1, "ZZ": 1}


class SchemaError(ValueError):
    """Malformed circuit or configuration document."""


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {_ARITY[self.kind]} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if self.kind in _NPARAMS:
            if len(self.params) != _NPARAMS[self.kind]:
                raise ValueError(f"{self.kind} takes {_NPARAMS[self.kind]} parameter(s)")
        else:
            dim = 2 ** len(self.qubits)
            object.__setattr__(self, "matrix", check_unitary(self.matrix, dim))

    # constructors -------------------------------------------------------
    @classmethod
    def r(cls, phi: float, theta: float, q: int) -> "Gate":
        return cls("R", (q,), (phi, theta))

    @classmethod
    def vz(cls, theta: float, q: int) -> "Gate":
        return cls("VZ", (q,), (theta,))

    @classmethod
    def zz(cls, theta: float, q1: int, q2: int) -> "Gate":
        return cls("ZZ", (q1, q2), (theta,))

    @classmethod
    def u2(cls, u, q: int) -> "Gate":
        return cls("U2", (q,), (), np.asarray(u, dtype=complex))

    @classmethod
    def u4(cls, u, q1: int, q2: int) -> "Gate":
        return cls("U4", (q1, q2), (), np.asarray(u, dtype=complex))

    # ------------------------------------------------------------------
    @property
    def theta(self) -> float:
        if self.kind == "R":
            return self.params[1]
        return self.params[0]

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def unitary(self) -> np.ndarray:
        if self.kind == "R":
            return r_phi(*self.params)
        if self.kind == "VZ":
            return vz(self.params[0])
        if self.kind == "ZZ":
            return zz_matrix(self.params[0])
        return self.matrix

    def on(self, *qubits: int) -> "Gate":
        return Gate(self.kind, qubits, self.params, self.matrix)

    def isclose(self, other: "Gate", atol: float = 1e-15) -> bool:
        if self.kind != other.kind or self.qubits != other.qubits:
            return False
        if not np.allclose(self.params, other.params, rtol=0, atol=atol):
            return False
        if self.matrix is None:
            return other.matrix is None
        return other.matrix is not None and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)


@dataclass(frozen=True, eq=False)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    out_perm: tuple[int, ...] | None = None

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1:
            raise ValueError("n_qubits must be positive")
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "gates", tuple(self.gates))
        perm = tuple(range(n)) if self.out_perm is None else check_permutation(self.out_perm, n)
        object.__setattr__(self, "out_perm", perm)
        for g in self.gates:
            if max(g.qubits) >= n or min(g.qubits) < 0:
                raise ValueError(f"gate {g.kind}{g.qubits} outside register of {n} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def replace(self, gates=None, out_perm=None) -> "Circuit":
        return Circuit(
            self.n_qubits,
            self.gates if gates is None else gates,
            self.out_perm if out_perm is None else out_perm,
        )

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different width")
        if self.out_perm != tuple(range(self.n_qubits)):
            raise ValueError("left operand must have the identity output permutation")
        return Circuit(self.n_qubits, self.gates + other.gates, other.out_perm)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def isclose(self, other: "Circuit", atol: float = 1e-15) -> bool:
        return (
            self.n_qubits == other.n_qubits
            and self.out_perm == other.out_perm
            and len(self.gates) == len(other.gates)
            and all(a.isclose(b, atol) for a, b in zip(self.gates, other.gates))
        )


# --------------------------------------------------------------------------
# statevector kernels (leading axis is a batch axis)


def apply_gate(states: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """Apply ``u`` to ``states`` of shape ``(batch, 2, ..., 2)``."""
    axes = [q + 1 for q in qubits]
    k = len(axes)
    t = u.reshape((2,) * (2 * k))
    out = np.tensordot(t, states, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def permute_wires(states: np.ndarray, out_perm) -> np.ndarray:
    """Move physical wire ``p`` to logical position ``out_perm[p]``."""
    inv = np.argsort(out_perm)
    return np.transpose(states, [0] + [int(p) + 1 for p in inv])


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense ``2^n x 2^n`` unitary of ``c`` including the output permutation."""
    n = check_n_qubits(c.n_qubits, MAX_QUBITS)
    dim = 2**n
    states = np.eye(dim, dtype=complex).reshape((dim,) + (2,) * n)
    for g in c.gates:
        states = apply_gate(states, g.unitary(), g.qubits)
    states = permute_wires(states, c.out_perm)
    return states.reshape(dim, dim).T


def final_state(c: Circuit) -> np.ndarray:
    n = check_n_qubits(c.n_qubits, MAX_QUBITS)
    psi = np.zeros((1,) + (2,) * n, dtype=complex)
    psi[(0,) * (n + 1)] = 1.0
    for g in c.gates:
        psi = apply_gate(psi, g.unitary(), g.qubits)
    return permute_wires(psi, c.out_perm).reshape(-1)


# --------------------------------------------------------------------------
# angle accounting


@dataclass(frozen=True)
class PairAngles:
    theta_sum: dict
    zz_count: dict

    def load(self, i: int, j: int) -> float:
        return self.theta_sum.get(frozenset((i, j)), 0.0)


def total_zz_angle(c: Circuit) -> float:
    """Sum of ``|theta|`` over all ZZ gates."""
    return float(sum(abs(g.params[0]) for g in c.gates if g.kind == "ZZ"))


def pair_angles(c: Circuit) -> PairAngles:
    theta = defaultdict(float)
    count = defaultdict(int)
    for g in c.gates:
        if g.kind == "ZZ":
            key = frozenset(g.qubits)
            theta[key] += abs(g.params[0])
            count[key] += 1
    return PairAngles(dict(theta), dict(count))


def angle_on_pairs(c: Circuit, pairs) -> float:
    """Total ``|theta|`` landing on the given (unordered) qubit pairs."""
    keys = {frozenset(p) for p in pairs}
    return float(sum(v for k, v in pair_angles(c).theta_sum.items() if k in keys))


# --------------------------------------------------------------------------
# permutations


def remap_bits(bits: str, out_perm) -> str:
    """Report the bit measured on physical qubit ``i`` at position ``out_perm[i]``."""
    if len(bits) != len(out_perm):
        raise ValueError(f"bitstring of length {len(bits)} vs permutation of {len(out_perm)}")
    out = [""] * len(bits)
    for i, b in enumerate(bits):
        out[out_perm[i]] = b
    return "".join(out)


def compose_perms(first, second) -> tuple[int, ...]:
    """Permutation equal to applying ``first`` then ``second``."""
    return tuple(int(second[p]) for p in first)


def remap_index_table(out_perm) -> np.ndarray:
    """``table[physical_index] = logical_index`` for distributions over ``2^n`` outcomes."""
    n = len(out_perm)
    idx = np.arange(2**n)
    out = np.zeros_like(idx)
    for p, l in enumerate(out_perm):
        bit = (idx >> (n - 1 - p)) & 1
        out |= bit << (n - 1 - l)
    return out


# --------------------------------------------------------------------------
# JSON


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(doc) -> np.ndarray:
    try:
        return np.array([[complex(re, im) for re, im in row] for row in doc], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad matrix encoding: {exc}") from None


def circuit_to_dict(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        params = _matrix_to_json(g.matrix) if g.matrix is not None else list(g.params)
        gates.append({"kind": g.kind, "params": params, "qubits": list(g.qubits)})
    return {"n_qubits": c.n_qubits, "gates": gates, "out_perm": list(c.out_perm)}


def circuit_from_dict(doc: dict) -> Circuit:
    if not isinstance(doc, dict):
        raise SchemaError("circuit document must be a JSON object")
    for key in ("n_qubits", "gates"):
        if key not in doc:
            raise SchemaError(f"circuit document missing {key!r}")
    gates = []
    for i, gd in enumerate(doc["gates"]):
        try:
            kind = gd["kind"]
            qubits = gd["qubits"]
            params = gd.get("params", [])
        except (KeyError, TypeError):
            raise SchemaError(f"gate {i}: needs 'kind', 'params' and 'qubits'") from None
        try:
            if kind in ("U2", "U4"):
                gates.append(Gate(kind, qubits, (), _matrix_from_json(params)))
            else:
                gates.append(Gate(kind, qubits, params))
        except NotUnitaryError as exc:
            raise SchemaError(f"gate {i}: {exc}") from None
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"gate {i}: {exc}") from None
    try:
        return Circuit(doc["n_qubits"], gates, doc.get("out_perm"))
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc)) from None


def save_circuit(c: Circuit, path) -> None:
    Path(path).write_text(json.dumps(circuit_to_dict(c)), encoding="utf-8")


def load_circuit(path) -> Circuit:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return circuit_from_dict(doc)


def dumps(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c))


def loads(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))
