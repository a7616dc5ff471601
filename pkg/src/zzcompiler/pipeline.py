"""Compilation passes for an all-to-all ZZ(theta) register.

The full flow (:func:`compile_circuit`) is::

    merge_two_qubit_blocks -> decompose_blocks (+ mirror decision)
        -> approximate -> assign_qubits/relabel
        -> merge_single_qubit -> lower_single_qubit -> normalize_zz

Mirrored blocks leave a virtual SWAP behind.  It is never emitted; later
gates are relabelled and the net relabelling is folded into ``out_perm``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations, permutations
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate, PairAngles, SchemaError, compose_perms, pair_angles, total_zz_angle
from .matcore import SWAP, unitary_distance
from .synth import (
    PI,
    QUARTER,
    euler_zxz,
    is_diagonal,
    kak_decompose,
    kept_angles,
    native_ops,
)

GATESETS = ("fixed", "parameterized")
STRATEGIES = ("brute_force", "greedy")
IDENTITY_ATOL = 1e-10


@dataclass(frozen=True)
class ErrorMatrix:
    """Symmetric per-pair ZZ error weights ``eps[i, j]`` on ``n`` physical qubits."""

    n: int
    eps: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.array(self.eps, dtype=float)
        if e.shape != (self.n, self.n):
            raise ValueError(f"error matrix must be {self.n}x{self.n}, got {e.shape}")
        if not np.allclose(e, e.T):
            raise ValueError("error matrix must be symmetric")
        off = e[~np.eye(self.n, dtype=bool)]
        if np.any(off < 0) or np.any(off > 1):
            raise ValueError("error rates must lie in [0, 1]")
        np.fill_diagonal(e, 0.0)
        e.setflags(write=False)
        object.__setattr__(self, "eps", e)

    @classmethod
    def uniform(cls, n: int, value: float = 0.01) -> "ErrorMatrix":
        return cls(n, np.full((n, n), value))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "ErrorMatrix":
        e = np.full((n, n), np.nan)
        for q1, q2, value in pairs:
            e[q1, q2] = e[q2, q1] = value
        np.fill_diagonal(e, 0.0)
        if np.isnan(e).any():
            missing = [(i, j) for i, j in combinations(range(n), 2) if np.isnan(e[i, j])]
            raise ValueError(f"error matrix missing pairs {missing}")
        return cls(n, e)

    @classmethod
    def from_fidelities(cls, n: int, fidelities) -> "ErrorMatrix":
        """``eps = 1 - fidelity`` from ``[(q1, q2, fidelity), ...]``."""
        return cls.from_pairs(n, [(a, b, 1.0 - f) for a, b, f in fidelities])

    def to_dict(self) -> dict:
        pairs = [
            {"q1": i, "q2": j, "eps": float(self.eps[i, j])}
            for i, j in combinations(range(self.n), 2)
        ]
        return {"n": self.n, "pairs": pairs}

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorMatrix":
        try:
            n = int(doc["n"])
            pairs = [(int(p["q1"]), int(p["q2"]), float(p["eps"])) for p in doc["pairs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad error-matrix document: {exc}") from None
        try:
            return cls.from_pairs(n, pairs)
        except (ValueError, IndexError) as exc:
            raise SchemaError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ErrorMatrix":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    def worst_pairs(self, k: int) -> list[tuple[int, int]]:
        pairs = sorted(combinations(range(self.n), 2), key=lambda p: (-self.eps[p], p))
        return pairs[:k]


@dataclass(frozen=True)
class CompileOptions:
    gateset: str = "parameterized"
    mirror: bool = False
    theta_min: float = 0.0
    ranking: ErrorMatrix | None = None
    assignment_strategy: str = "brute_force"
    drop_diagonals: bool = True

    def __post_init__(self):
        if self.gateset not in GATESETS:
            raise ValueError(f"gateset must be one of {GATESETS}, got {self.gateset!r}")
        if self.assignment_strategy not in STRATEGIES:
            raise ValueError(f"assignment_strategy must be one of {STRATEGIES}")
        if not 0 <= self.theta_min < QUARTER:
            raise ValueError("theta_min must lie in [0, pi/4)")
        if self.mirror and self.gateset != "parameterized":
            raise ValueError("swap mirroring requires the parameterized gateset")


@dataclass(frozen=True, eq=False)
class CompileReport:
    circuit: Circuit
    theta_total: float
    zz_count: int
    theta_by_pair: PairAngles
    assignment: tuple[int, ...]
    mirrors_inserted: int
    gates_dropped: int

    def to_dict(self) -> dict:
        return {
            "theta_total": self.theta_total,
            "zz_count": self.zz_count,
            "theta_by_pair": [
                {"q1": min(k), "q2": max(k), "theta": v, "zz_count": self.theta_by_pair.zz_count[k]}
                for k, v in sorted(self.theta_by_pair.theta_sum.items(), key=lambda kv: sorted(kv[0]))
            ],
            "assignment": list(self.assignment),
            "mirrors_inserted": self.mirrors_inserted,
            "gates_dropped": self.gates_dropped,
            "out_perm": list(self.circuit.out_perm),
        }


# --------------------------------------------------------------------------
# step 1


def _embed_on(u: np.ndarray, src: tuple[int, int], dst: tuple[int, int]) -> np.ndarray:
    """Express ``u`` acting on ``src`` in the qubit order of ``dst``."""
    if src == dst:
        return u
    return SWAP @ u @ SWAP


def _gate_on_pair(g: Gate, pair: tuple[int, int]) -> np.ndarray:
    if g.is_two_qubit:
        return _embed_on(g.unitary(), g.qubits, pair)
    u = g.unitary()
    if g.qubits[0] == pair[0]:
        return np.kron(u, np.eye(2))
    return np.kron(np.eye(2), u)


def merge_two_qubit_blocks(c: Circuit) -> Circuit:
    """Fuse maximal same-pair runs (with interposed 1q gates) into ``U4`` blocks."""
    items: list = []
    open_block: dict[int, int] = {}

    def close(q):
        idx = open_block.pop(q, None)
        if idx is not None:
            for other in items[idx]["pair"]:
                open_block.pop(other, None)

    for g in c.gates:
        if g.is_two_qubit:
            a, b = g.qubits
            idx = open_block.get(a)
            if idx is not None and open_block.get(b) == idx:
                blk = items[idx]
                blk["u"] = _gate_on_pair(g, blk["pair"]) @ blk["u"]
                continue
            close(a)
            close(b)
            items.append({"pair": (a, b), "u": g.unitary() if g.kind == "U4" else _gate_on_pair(g, (a, b))})
            open_block[a] = open_block[b] = len(items) - 1
        else:
            idx = open_block.get(g.qubits[0])
            if idx is None:
                items.append(g)
            else:
                blk = items[idx]
                blk["u"] = _gate_on_pair(g, blk["pair"]) @ blk["u"]
    gates = [it if isinstance(it, Gate) else Gate.u4(it["u"], *it["pair"]) for it in items]
    return c.replace(gates=gates)


# --------------------------------------------------------------------------
# step 2


@dataclass
class _Choice:
    ops: list
    mirrored: bool


def _block_choice(u: np.ndarray, opts: CompileOptions) -> _Choice:
    k = kak_decompose(u)
    plain = _Choice(native_ops(k, opts.gateset), False)
    if not opts.mirror:
        return plain
    km = kak_decompose(SWAP @ u)
    kept = kept_angles(k.coords, opts.theta_min)
    kept_m = kept_angles(km.coords, opts.theta_min)
    # fewer entanglers, then smaller angle, then no mirror
    key = (len(kept), sum(abs(t) for t in kept))
    key_m = (len(kept_m), sum(abs(t) for t in kept_m))
    if key_m[0] < key[0] or (key_m[0] == key[0] and key_m[1] < key[1] - 1e-12):
        return _Choice(native_ops(km, opts.gateset), True)
    return plain


def decompose_blocks(c: Circuit, opts: CompileOptions | None = None) -> tuple[Circuit, int]:
    """Replace every two-qubit gate by native ``ZZ`` + ``U2`` gates.

    Returns the new circuit and the number of mirror SWAPs inserted.
    """
    opts = opts or CompileOptions()
    wire = list(range(c.n_qubits))  # logical wire -> physical wire
    gates: list[Gate] = []
    mirrors = 0
    for g in c.gates:
        phys = tuple(wire[q] for q in g.qubits)
        if not g.is_two_qubit:
            gates.append(g.on(*phys))
            continue
        if g.kind == "ZZ" and opts.gateset == "parameterized" and not opts.mirror:
            gates.append(g.on(*phys))
            continue
        choice = _block_choice(g.unitary(), opts)
        for op in choice.ops:
            if op[0] == "zz":
                gates.append(Gate.zz(op[1], *phys))
            else:
                gates.append(Gate.u2(op[2], phys[op[1]]))
        if choice.mirrored:
            mirrors += 1
            a, b = g.qubits
            wire[a], wire[b] = wire[b], wire[a]
    # logical l now lives on physical wire[l]; physical p reports logical l
    measured = [0] * c.n_qubits
    for logical, p in enumerate(wire):
        measured[p] = logical
    out_perm = compose_perms(measured, c.out_perm)
    return Circuit(c.n_qubits, gates, out_perm), mirrors


# --------------------------------------------------------------------------
# approximation


def approximate(c: Circuit, theta_min: float) -> tuple[Circuit, int]:
    """Drop every ZZ with ``|theta| < theta_min`` and re-merge the leftover 1q gates."""
    if theta_min <= 0:
        return c, 0
    kept = [g for g in c.gates if not (g.kind == "ZZ" and abs(g.params[0]) < theta_min)]
    dropped = len(c.gates) - len(kept)
    if not dropped:
        return c, 0
    return merge_single_qubit(c.replace(gates=kept), drop_diagonals=False), dropped


# --------------------------------------------------------------------------
# steps 3 and 4


def merge_single_qubit(c: Circuit, drop_diagonals: bool = False) -> Circuit:
    """Fuse runs of single-qubit gates per wire into ``U2`` blocks.

    Near-identity blocks vanish.  With ``drop_diagonals``, a diagonal block that
    opens a wire (acting on ``|0>``) or closes it (just before measurement) is
    removed as well.
    """
    pending: dict[int, np.ndarray] = {}
    touched: set[int] = set()
    out: list[Gate] = []

    def flush(q, trailing=False):
        u = pending.pop(q, None)
        if u is None:
            return
        leading = q not in touched
        touched.add(q)
        if unitary_distance(u, np.eye(2)) < IDENTITY_ATOL:
            return
        if drop_diagonals and (leading or trailing) and is_diagonal(u):
            return
        out.append(Gate.u2(u, q))

    for g in c.gates:
        if g.is_two_qubit:
            for q in g.qubits:
                flush(q)
                touched.add(q)
            out.append(g)
        else:
            q = g.qubits[0]
            pending[q] = g.unitary() @ pending.get(q, np.eye(2, dtype=complex))
    for q in sorted(pending):
        flush(q, trailing=True)
    return c.replace(gates=out)


def lower_single_qubit(c: Circuit) -> Circuit:
    """``U2 -> R_alpha(beta)`` followed by ``VZ(gamma + alpha)``."""
    out = []
    for g in c.gates:
        if g.kind != "U2":
            out.append(g)
            continue
        q = g.qubits[0]
        e = euler_zxz(g.matrix)
        if abs(e.beta) > 1e-12:
            out.append(Gate.r(e.alpha, e.beta, q))
        phase = _wrap_2pi(e.gamma + e.alpha)
        if abs(phase) > 1e-12:
            out.append(Gate.vz(phase, q))
    return c.replace(gates=out)


def _wrap_2pi(theta: float) -> float:
    # VZ(theta + 2 pi) = -VZ(theta); a global phase
    t = (theta + PI) % (2 * PI) - PI
    return 0.0 if abs(t) < 1e-12 or abs(abs(t) - 2 * PI) < 1e-12 else t


def normalize_zz(c: Circuit) -> Circuit:
    """Bring every ZZ angle into ``[-pi/2, pi/2]`` using ``ZZ(t + pi) ≐ ZZ(t)(Z ⊗ Z)``."""
    out = []
    for g in c.gates:
        if g.kind != "ZZ" or abs(g.params[0]) <= PI / 2:
            out.append(g)
            continue
        t = (g.params[0] + PI) % (2 * PI) - PI
        flip = abs(t) > PI / 2
        if flip:
            t -= np.sign(t) * PI
        out.append(Gate.zz(t, *g.qubits))
        if flip:
            out += [Gate.vz(PI, g.qubits[0]), Gate.vz(PI, g.qubits[1])]
    return c.replace(gates=out)


# --------------------------------------------------------------------------
# gate ranking


def assignment_objective(loads: PairAngles, em: ErrorMatrix, assign) -> float:
    """``sum_ij eps[assign[i], assign[j]] * theta_ij``."""
    total = 0.0
    for key, theta in loads.theta_sum.items():
        i, j = sorted(key)
        total += em.eps[assign[i], assign[j]] * theta
    return total


def _brute_force(loads: PairAngles, em: ErrorMatrix) -> tuple[int, ...]:
    best, best_val = None, np.inf
    for perm in permutations(range(em.n)):
        val = assignment_objective(loads, em, perm)
        if val < best_val - 1e-12:
            best, best_val = perm, val
    return tuple(best)


def _greedy(loads: PairAngles, em: ErrorMatrix) -> tuple[int, ...]:
    n = em.n
    assign: dict[int, int] = {}
    free = set(range(n))
    order = sorted(loads.theta_sum.items(), key=lambda kv: (-kv[1], sorted(kv[0])))
    phys_pairs = sorted(combinations(range(n), 2), key=lambda p: (em.eps[p], p))
    for key, _ in order:
        a, b = sorted(key)
        if a in assign and b in assign:
            continue
        if a not in assign and b not in assign:
            p, q = next((p, q) for p, q in phys_pairs if p in free and q in free)
            assign[a], assign[b] = p, q
            free -= {p, q}
        else:
            fixed, loose = (a, b) if a in assign else (b, a)
            q = min(free, key=lambda q: (em.eps[assign[fixed], q], q))
            assign[loose] = q
            free.discard(q)
    rest = sorted(free)
    for c in range(n):
        if c not in assign:
            assign[c] = rest.pop(0)
    return tuple(assign[c] for c in range(n))


def assign_qubits(c: Circuit, em: ErrorMatrix, strategy: str = "brute_force") -> tuple[int, ...]:
    """Circuit-qubit -> physical-qubit map minimising ``sum eps_ij |theta_ij|``."""
    if em.n != c.n_qubits:
        raise ValueError(f"error matrix covers {em.n} qubits, circuit has {c.n_qubits}")
    loads = pair_angles(c)
    if strategy == "brute_force":
        return _brute_force(loads, em)
    if strategy == "greedy":
        return _greedy(loads, em)
    raise ValueError(f"unknown assignment strategy {strategy!r}")


def relabel(c: Circuit, assign) -> Circuit:
    """Move circuit qubit ``i`` onto physical qubit ``assign[i]``."""
    gates = [g.on(*(assign[q] for q in g.qubits)) for g in c.gates]
    out_perm = [0] * c.n_qubits
    for i, p in enumerate(assign):
        out_perm[p] = c.out_perm[i]
    return Circuit(c.n_qubits, gates, out_perm)


# --------------------------------------------------------------------------


def compile_circuit(c: Circuit, opts: CompileOptions | None = None) -> CompileReport:
    """Run the full compilation flow and summarise the result."""
    opts = opts or CompileOptions()
    merged = merge_two_qubit_blocks(c)
    decomposed, mirrors = decompose_blocks(merged, opts)
    approx, dropped = approximate(decomposed, opts.theta_min)
    assign = tuple(range(c.n_qubits))
    if opts.ranking is not None:
        assign = assign_qubits(approx, opts.ranking, opts.assignment_strategy)
        approx = relabel(approx, assign)
    merged1 = merge_single_qubit(approx, drop_diagonals=opts.drop_diagonals)
    lowered = normalize_zz(lower_single_qubit(merged1))
    return CompileReport(
        circuit=lowered,
        theta_total=total_zz_angle(lowered),
        zz_count=lowered.count("ZZ"),
        theta_by_pair=pair_angles(lowered),
        assignment=assign,
        mirrors_inserted=mirrors,
        gates_dropped=dropped,
    )


def reduction_ratio(theta_i: float, theta_j: float) -> float:
    """Fractional reduction ``(theta_i - theta_j) / theta_i``."""
    if theta_i == 0:
        raise ZeroDivisionError("reduction ratio undefined for a zero reference angle")
    return (theta_i - theta_j) / theta_i
