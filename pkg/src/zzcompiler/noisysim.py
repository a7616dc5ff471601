"""Statevector simulation with stochastic Pauli trajectories and coherent gate errors.

Noise model
-----------
* ``depolarizing(eps)``: after every ``R``/``U2`` gate one of X, Y, Z with
  probability ``eps/15`` each; after every ``ZZ``/``U4`` gate, independently on
  each participating qubit, each Pauli with probability ``eps/9``
  (``eps/3`` in total per qubit).
* ``dephasing(eps)``: gates are list-scheduled as soon as possible per qubit
  (``VZ`` takes no time, ``R``/``U2`` take ``t_1q``, ``ZZ``/``U4`` take ``t_zz``).
  Before every timed gate, and once more at the end, each qubit receives ``Z``
  with probability ``(1 - exp(-dt eps / t_zz)) / 2`` where ``dt`` is the time
  elapsed since its previous dephasing event.
* coherent channels deterministically rewrite gates, see :func:`perturb_gates`.

Random numbers
--------------
Circuit ``k`` of a batch uses ``make_rng(seed, k)``.  The number and order of
draws depend only on the circuit structure and the shot count, never on the
rates, so sweeps over ``eps`` use common random numbers: uniforms are drawn for
every error location even when the rate is zero, then one more uniform per
shot selects the measured outcome by inverse-CDF.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate, SchemaError, apply_gate, final_state, permute_wires
from .matcore import MAX_QUBITS, XX, make_rng
from .synth import PI, r_phi
from .validation import check_n_qubits, check_probabilities

STOCHASTIC_CHANNELS = ("depolarizing", "dephasing")
COHERENT_CHANNELS = ("zz_overrotation", "sq_overrotation", "sq_phase_proportional", "wrapper_phase")
T_ZZ_US = 250.0
T_1Q_US = 10.0


@dataclass(frozen=True)
class NoiseSpec:
    stochastic: str | None = None
    eps: float = 0.0
    coherent: dict = field(default_factory=dict)
    t_zz: float = T_ZZ_US
    t_1q: float = T_1Q_US
    seed: int = 0

    def __post_init__(self):
        if self.stochastic is not None and self.stochastic not in STOCHASTIC_CHANNELS:
            raise ValueError(f"stochastic channel must be one of {STOCHASTIC_CHANNELS} or None")
        if self.eps < 0:
            raise ValueError("stochastic rate must be >= 0")
        for name, value in self.coherent.items():
            if name not in COHERENT_CHANNELS:
                raise ValueError(f"unknown coherent channel {name!r}")
            if value < 0:
                raise ValueError(f"coherent rate for {name} must be >= 0")
        if self.t_zz <= 0 or self.t_1q < 0:
            raise ValueError("gate durations must be positive")
        object.__setattr__(self, "coherent", dict(self.coherent))

    @property
    def is_stochastic(self) -> bool:
        return self.stochastic is not None

    def with_rates(self, eps: float | None = None, coherent: dict | None = None) -> "NoiseSpec":
        return NoiseSpec(
            self.stochastic,
            self.eps if eps is None else eps,
            self.coherent if coherent is None else coherent,
            self.t_zz,
            self.t_1q,
            self.seed,
        )

    def to_dict(self) -> dict:
        stoch = None if self.stochastic is None else {"channel": self.stochastic, "eps": self.eps}
        return {
            "stochastic": stoch,
            "coherent": dict(self.coherent),
            "t_zz": self.t_zz,
            "t_1q": self.t_1q,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseSpec":
        if not isinstance(doc, dict):
            raise SchemaError("noise document must be a JSON object")
        stoch = doc.get("stochastic")
        try:
            channel, eps = (None, 0.0) if stoch is None else (stoch["channel"], float(stoch["eps"]))
            return cls(
                channel,
                eps,
                {k: float(v) for k, v in doc.get("coherent", {}).items()},
                float(doc.get("t_zz", T_ZZ_US)),
                float(doc.get("t_1q", T_1Q_US)),
                int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad noise document: {exc}") from None

    @classmethod
    def load(cls, path) -> "NoiseSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True, eq=False)
class OutputDistribution:
    """Probabilities over ``2^n`` outcomes in logical bit order; ``counts`` when sampled."""

    n: int
    probs: np.ndarray
    counts: np.ndarray | None = None
    shots: int = 0

    def __post_init__(self):
        p = check_probabilities(self.probs, atol=1e-12 if self.counts is None else 1e-9)
        if p.size != 2**self.n:
            raise ValueError(f"expected {2**self.n} probabilities, got {p.size}")
        object.__setattr__(self, "probs", p)
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=np.int64)
            if counts.sum() != self.shots:
                raise ValueError("counts must sum to shots")
            object.__setattr__(self, "counts", counts)

    @classmethod
    def exact(cls, probs) -> "OutputDistribution":
        p = np.asarray(probs, dtype=float)
        n = int(round(np.log2(p.size)))
        return cls(n, p / p.sum())

    @classmethod
    def from_counts(cls, counts, n: int | None = None) -> "OutputDistribution":
        """From a dense count vector or a ``{"bitstring": count}`` mapping."""
        if isinstance(counts, dict):
            if not counts and n is None:
                raise ValueError("cannot infer n from an empty count map")
            n = n if n is not None else len(next(iter(counts)))
            vec = np.zeros(2**n, dtype=np.int64)
            for bits, k in counts.items():
                if len(bits) != n or set(bits) - {"0", "1"}:
                    raise ValueError(f"bad bitstring {bits!r}")
                vec[int(bits, 2)] += int(k)
        else:
            vec = np.asarray(counts, dtype=np.int64)
            n = int(round(np.log2(vec.size)))
        shots = int(vec.sum())
        if shots <= 0:
            raise ValueError("empty distribution")
        return cls(n, vec / shots, vec, shots)

    def count_map(self) -> dict[str, int]:
        if self.counts is None:
            raise ValueError("exact distribution has no counts")
        return {format(i, f"0{self.n}b"): int(k) for i, k in enumerate(self.counts) if k}

    def to_json(self) -> str:
        return json.dumps(self.count_map(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "count"])
        for bits, k in sorted(self.count_map().items()):
            w.writerow([bits, k])
        return buf.getvalue()


# --------------------------------------------------------------------------
# coherent channels


def wrapper(eps: float = 0.0, dagger: bool = False) -> np.ndarray:
    """Wrapper ``R_{pi/2 + eps pi}(+-pi/2)``; maps the XX interaction onto ZZ at ``eps = 0``."""
    return r_phi(PI / 2 + eps * PI, -PI / 2 if dagger else PI / 2)


def wrapped_zz(theta: float, eps: float) -> np.ndarray:
    """``(V^dag ⊗ V^dag) exp(i theta XX / 2) (V ⊗ V)`` with wrapper phases offset by ``eps pi``."""
    v = wrapper(eps)
    vd = wrapper(eps, dagger=True)
    core = np.cos(theta / 2) * np.eye(4) + 1j * np.sin(theta / 2) * XX
    return np.kron(vd, vd) @ core @ np.kron(v, v)


def perturb_gates(c: Circuit, coherent: dict) -> Circuit:
    """Apply the coherent error channels in ``coherent`` (name -> eps) to every gate."""
    for name in coherent:
        if name not in COHERENT_CHANNELS:
            raise ValueError(f"unknown coherent channel {name!r}")
    e_zz = coherent.get("zz_overrotation", 0.0)
    e_sq = coherent.get("sq_overrotation", 0.0)
    e_ph = coherent.get("sq_phase_proportional", 0.0)
    wrap = "wrapper_phase" in coherent
    e_w = coherent.get("wrapper_phase", 0.0)
    out = []
    for g in c.gates:
        if g.kind == "ZZ":
            theta = (1 + e_zz) * g.params[0]
            if wrap:
                out.append(Gate.u4(wrapped_zz(theta, e_w), *g.qubits))
            else:
                out.append(Gate.zz(theta, *g.qubits))
        elif g.kind == "R":
            phi, theta = g.params
            out.append(Gate.r(phi + e_ph * theta, (1 + e_sq) * theta, g.qubits[0]))
        else:
            out.append(g)
    return c.replace(gates=out)


# --------------------------------------------------------------------------
# exact simulation


def ideal_distribution(c: Circuit) -> OutputDistribution:
    """``|<q|U|0...0>|^2`` in logical bit order."""
    psi = final_state(c)
    p = np.abs(psi) ** 2
    return OutputDistribution(c.n_qubits, p / p.sum())


# --------------------------------------------------------------------------
# trajectories


def _apply_paulis(states: np.ndarray, q: int, codes: np.ndarray) -> np.ndarray:
    """Apply per-shot Pauli ``codes`` (0=I, 1=X, 2=Y, 3=Z) on qubit ``q``; Y up to phase.

    Only the affected shots are touched; ``states`` is modified in place.
    """
    hit = np.flatnonzero(codes)
    if hit.size == 0:
        return states
    sub = np.moveaxis(states[hit], q + 1, 1)  # (hits, 2, ...)
    c = codes[hit]
    z = (c == 2) | (c == 3)
    sub[z, 1] *= -1.0
    x = (c == 1) | (c == 2)
    sub[x] = sub[x][:, ::-1]
    states[hit] = np.moveaxis(sub, 1, q + 1)
    return states


def _pauli_codes(u: np.ndarray, v: np.ndarray, p_each: float) -> np.ndarray:
    """X, Y, Z each with probability ``p_each``.

    ``u`` decides whether an error occurs and ``v`` which Pauli, so the set of
    error events grows monotonically with the rate for fixed draws.
    """
    hit = u < 3 * p_each
    return np.where(hit, 1 + np.minimum((3 * v).astype(int), 2), 0)


def _duration(g: Gate, noise: NoiseSpec) -> float:
    if g.kind == "VZ":
        return 0.0
    return noise.t_zz if g.is_two_qubit else noise.t_1q


def _measure(states: np.ndarray, u: np.ndarray) -> np.ndarray:
    shots = states.shape[0]
    probs = np.abs(states.reshape(shots, -1)) ** 2
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    idx = (cdf <= u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def _exact_counts(c: Circuit, shots: int, rng) -> np.ndarray:
    p = ideal_distribution(c).probs
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.bincount(np.minimum(idx, p.size - 1), minlength=p.size)


def _trajectories(c: Circuit, noise: NoiseSpec, shots: int, rng) -> np.ndarray:
    n = c.n_qubits
    states = np.zeros((shots,) + (2,) * n, dtype=complex)
    states[(slice(None),) + (0,) * n] = 1.0
    dephasing = noise.stochastic == "dephasing"
    eps = noise.eps
    clock = np.zeros(n)  # ASAP finish time per qubit
    mark = np.zeros(n)  # last dephasing event per qubit

    def dephase(q, now):
        nonlocal states
        p = 0.5 * (1.0 - np.exp(-(now - mark[q]) * eps / noise.t_zz))
        mark[q] = now
        flips = rng.random(shots) < p
        states = _apply_paulis(states, q, np.where(flips, 3, 0))

    for g in c.gates:
        if dephasing:
            dt = _duration(g, noise)
            if dt > 0:
                start = max(clock[q] for q in g.qubits)
                for q in g.qubits:
                    dephase(q, start)
                    clock[q] = start + dt
        states = apply_gate(states, g.unitary(), g.qubits)
        if noise.stochastic == "depolarizing" and g.kind != "VZ":
            p_each = eps / 9 if g.is_two_qubit else eps / 15
            for q in g.qubits:
                u, v = rng.random((2, shots))
                states = _apply_paulis(states, q, _pauli_codes(u, v, p_each))
    if dephasing:
        end = clock.max()
        for q in range(n):
            dephase(q, end)
    states = permute_wires(states, c.out_perm)
    idx = _measure(states, rng.random(shots))
    return np.bincount(idx, minlength=2**n)


def sample(
    c: Circuit, noise: NoiseSpec | None = None, shots: int = 200, circuit_index: int = 0
) -> OutputDistribution:
    """Sample ``shots`` measurement outcomes of ``c`` under ``noise``.

    Deterministic in ``(c, noise, shots, circuit_index)``; the stream is
    ``make_rng(noise.seed, circuit_index)``.
    """
    noise = noise or NoiseSpec()
    check_n_qubits(c.n_qubits, MAX_QUBITS)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = make_rng(noise.seed, circuit_index)
    noisy = perturb_gates(c, noise.coherent) if noise.coherent else c
    if noise.is_stochastic:
        counts = _trajectories(noisy, noise, shots, rng)
    else:
        counts = _exact_counts(noisy, shots, rng)
    return OutputDistribution.from_counts(counts)


def sample_many(circuits, noise: NoiseSpec | None = None, shots: int = 200) -> list[OutputDistribution]:
    return [sample(c, noise, shots, i) for i, c in enumerate(circuits)]
