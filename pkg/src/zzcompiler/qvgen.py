"""Quantum-volume model circuits.

Each layer draws a uniform permutation of the register, pairs consecutive
entries, and applies an independent Haar-random SU(4) block to every pair.
Random draws are consumed layer-major, pair-minor from one Philox stream
(``make_rng(seed)``): ``permutation`` first, then one Haar sample per pair.
"""
from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Gate
from .matcore import haar_random_su4, make_rng


@dataclass(frozen=True)
class QvSpec:
    n: int
    depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("quantum volume circuits need n >= 2")
        if self.depth is None:
            object.__setattr__(self, "depth", self.n)
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


def layer_pairs(perm) -> list[tuple[int, int]]:
    return [(int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(len(perm) // 2)]


def _build(rng, n: int, depth: int) -> Circuit:
    gates = []
    for _ in range(depth):
        perm = rng.permutation(n)
        for a, b in layer_pairs(perm):
            gates.append(Gate.u4(haar_random_su4(rng), a, b))
    return Circuit(n, gates)


def generate(spec: QvSpec) -> Circuit:
    return _build(make_rng(spec.seed), spec.n, spec.depth)


def generate_many(n: int, count: int, seed: int = 0, depth: int | None = None) -> list[Circuit]:
    """``count`` circuits; circuit ``i`` draws from the child stream ``(seed, i)``."""
    spec = QvSpec(n, depth, seed)
    return [_build(make_rng(seed, i), n, spec.depth) for i in range(count)]
