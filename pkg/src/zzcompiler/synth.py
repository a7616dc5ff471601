"""Single-qubit Euler and two-qubit KAK synthesis into the ZZ gateset.

Conventions
-----------
* ``VZ(t) = exp(i t Z / 2)``, ``R_phi(t) = VZ(-phi) exp(i t X / 2) VZ(phi)``,
  ``ZZ(t) = exp(i t Z⊗Z / 2)``.
* The canonical interaction is ``N(x, y, z) = exp(i (x XX + y YY + z ZZ))``
  with ``pi/4 >= x >= y >= |z| >= 0``.  Each coordinate ``c`` costs one
  hardware ``ZZ(2c)``, so the entangling cost of a class is
  ``2 (x + y + |z|)``.
* Two-qubit matrices act on ``|q1 q2>`` with ``q1`` the more significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import SWAP, XX, YY, ZZ, I2, X, Y, Z, dagger, kron, rx, ry, rz
from .validation import check_unitary

PI = np.pi
QUARTER = PI / 4
WALL_TOL = 1e-9
ELIDE_TOL = 1e-9

_MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]]
) / np.sqrt(2)
_MAGIC_DAG = _MAGIC.conj().T
# Phases of N(x, y, z) in the magic basis are _SIGNS @ (x, y, z).
_SIGNS = np.array([[1, -1, 1], [1, 1, -1], [-1, -1, -1], [-1, 1, 1]], dtype=float)
_PHASE_SYSTEM = np.hstack([_SIGNS, np.ones((4, 1))])
_PAIR_PAULIS = (XX, YY, ZZ)


@dataclass(frozen=True)
class EulerAngles:
    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return vz(self.gamma) @ expx(self.beta) @ vz(self.alpha)


@dataclass(frozen=True)
class WeylCoords:
    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def in_chamber(self, atol: float = 1e-12) -> bool:
        x, y, z = self.as_tuple()
        return QUARTER + atol >= x >= y - atol and y + atol >= abs(z) and abs(z) >= 0

    def interaction(self) -> np.ndarray:
        return interaction(self.x, self.y, self.z)


@dataclass(frozen=True, eq=False)
class KakFactors:
    """``u = exp(i phase) (c ⊗ d) N(coords) (a ⊗ b)``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    coords: WeylCoords
    phase: float = 0.0

    def matrix(self) -> np.ndarray:
        return (
            np.exp(1j * self.phase)
            * kron(self.c, self.d)
            @ self.coords.interaction()
            @ kron(self.a, self.b)
        )


def vz(theta: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])


def expx(theta: float) -> np.ndarray:
    return rx(-theta)


def r_phi(phi: float, theta: float) -> np.ndarray:
    return vz(-phi) @ expx(theta) @ vz(phi)


def zz_matrix(theta: float) -> np.ndarray:
    p = np.exp(0.5j * theta)
    q = np.exp(-0.5j * theta)
    return np.diag([p, q, q, p])


def interaction(x: float, y: float, z: float) -> np.ndarray:
    phases = _SIGNS @ np.array([x, y, z])
    return _MAGIC @ np.diag(np.exp(1j * phases)) @ _MAGIC_DAG


# --------------------------------------------------------------------------
# single qubit


def euler_zxz(u) -> EulerAngles:
    """Angles with ``u ≐ VZ(gamma) expX(beta) VZ(alpha)`` and ``beta`` in ``[0, pi]``."""
    u = check_unitary(u, 2)
    v = u / np.sqrt(np.linalg.det(u))
    c = abs(v[0, 0])
    s = abs(v[1, 0])
    beta = 2.0 * np.arctan2(s, c)
    if s < 1e-12:
        return EulerAngles(0.0, 0.0, _wrap(2.0 * np.angle(v[0, 0])))
    if c < 1e-12:
        return EulerAngles(0.0, PI, _wrap(2.0 * (np.angle(v[0, 1]) - PI / 2)))
    plus = 2.0 * np.angle(v[0, 0])
    minus = 2.0 * (np.angle(v[0, 1]) - PI / 2)
    return EulerAngles(_wrap((plus - minus) / 2), beta, _wrap((plus + minus) / 2))


def _wrap(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = (theta + PI) % (2 * PI) - PI
    return PI if np.isclose(t, -PI, atol=1e-15) else float(t)


def is_diagonal(u: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.all(np.abs(u - np.diag(np.diagonal(u))) < atol))


# --------------------------------------------------------------------------
# two qubit


def _local_factors(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 tensor-product unitary into ``a ⊗ b`` with ``det a = 1``."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    a = np.sqrt(s[0]) * uu[:, 0].reshape(2, 2)
    b = np.sqrt(s[0]) * vh[0].reshape(2, 2)
    ph = np.sqrt(np.linalg.det(a))
    return a / ph, b * ph


def _real_orthogonal_eigvecs(s: np.ndarray) -> np.ndarray:
    """Real orthogonal ``P`` (det +1) diagonalising the complex symmetric unitary ``s``."""
    re, im = s.real, s.imag
    for t in (0.7137, 1.9312, 2.6203, 0.2411, 3.0137):
        _, p = np.linalg.eigh(np.cos(t) * re + np.sin(t) * im)
        d = p.T @ s @ p
        if np.max(np.abs(d - np.diag(np.diagonal(d)))) < 1e-9:
            if np.linalg.det(p) < 0:
                p[:, 0] = -p[:, 0]
            return p
    raise ArithmeticError("KAK eigendecomposition did not converge")


def _clifford_permuters() -> dict[tuple[int, int, int], np.ndarray]:
    """Local ``V`` with ``V N(c) V^dag = N(c[perm])`` for each coordinate permutation."""
    candidates = [
        I2,
        rz(PI / 2),
        rx(PI / 2),
        ry(PI / 2),
        rz(PI / 2) @ rx(PI / 2),
        rx(PI / 2) @ rz(PI / 2),
    ]
    paulis = (X, Y, Z)
    out = {}
    for v in candidates:
        # index of the Pauli each axis is mapped onto
        image = []
        for p in paulis:
            q = v @ p @ dagger(v)
            image.append(next(k for k, r in enumerate(paulis) if abs(abs(np.vdot(r, q)) - 2) < 1e-9))
        # V P_k V^dag = ±P_image[k]  =>  V N(c) V^dag = N(c') with c'[image[k]] = c[k]
        perm = tuple(image.index(j) for j in range(3))
        out.setdefault(perm, kron(v, v))
    assert len(out) == 6
    return out


_PERMUTERS = _clifford_permuters()
# Q ⊗ I flips the sign of the two coordinates whose Paulis anticommute with Q.
_NEGATORS = {(0, 1): kron(Z, I2), (0, 2): kron(Y, I2), (1, 2): kron(X, I2)}


def _canonicalize(coords, left, right, phase):
    """Move ``(x, y, z)`` into the Weyl chamber, updating ``left``/``right`` so that
    ``exp(i phase) left N(coords) right`` is unchanged."""
    c = np.array(coords, dtype=float)

    def shift(k, m):
        nonlocal right, phase
        # N(c) = N(c - m pi/2 e_k) (i P_k P_k)^m
        if m:
            c[k] -= m * PI / 2
            right = np.linalg.matrix_power(_PAIR_PAULIS[k], m % 2) @ right
            phase += m * PI / 2

    for k in range(3):
        m = int(np.floor((c[k] + QUARTER) / (PI / 2)))
        if c[k] - m * PI / 2 <= -QUARTER + WALL_TOL:
            m -= 1
        shift(k, m)

    order = tuple(sorted(range(3), key=lambda k: (-abs(c[k]), k)))
    if order != (0, 1, 2):
        # N(c) = V^dag N(c[order]) V
        v = _PERMUTERS[order]
        c = c[list(order)]
        left = left @ dagger(v)
        right = v @ right

    def negate(i, j):
        nonlocal left, right
        q = _NEGATORS[(i, j)]
        c[i], c[j] = -c[i], -c[j]
        left = left @ q
        right = q @ right

    if c[0] < 0:
        negate(0, 2)
    if c[1] < 0:
        negate(1, 2)
    if abs(c[0] - QUARTER) < WALL_TOL and c[2] < -WALL_TOL:
        shift(0, 1)
        negate(0, 2)

    x, y, z = c
    if abs(x - QUARTER) < WALL_TOL:
        x = QUARTER
    if abs(y - x) < WALL_TOL:
        y = x
    if abs(z) < WALL_TOL:
        z = 0.0
    if abs(abs(z) - y) < WALL_TOL:
        z = np.copysign(y, z)
    if abs(y) < WALL_TOL:
        y = 0.0
    if abs(x) < WALL_TOL:
        x = 0.0
    if x == QUARTER and z < 0:
        z = -z
    return WeylCoords(float(x), float(y), float(z)), left, right, phase


def kak_decompose(u) -> KakFactors:
    """Cartan decomposition ``u ≐ (c ⊗ d) N(x, y, z) (a ⊗ b)`` with canonical coordinates."""
    u = check_unitary(u, 4)
    det = np.linalg.det(u)
    phase = float(np.angle(det) / 4)
    su = u * np.exp(-1j * phase)
    m = _MAGIC_DAG @ su @ _MAGIC
    p = _real_orthogonal_eigvecs(m.T @ m)
    k = m @ p
    d = np.exp(0.5j * np.angle(np.sum(k * k, axis=0)))
    o1 = k / d
    if np.max(np.abs(o1.imag)) > 1e-6:
        raise ArithmeticError("KAK left factor is not real; degenerate input")
    o1 = o1.real
    if np.linalg.det(o1) < 0:
        o1[:, 0] = -o1[:, 0]
        d[0] = -d[0]
    sol = np.linalg.solve(_PHASE_SYSTEM, np.angle(d))
    left = _MAGIC @ o1 @ _MAGIC_DAG
    right = _MAGIC @ p.T @ _MAGIC_DAG
    coords, left, right, phase2 = _canonicalize(sol[:3], left, right, phase + sol[3])
    c_, d_ = _local_factors(left)
    a_, b_ = _local_factors(right)
    k = KakFactors(a_, b_, c_, d_, coords, 0.0)
    ref = k.matrix()
    rel = np.vdot(ref, u) / 4
    return KakFactors(a_, b_, c_, d_, coords, float(np.angle(rel)))


def mirror_coords(w: WeylCoords) -> WeylCoords:
    """Class of ``SWAP · U`` given the class of ``U``."""
    raw = (QUARTER - w.x, QUARTER - w.y, w.z - QUARTER)
    coords, _, _, _ = _canonicalize(raw, np.eye(4), np.eye(4), 0.0)
    return coords


def zz_cost(w: WeylCoords) -> float:
    """Total hardware ZZ angle, ``2 (x + y + |z|)``."""
    return 2.0 * (w.x + w.y + abs(w.z))


def kept_angles(w: WeylCoords, theta_min: float = 0.0) -> list[float]:
    """Hardware ZZ angles the parameterized emission keeps after thresholding."""
    out = []
    for c in w.as_tuple():
        t = 2.0 * c
        if abs(t) > ELIDE_TOL and abs(t) >= theta_min:
            out.append(t)
    return out


# --------------------------------------------------------------------------
# emission

# wrappers mapping XX and YY onto ZZ: v P v^dag = ±Z
_XX_WRAP = r_phi(PI / 2, PI / 2)
_YY_WRAP = r_phi(0.0, PI / 2)
_S = np.diag([1, 1j])
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _cnot_as_zz(control: int):
    """CNOT with the given control (0 = q1) as ``[(kind, payload)]`` in time order.

    ``CZ = exp(-i pi/4) (S ⊗ S) ZZ(pi/2)`` and ``CNOT = (1 ⊗ H) CZ (1 ⊗ H)``.
    """
    target = 1 - control
    ops = [("1q", target, _H), ("zz", PI / 2), ("1q", 0, _S), ("1q", 1, _S), ("1q", target, _H)]
    return ops


def _fixed_template(w: WeylCoords):
    """Three-CNOT circuit locally equivalent to ``N(w)``, as time-ordered ops."""
    x, y, z = w.as_tuple()
    ops = []
    ops += _cnot_as_zz(control=1)
    ops += [("1q", 0, rz(-2 * z - PI / 2)), ("1q", 1, ry(PI / 2 - 2 * x))]
    ops += _cnot_as_zz(control=0)
    ops += [("1q", 1, ry(2 * y - PI / 2))]
    ops += _cnot_as_zz(control=1)
    return ops


def _ops_matrix(ops) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    for op in ops:
        if op[0] == "zz":
            g = zz_matrix(op[1])
        else:
            g = kron(op[2], I2) if op[1] == 0 else kron(I2, op[2])
        m = g @ m
    return m


def _parameterized_ops(w: WeylCoords, theta_min: float = 0.0):
    ops = []
    for coord, wrap in ((w.z, None), (w.y, _YY_WRAP), (w.x, _XX_WRAP)):
        t = 2.0 * coord
        if abs(t) <= ELIDE_TOL:
            continue
        if wrap is None:
            ops.append(("zz", t))
        else:
            ops += [("1q", 0, wrap), ("1q", 1, wrap), ("zz", t)]
            ops += [("1q", 0, dagger(wrap)), ("1q", 1, dagger(wrap))]
    return ops


def native_ops(k: KakFactors, mode: str = "parameterized"):
    """Time-ordered ``("1q", wire, matrix)`` / ``("zz", theta)`` ops reproducing ``k``.

    Wires are 0 for the first tensor factor and 1 for the second.
    """
    w = k.coords
    if mode == "parameterized":
        core = _parameterized_ops(w)
        pre, post = kron(k.a, k.b), kron(k.c, k.d)
    elif mode == "fixed":
        if zz_cost(w) <= ELIDE_TOL:
            core = []
            pre, post = kron(k.a, k.b), kron(k.c, k.d)
        elif w.x == QUARTER and w.y == 0.0 and w.z == 0.0:
            # exp(i pi/4 XX) = (H ⊗ H) ZZ(pi/2) (H ⊗ H)
            core = [("zz", PI / 2)]
            hh = kron(_H, _H)
            pre, post = hh @ kron(k.a, k.b), kron(k.c, k.d) @ hh
        else:
            # N = L_t^dag T R_t^dag where T = L_t N R_t is the template
            core = _fixed_template(w)
            t = kak_decompose(_ops_matrix(core))
            if max(abs(p - q) for p, q in zip(t.coords.as_tuple(), w.as_tuple())) > 1e-7:
                raise ArithmeticError("fixed template landed in the wrong Weyl class")
            pre = dagger(kron(t.a, t.b)) @ kron(k.a, k.b)
            post = kron(k.c, k.d) @ dagger(kron(t.c, t.d))
    else:
        raise ValueError(f"unknown gateset mode {mode!r}")
    pa, pb = _local_factors(pre)
    qa, qb = _local_factors(post)
    return [("1q", 0, pa), ("1q", 1, pb)] + core + [("1q", 0, qa), ("1q", 1, qb)]


def emit_native(k: KakFactors, mode: str = "parameterized", pair: tuple[int, int] = (0, 1)):
    """Gate list (``U2`` locals and ``ZZ`` entanglers) acting on ``pair``."""
    from .circuit import Gate

    gates = []
    for op in native_ops(k, mode):
        if op[0] == "zz":
            gates.append(Gate.zz(op[1], pair[0], pair[1]))
        else:
            gates.append(Gate.u2(op[2], pair[op[1]]))
    return gates


def mirrored(u: np.ndarray) -> np.ndarray:
    return SWAP @ u
