import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zzcompiler.circuit import Circuit, Gate, apply_gate, circuit_unitary
from zzcompiler.matcore import PAULIS, make_rng, unitary_distance
from zzcompiler.noisysim import (
    COHERENT_CHANNELS,
    NoiseSpec,
    OutputDistribution,
    _apply_paulis,
    _pauli_codes,
    ideal_distribution,
    perturb_gates,
    sample,
    sample_many,
    wrapped_zz,
    wrapper,
)
from zzcompiler.qvgen import generate_many
from zzcompiler.pipeline import compile_circuit
from zzcompiler.synth import zz_matrix

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def binom_ok(k, n, p, z=5.0):
    return abs(k - n * p) <= z * np.sqrt(n * p * (1 - p)) + 1


# --------------------------------------------------------------------------
# containers


def test_noise_spec_round_trip(tmp_path):
    spec = NoiseSpec("dephasing", 0.01, {"wrapper_phase": 0.02}, seed=4)
    assert NoiseSpec.from_dict(spec.to_dict()) == spec
    (tmp_path / "n.json").write_text(json.dumps(spec.to_dict()))
    assert NoiseSpec.load(tmp_path / "n.json") == spec
    assert spec.with_rates(eps=0.5).eps == 0.5


@pytest.mark.parametrize(
    "kwargs",
    [
        {"stochastic": "amplitude"},
        {"stochastic": "depolarizing", "eps": -1},
        {"coherent": {"bogus": 0.1}},
        {"coherent": {"zz_overrotation": -0.1}},
        {"t_zz": 0},
    ],
)
def test_noise_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        NoiseSpec(**kwargs)


def test_output_distribution_io():
    d = OutputDistribution.from_counts({"01": 3, "11": 1})
    assert d.n == 2 and d.shots == 4
    assert np.allclose(d.probs, [0, 0.75, 0, 0.25])
    assert d.count_map() == {"01": 3, "11": 1}
    assert json.loads(d.to_json()) == {"01": 3, "11": 1}
    assert d.to_csv().splitlines() == ["bitstring,count", "01,3", "11,1"]
    assert np.array_equal(OutputDistribution.from_counts([0, 3, 0, 1]).counts, d.counts)
    with pytest.raises(ValueError):
        OutputDistribution.from_counts({"012": 1})
    with pytest.raises(ValueError):
        OutputDistribution.from_counts([0, 0])
    with pytest.raises(ValueError):
        OutputDistribution.exact([1.0, 0.0]).count_map()
    with pytest.raises(ValueError):
        OutputDistribution(1, [0.5, 0.6])


# --------------------------------------------------------------------------
# coherent channels


def test_wrapper_identity_at_zero():
    for t in (0.1, -1.0, np.pi / 2):
        assert unitary_distance(wrapped_zz(t, 0.0), zz_matrix(t)) < 1e-12
    assert np.allclose(wrapper(0.3) @ wrapper(0.3, dagger=True), np.eye(2))


def test_perturb_zz_and_r():
    c = Circuit(2, [Gate.zz(0.4, 0, 1), Gate.r(0.2, 0.5, 0), Gate.vz(0.3, 1)])
    p = perturb_gates(c, {"zz_overrotation": 0.1, "sq_overrotation": 0.2, "sq_phase_proportional": 0.3})
    assert p.gates[0].theta == pytest.approx(0.44)
    assert p.gates[1].params == pytest.approx((0.2 + 0.3 * 0.5, 0.6))
    assert p.gates[2] is c.gates[2]
    w = perturb_gates(c, {"wrapper_phase": 0.0})
    assert w.gates[0].kind == "U4"
    assert unitary_distance(circuit_unitary(w), circuit_unitary(c)) < 1e-12
    with pytest.raises(ValueError):
        perturb_gates(c, {"bogus": 1})


@pytest.mark.parametrize("channel", COHERENT_CHANNELS)
def test_coherent_channels_change_the_circuit(channel):
    c = generate_many(3, 1, seed=1)[0]
    nat = compile_circuit(c).circuit
    assert unitary_distance(circuit_unitary(perturb_gates(nat, {channel: 0.05})), circuit_unitary(nat)) > 1e-6


# --------------------------------------------------------------------------
# stochastic channels


@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_sparse_paulis_match_dense(seed, q):
    rng = make_rng(seed)
    states = rng.standard_normal((6, 2, 2, 2, 2)) + 1j * rng.standard_normal((6, 2, 2, 2, 2))
    codes = rng.integers(0, 4, 6)
    got = _apply_paulis(states.copy(), q, codes)
    for s in range(6):
        ref = apply_gate(states[s : s + 1], PAULIS[codes[s]], (q,))
        # Y is applied up to a global phase
        ph = np.vdot(ref.ravel(), got[s].ravel())
        assert abs(abs(ph) - np.vdot(ref.ravel(), ref.ravel()).real) < 1e-9


def test_pauli_codes_nest_with_rate():
    rng = make_rng(0)
    u, v = rng.random((2, 10000))
    lo, hi = _pauli_codes(u, v, 0.01), _pauli_codes(u, v, 0.05)
    assert np.all((lo == 0) | (lo == hi))
    assert binom_ok((hi > 0).sum(), 10000, 0.15)
    assert binom_ok((hi == 2).sum(), 10000, 0.05)


def test_depolarizing_single_qubit_flip_rate():
    # X or Y flips |0>: probability 2 eps / 15
    c = Circuit(1, [Gate.r(0.0, 0.0, 0)])
    d = sample(c, NoiseSpec("depolarizing", 1.0), shots=20000)
    assert binom_ok(d.counts[1], 20000, 2 / 15)


def test_depolarizing_two_qubit_flip_rate():
    # each qubit of a ZZ gate flips with probability 2 eps / 9, independently
    c = Circuit(2, [Gate.zz(0.0, 0, 1)])
    d = sample(c, NoiseSpec("depolarizing", 0.9), shots=20000)
    p = 0.2
    assert binom_ok(d.counts[1], 20000, p * (1 - p))
    assert binom_ok(d.counts[3], 20000, p * p)


def test_dephasing_rate():
    # |+>, idle one step, then H back: P(1) = (1 - exp(-dt eps / t_zz)) / 2
    c = Circuit(1, [Gate.u2(H, 0), Gate.u2(H, 0)])
    noise = NoiseSpec("dephasing", 0.5, t_zz=100.0, t_1q=100.0)
    d = sample(c, noise, shots=20000)
    assert binom_ok(d.counts[1], 20000, (1 - np.exp(-0.5)) / 2)


def test_dephasing_schedule_is_asap():
    # qubit 1 sits idle while qubit 0 runs two gates; it dephases over the full window
    c = Circuit(2, [Gate.u2(H, 1), Gate.r(0, 0.1, 0), Gate.r(0, 0.1, 0), Gate.zz(0.0, 0, 1), Gate.u2(H, 1)])
    noise = NoiseSpec("dephasing", 1.0, t_zz=10.0, t_1q=10.0)
    d = sample(c, noise, shots=20000)
    p1 = d.probs.reshape(2, 2).sum(axis=0)[1]
    # Z errors on qubit 1 at t=10 (idle 0..10) and t=20 (idle 10..20); ZZ commutes with Z
    q = (1 - np.exp(-1.0)) / 2
    expect = 2 * q * (1 - q)
    # plus the ZZ duration (t=20..30) before the final H
    expect = expect * (1 - q) + (1 - expect) * q
    assert abs(p1 - expect) < 0.015


def test_zero_rate_matches_ideal():
    c = generate_many(3, 1, seed=5)[0]
    ideal = ideal_distribution(c).probs
    for ch in ("depolarizing", "dephasing"):
        d = sample(c, NoiseSpec(ch, 0.0), shots=20000)
        assert 0.5 * np.abs(d.probs - ideal).sum() < 0.03


def test_exact_sampling_statistics():
    c = generate_many(3, 1, seed=6)[0]
    ideal = ideal_distribution(c).probs
    d = sample(c, shots=50000)
    assert np.all([binom_ok(k, 50000, p) for k, p in zip(d.counts, ideal)])


def test_determinism_and_streams():
    c = generate_many(3, 1, seed=7)[0]
    noise = NoiseSpec("depolarizing", 0.05, seed=3)
    a = sample(c, noise, 100, circuit_index=2)
    assert np.array_equal(a.counts, sample(c, noise, 100, circuit_index=2).counts)
    assert not np.array_equal(a.counts, sample(c, noise, 100, circuit_index=3).counts)
    batch = sample_many([c, c, c], noise, 100)
    assert np.array_equal(batch[2].counts, a.counts)


def test_sample_validation():
    c = Circuit(2)
    with pytest.raises(ValueError):
        sample(c, shots=0)
    with pytest.raises(ValueError):
        sample(Circuit(9))


def test_out_perm_applied_before_measurement():
    c = Circuit(2, [Gate.u2(np.array([[0, 1], [1, 0]]), 0)], out_perm=(1, 0))
    assert sample(c, NoiseSpec("depolarizing", 0.0), 10).counts[0b01] == 10
    assert ideal_distribution(c).probs[0b01] == pytest.approx(1)
