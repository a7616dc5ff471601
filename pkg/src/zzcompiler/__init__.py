"""Noise-aware compiler, QV generator, noisy simulator and heavy-output statistics
for a trapped-ion gateset of ``R_phi(theta)``, virtual ``Z`` and arbitrary-angle ``ZZ(theta)``."""

__version__ = "0.1.0"

from .analysis import (
    HeavyResult,
    HellingerResult,
    RateEstimate,
    circuits_to_certify,
    estimate_coherent_rate,
    estimate_stochastic_rate,
    h_aware,
    h_unaware,
    hellinger_infidelity,
    offloading_ratio,
    welch_t,
    wilson_lower,
)
from .circuit import Circuit, Gate, PairAngles, SchemaError, circuit_unitary, load_circuit, remap_bits, save_circuit
from .matcore import haar_random_su4, make_rng, unitary_distance
from .noisysim import NoiseSpec, OutputDistribution, ideal_distribution, perturb_gates, sample
from .pipeline import CompileOptions, CompileReport, ErrorMatrix, compile_circuit, reduction_ratio
from .qvgen import QvSpec, generate
from .synth import KakFactors, WeylCoords, emit_native, euler_zxz, kak_decompose, mirror_coords, zz_cost

__all__ = [name for name in dir() if not name.startswith("_")]
