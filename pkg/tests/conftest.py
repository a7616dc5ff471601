import numpy as np
import pytest
from hypothesis import settings

from zzcompiler.matcore import make_rng

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return make_rng(1234)


def random_circuit(rng, n: int, n_gates: int, with_zz: bool = True):
    """Mixed circuit of Haar U4 blocks, random R / VZ gates and bare ZZ gates."""
    from zzcompiler.circuit import Circuit, Gate
    from zzcompiler.matcore import haar_random_su4

    gates = []
    for _ in range(n_gates):
        kind = rng.integers(4 if with_zz else 3)
        if kind == 0:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate.u4(haar_random_su4(rng), a, b))
        elif kind == 1:
            gates.append(Gate.r(rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi, np.pi), rng.integers(n)))
        elif kind == 2:
            gates.append(Gate.vz(rng.uniform(-np.pi, np.pi), rng.integers(n)))
        else:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate.zz(rng.uniform(-np.pi, np.pi), a, b))
    return Circuit(n, gates)
