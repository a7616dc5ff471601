import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from zzcompiler.analysis import h_unaware
from zzcompiler.circuit import Circuit
from zzcompiler.estimators import CoherentRateEstimator, NoisySampler, StochasticRateEstimator, ZZCompiler
from zzcompiler.noisysim import NoiseSpec, OutputDistribution, sample
from zzcompiler.qvgen import generate_many


@pytest.fixture(scope="module")
def circuits():
    return generate_many(4, 12, seed=31)


def test_compiler_transform(circuits):
    est = ZZCompiler(mirror=True)
    out = est.fit_transform(circuits)
    assert len(out) == len(est.reports_) == 12
    assert all(isinstance(c, Circuit) for c in out)
    assert all({g.kind for g in c.gates} <= {"R", "VZ", "ZZ"} for c in out)
    assert est.get_params()["mirror"] is True
    assert clone(est).get_params() == est.get_params()


def test_compiler_requires_fit(circuits):
    with pytest.raises(NotFittedError):
        ZZCompiler().transform(circuits)
    with pytest.raises(ValueError):
        ZZCompiler(gateset="fixed", mirror=True).fit()


def test_compiler_accepts_single_circuit(circuits):
    assert len(ZZCompiler().fit_transform(circuits[0])) == 1
    with pytest.raises(TypeError):
        ZZCompiler().fit().transform([1, 2])


def test_sampler_pipeline(circuits):
    pipe = make_pipeline(ZZCompiler(mirror=True), NoisySampler("depolarizing", 0.01, shots=50, seed=2))
    dists = pipe.fit_transform(circuits)
    assert all(isinstance(d, OutputDistribution) and d.shots == 50 for d in dists)
    # circuit i uses stream (seed, i)
    compiled = pipe[0].transform(circuits)
    ref = sample(compiled[3], NoiseSpec("depolarizing", 0.01, seed=2), 50, 3)
    assert np.array_equal(dists[3].counts, ref.counts)


def test_stochastic_estimator(circuits):
    compiled = ZZCompiler(mirror=True).fit_transform(circuits)
    measured = [h_unaware(d) for d in NoisySampler("depolarizing", 0.03, shots=200, seed=4).fit_transform(compiled)]
    est = StochasticRateEstimator("depolarizing", shots=200, seed=4).fit(compiled, measured)
    assert abs(est.eps_ - 0.03) / 0.03 < 0.25
    pred = est.predict(compiled)
    assert pred.shape == (12,) and abs(pred.mean() - np.mean(measured)) < 0.02
    with pytest.raises(NotFittedError):
        StochasticRateEstimator().predict(compiled)


def test_coherent_estimator(circuits):
    compiled = ZZCompiler(mirror=True).fit_transform(circuits)
    est = CoherentRateEstimator("zz_overrotation", "depolarizing", 0.01, shots=200, seed=4)
    truth = CoherentRateEstimator("zz_overrotation", "depolarizing", 0.01, shots=200, seed=4)
    truth.eps_ = 0.1
    measured = truth.predict(compiled)
    est.fit(compiled, measured)
    assert abs(est.eps_ - 0.1) < 0.03
    assert est.estimate_.channel == "zz_overrotation"
