"""scikit-learn style wrappers: ``X`` is a sequence of circuits throughout."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analysis import (
    DEFAULT_COHERENT_GRID,
    DEFAULT_STOCHASTIC_GRID,
    RateEstimate,
    estimate_coherent_rate,
    estimate_stochastic_rate,
    h_aware,
    h_unaware,
)
from .noisysim import NoiseSpec, ideal_distribution, sample
from .pipeline import CompileOptions, compile_circuit
from .validation import check_circuits


class ZZCompiler(TransformerMixin, BaseEstimator):
    """Compile circuits to the native gateset; ``reports_`` holds the last batch's reports."""

    def __init__(
        self,
        gateset="parameterized",
        mirror=False,
        theta_min=0.0,
        ranking=None,
        assignment_strategy="brute_force",
        drop_diagonals=True,
    ):
        self.gateset = gateset
        self.mirror = mirror
        self.theta_min = theta_min
        self.ranking = ranking
        self.assignment_strategy = assignment_strategy
        self.drop_diagonals = drop_diagonals

    def fit(self, X=None, y=None):
        self.options_ = CompileOptions(
            self.gateset,
            self.mirror,
            self.theta_min,
            self.ranking,
            self.assignment_strategy,
            self.drop_diagonals,
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "options_")
        self.reports_ = [compile_circuit(c, self.options_) for c in check_circuits(X)]
        return [r.circuit for r in self.reports_]


class NoisySampler(TransformerMixin, BaseEstimator):
    """Circuits -> sampled :class:`OutputDistribution` list (circuit ``i`` on stream ``(seed, i)``)."""

    def __init__(self, stochastic=None, eps=0.0, coherent=None, shots=200, seed=0, t_zz=250.0, t_1q=10.0):
        self.stochastic = stochastic
        self.eps = eps
        self.coherent = coherent
        self.shots = shots
        self.seed = seed
        self.t_zz = t_zz
        self.t_1q = t_1q

    def fit(self, X=None, y=None):
        self.noise_ = NoiseSpec(self.stochastic, self.eps, self.coherent or {}, self.t_zz, self.t_1q, self.seed)
        return self

    def transform(self, X):
        check_is_fitted(self, "noise_")
        return [sample(c, self.noise_, self.shots, i) for i, c in enumerate(check_circuits(X))]


class StochasticRateEstimator(BaseEstimator):
    """Fit a stochastic rate to a measured mean ``h_U``; ``predict`` gives per-circuit ``h_U``."""

    def __init__(self, channel="depolarizing", shots=200, seed=0, grid=DEFAULT_STOCHASTIC_GRID, tol=1e-4, fit_points=7):
        self.channel = channel
        self.shots = shots
        self.seed = seed
        self.grid = grid
        self.tol = tol
        self.fit_points = fit_points

    def fit(self, X, y):
        target = float(np.mean(y))
        self.estimate_ = estimate_stochastic_rate(
            target, check_circuits(X), self.channel, self.shots, self.seed, self.grid, self.tol, self.fit_points
        )
        self.eps_ = self.estimate_.eps_hat
        return self

    def predict(self, X):
        check_is_fitted(self, "eps_")
        noise = NoiseSpec(self.channel, self.eps_, seed=self.seed)
        return np.array([h_unaware(sample(c, noise, self.shots, i)) for i, c in enumerate(check_circuits(X))])


class CoherentRateEstimator(BaseEstimator):
    """Fit a coherent rate to a measured mean ``h_A`` with a fixed stochastic background."""

    def __init__(
        self,
        channel="wrapper_phase",
        stochastic_channel=None,
        stochastic_eps=0.0,
        shots=200,
        seed=0,
        grid=DEFAULT_COHERENT_GRID,
        tol=1e-4,
        fit_points=7,
    ):
        self.channel = channel
        self.stochastic_channel = stochastic_channel
        self.stochastic_eps = stochastic_eps
        self.shots = shots
        self.seed = seed
        self.grid = grid
        self.tol = tol
        self.fit_points = fit_points

    def _background(self):
        if self.stochastic_channel is None:
            return None
        return RateEstimate(self.stochastic_channel, self.stochastic_eps, 0.0, float("nan"))

    def fit(self, X, y):
        target = float(np.mean(y))
        self.estimate_ = estimate_coherent_rate(
            target,
            check_circuits(X),
            self.channel,
            self._background(),
            self.shots,
            self.seed,
            self.grid,
            self.tol,
            self.fit_points,
        )
        self.eps_ = self.estimate_.eps_hat
        return self

    def predict(self, X):
        check_is_fitted(self, "eps_")
        noise = NoiseSpec(self.stochastic_channel, self.stochastic_eps, {self.channel: self.eps_}, seed=self.seed)
        circuits = check_circuits(X)
        return np.array(
            [h_aware(sample(c, noise, self.shots, i), ideal_distribution(c)) for i, c in enumerate(circuits)]
        )
