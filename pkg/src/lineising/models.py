"""scikit-learn style front ends: fit on a graph, then sample or read off log Z."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .chains import ChainConfig, draw_samples
from .estimator import default_burn_in, estimate_Z
from .oracle import half_edge_log_weights
from .validation import check_graph, check_params, check_seed


def _kind(chain: str) -> str:
    kind = chain.replace("-", "_")
    if kind not in ("half_edge", "glauber"):
        raise ValueError("chain must be 'glauber' or 'half-edge'")
    return kind


class LineGraphIsingSampler(BaseEstimator):
    """Draw Ising configurations on the line graph of a fitted graph.

    Samples are edge spin vectors of the underlying graph, one row each.
    """

    def __init__(self, beta=1.0, nu=0.0, chain="glauber", burn_in=None, thin=None,
                 replicas=1, n_jobs=1, random_state=0):
        self.beta = beta
        self.nu = nu
        self.chain = chain
        self.burn_in = burn_in
        self.thin = thin
        self.replicas = replicas
        self.n_jobs = n_jobs
        self.random_state = random_state

    def fit(self, X, y=None):
        self.graph_ = check_graph(X)
        if self.graph_.m == 0:
            raise ValueError("graph has no edges")
        self.params_ = check_params(self.graph_, self.beta, self.nu)
        self.kind_ = _kind(self.chain)
        self.seed_ = check_seed(self.random_state)
        self.n_features_in_ = self.graph_.m
        return self

    def sample(self, n_samples=1):
        check_is_fitted(self, "graph_")
        g = self.graph_
        cfg = ChainConfig(self.kind_, steps=0, seed=self.seed_,
                          burn_in=default_burn_in(g) if self.burn_in is None else self.burn_in,
                          thin=self.thin or 8 * g.m, replicas=self.replicas, threads=self.n_jobs)
        res = draw_samples(g, self.params_, int(n_samples), cfg)
        self.last_run_ = res
        return res.samples

    def score_samples(self, X):
        """Unnormalised log Gibbs weight of each edge configuration."""
        check_is_fitted(self, "graph_")
        X = np.asarray(X, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.graph_.m:
            raise ValueError(f"expected shape (k, {self.graph_.m})")
        return half_edge_log_weights(self.graph_, self.params_, np.repeat(X, 2, axis=1))


class PartitionFunctionEstimator(BaseEstimator):
    """Annealed Monte Carlo estimate of log Z on the line graph of a fitted graph."""

    def __init__(self, beta=1.0, nu=0.0, epsilon=0.1, chain="glauber", n_samples=None,
                 burn_in=None, spacing=None, replicas=1, n_jobs=1, random_state=0,
                 allow_ferromagnetic=False):
        self.beta = beta
        self.nu = nu
        self.epsilon = epsilon
        self.chain = chain
        self.n_samples = n_samples
        self.burn_in = burn_in
        self.spacing = spacing
        self.replicas = replicas
        self.n_jobs = n_jobs
        self.random_state = random_state
        self.allow_ferromagnetic = allow_ferromagnetic

    def fit(self, X, y=None):
        g = check_graph(X)
        params = check_params(g, self.beta, self.nu)
        self.graph_ = g
        self.report_ = estimate_Z(g, params, self.epsilon, seed=check_seed(self.random_state),
                                  chain=_kind(self.chain), samples=self.n_samples, burn_in=self.burn_in,
                                  spacing=self.spacing, replicas=self.replicas, threads=self.n_jobs,
                                  allow_ferromagnetic=self.allow_ferromagnetic)
        self.log_Z_ = self.report_.log_Z
        self.schedule_ = np.asarray(self.report_.betas)
        return self
