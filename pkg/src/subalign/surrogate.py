"""Surrogate models that rank candidate (source size, target size, lambda) points.

Both rankers take evaluated points ``X`` (n x d, already in the log-size
feature space), their F1 values ``y``, and candidate points, and return one
acquisition value per candidate; higher is better.
"""
from __future__ import annotations

import math
import warnings

import numpy as np


class ParzenRatio:
    """Tree-structured Parzen estimator style density ratio l(x) / g(x)."""

    def __init__(self, gamma: float = 0.25, min_bandwidth: float = 0.05):
        self.gamma = gamma
        self.min_bandwidth = min_bandwidth

    def _log_density(self, centers: np.ndarray, points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        width = hi - lo
        n, d = centers.shape
        if n > 1:
            bw = centers.std(axis=0, ddof=1) * n ** (-1.0 / (d + 4))
        else:
            bw = width * 0.5
        bw = np.maximum(bw, self.min_bandwidth * width)
        z = (points[:, None, :] - centers[None, :, :]) / bw
        log_k = -0.5 * (z ** 2).sum(axis=2) - np.log(bw).sum() - 0.5 * d * math.log(2 * math.pi)
        # uniform prior component keeps the estimate proper far from any sample
        log_prior = -np.log(width).sum()
        stacked = np.concatenate([log_k, np.full((points.shape[0], 1), log_prior)], axis=1)
        m = stacked.max(axis=1, keepdims=True)
        return (m[:, 0] + np.log(np.exp(stacked - m).sum(axis=1))) - math.log(n + 1)

    def acquisition(self, X, y, candidates, bounds) -> np.ndarray:
        X, y, candidates = np.asarray(X, float), np.asarray(y, float), np.asarray(candidates, float)
        lo, hi = np.asarray(bounds, float).T
        hi = np.where(hi > lo, hi, lo + 1.0)
        order = np.argsort(-y, kind="stable")
        n_good = max(1, int(math.ceil(self.gamma * len(y))))
        good, bad = X[order[:n_good]], X[order[n_good:]]
        if bad.shape[0] == 0:
            bad = X
        return self._log_density(good, candidates, lo, hi) - self._log_density(bad, candidates, lo, hi)


class GaussianProcessEI:
    """Expected improvement under a Matern Gaussian process (scikit-learn)."""

    def __init__(self, xi: float = 0.01, random_state: int = 0):
        self.xi = xi
        self.random_state = random_state

    def acquisition(self, X, y, candidates, bounds) -> np.ndarray:
        from scipy.stats import norm
        from sklearn.gaussian_process import GaussianProcessRegressor
        from sklearn.gaussian_process.kernels import ConstantKernel, Matern, WhiteKernel

        X, y, candidates = np.asarray(X, float), np.asarray(y, float), np.asarray(candidates, float)
        lo, hi = np.asarray(bounds, float).T
        scale = np.where(hi > lo, hi - lo, 1.0)
        kernel = ConstantKernel(1.0) * Matern(length_scale=np.full(X.shape[1], 0.3), nu=2.5) + WhiteKernel(1e-5)
        gp = GaussianProcessRegressor(kernel=kernel, normalize_y=True, random_state=self.random_state)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            gp.fit((X - lo) / scale, y)
        mu, sigma = gp.predict((candidates - lo) / scale, return_std=True)
        best = y.max()
        sigma = np.maximum(sigma, 1e-12)
        z = (mu - best - self.xi) / sigma
        return (mu - best - self.xi) * norm.cdf(z) + sigma * norm.pdf(z)


SURROGATES = {"tpe": ParzenRatio, "gp": GaussianProcessEI}
