"""Semi-supervised estimation for current-status data with surrogate event times.

Thin Python layer over the C++ extension: structured results come back as
dictionaries whose numeric lists are converted to numpy arrays.
"""

import json

import numpy as np

from ._sslsurv import (
    DataError,
    Dataset,
    NumericalError,
    SslsurvError,
)
from . import _sslsurv

__all__ = [
    "DataError",
    "Dataset",
    "NumericalError",
    "SslsurvError",
    "fit",
    "fit_supervised",
    "infer",
    "rank_correlation",
    "run_study",
    "simulate",
    "stacked_score",
]


def _arrays(value):
    """Recursively turn numeric lists into numpy arrays."""
    if isinstance(value, dict):
        return {k: _arrays(v) for k, v in value.items()}
    if isinstance(value, list):
        if value and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            return np.asarray(value, dtype=float)
        if value and all(isinstance(x, list) for x in value):
            try:
                return np.asarray(value, dtype=float)
            except (TypeError, ValueError):
                pass
        return [_arrays(v) for v in value]
    return value


def simulate(n=500, N=1000, scenario="A", seed=1, a=None):
    """Simulated cohort and its ground truth (beta0, censoring limit, ...)."""
    data, truth = _sslsurv.simulate(n=n, N=N, scenario=scenario, seed=seed, a=a)
    return data, _arrays(json.loads(truth))


def fit_supervised(data, link="probit", bandwidth=None):
    """Labeled-data estimate of (beta, h) with the default bandwidth rule."""
    return _arrays(json.loads(_sslsurv.fit_supervised(data, link=link, bandwidth=bandwidth)))


def fit(data, B=200, seed=1, link="probit", regime="auto", rho=0.1, alpha=0.05,
        lambda_delta=None, bandwidth=None, score_bandwidths=None, raw=False):
    """Full semi-supervised fit with perturbation inference.

    With raw=True the JSON text is returned unchanged, ready for infer().
    """
    text = _sslsurv.fit(data, B=B, seed=seed, link=link, regime=regime, rho=rho,
                        alpha=alpha, lambda_delta=lambda_delta, bandwidth=bandwidth,
                        score_bandwidths=score_bandwidths)
    return text if raw else _arrays(json.loads(text))


def infer(fit_json, regime=None, alpha=0.05, lambda_soft=None):
    """Recompute intervals from a fit (JSON text or the dict returned by fit)."""
    if not isinstance(fit_json, str):
        fit_json = json.dumps(fit_json, default=lambda x: x.tolist())
    return _arrays(json.loads(_sslsurv.infer(fit_json, regime=regime, alpha=alpha,
                                             lambda_soft=lambda_soft)))


def stacked_score(data, direction, bandwidth=None, score_bandwidths=None):
    """Stacked smoothed scores S (length K p) and rank correlations Q (length K)."""
    S, Q = _sslsurv.stacked_score(data, np.asarray(direction, dtype=float),
                                  bandwidth=bandwidth, score_bandwidths=score_bandwidths)
    return np.asarray(S), np.asarray(Q)


def rank_correlation(data, k, beta):
    """(raw, normalized) IPCW rank correlation of surrogate k at beta."""
    return _sslsurv.rank_correlation(data, k, np.asarray(beta, dtype=float))


def run_study(scenario="A", n=500, N=1000, reps=100, B=200, seed=1, regime="auto",
              output_dir=None):
    """Monte Carlo study; returns the per-coordinate metrics table."""
    return _arrays(json.loads(_sslsurv.run_study(
        scenario=scenario, n=n, N=N, reps=reps, B=B, seed=seed, regime=regime,
        output_dir=output_dir)))
