"""Matrix factorization with context features, trained by seeded SGD.

Prediction for a (source, target, context) triple:

    y_hat = mu + b_s + b_t + w_s . h_t + theta . c

Factors w/h are initialized uniform(-0.01, 0.01); biases and theta start at
zero; mu is the training target mean. Each epoch shuffles the records and
applies per-record updates with learning rate alpha / (1 + lr_decay * epoch),
each parameter block regularized by its own beta. Requires genuinely
two-dimensional records: at least two distinct sources and two distinct
targets; English-centric data (one language pinned on a side) is rejected.

Context features reuse the same mean-imputation and standardization as the
polynomial regressor, with statistics from the training split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import NotManyToMany, SchemaMismatch, UnknownLanguage
from ..records import DesignMatrix
from .poly import _apply_stats, impute_and_standardize


@dataclass(frozen=True)
class MfParams:
    latent_dim: int = 8
    alpha: float = 0.01
    beta_w: float = 0.1
    beta_h: float = 0.1
    beta_z: float = 0.01
    beta_s: float = 0.01
    beta_t: float = 0.01
    lr_decay: float = 0.001
    iterations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.latent_dim < 0:
            raise ValueError("latent_dim must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        for name in ("beta_w", "beta_h", "beta_z", "beta_s", "beta_t", "lr_decay"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class MfModel:
    params: MfParams
    mu: float
    w: dict[str, np.ndarray]  # source factors
    h: dict[str, np.ndarray]  # target factors
    b_s: dict[str, float]
    b_t: dict[str, float]
    theta: np.ndarray
    impute: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    fingerprint: str


def mf_fit(
    matrix: DesignMatrix,
    sources: Sequence[str],
    targets: Sequence[str],
    params: MfParams,
) -> MfModel:
    """Fit on records with language pairs; context rows come from the design matrix."""
    n = matrix.n
    if n == 0 or len(sources) != n or len(targets) != n:
        raise NotManyToMany("records, sources and targets must be non-empty and aligned")
    src_set = sorted(set(sources))
    tgt_set = sorted(set(targets))
    if len(src_set) < 2 or len(tgt_set) < 2:
        raise NotManyToMany(
            f"need >= 2 distinct source and target languages, got {len(src_set)} source / {len(tgt_set)} target"
        )

    y = matrix.targets
    Xs, impute, mean, std = impute_and_standardize(matrix.rows, matrix.missing_mask)
    C = (Xs - mean) / std
    k = params.latent_dim
    c_dim = C.shape[1]

    rng = np.random.default_rng(params.seed)
    w = {s: rng.uniform(-0.01, 0.01, size=k) for s in src_set}
    h = {t: rng.uniform(-0.01, 0.01, size=k) for t in tgt_set}
    b_s = {s: 0.0 for s in src_set}
    b_t = {t: 0.0 for t in tgt_set}
    theta = np.zeros(c_dim, dtype=np.float64)
    mu = float(np.mean(y))

    for epoch in range(params.iterations):
        lr = params.alpha / (1.0 + params.lr_decay * epoch)
        for i in rng.permutation(n):
            s, t = sources[i], targets[i]
            ws, ht = w[s], h[t]
            ci = C[i]
            err = mu + b_s[s] + b_t[t] + float(ws @ ht) + float(theta @ ci) - y[i]
            ws_old = ws.copy()
            ws -= lr * (err * ht + params.beta_w * ws)
            ht -= lr * (err * ws_old + params.beta_h * ht)
            b_s[s] -= lr * (err + params.beta_s * b_s[s])
            b_t[t] -= lr * (err + params.beta_t * b_t[t])
            if c_dim:
                theta -= lr * (err * ci + params.beta_z * theta)

    return MfModel(
        params=params,
        mu=mu,
        w=w,
        h=h,
        b_s=b_s,
        b_t=b_t,
        theta=theta,
        impute=impute,
        mean=mean,
        std=std,
        fingerprint=matrix.schema.fingerprint(),
    )


def mf_predict_one(model: MfModel, source: str, target: str, context: np.ndarray) -> float:
    """Evaluate the model equation for one standardized context row."""
    if source not in model.w:
        raise UnknownLanguage(f"source language {source!r} was not seen during fit")
    if target not in model.h:
        raise UnknownLanguage(f"target language {target!r} was not seen during fit")
    return (
        model.mu
        + model.b_s[source]
        + model.b_t[target]
        + float(model.w[source] @ model.h[target])
        + float(model.theta @ context)
    )


def mf_predict(
    model: MfModel,
    matrix: DesignMatrix,
    sources: Sequence[str],
    targets: Sequence[str],
) -> np.ndarray:
    if matrix.schema.fingerprint() != model.fingerprint:
        raise SchemaMismatch("design matrix schema does not match the fitted model")
    C = _apply_stats(matrix.rows, matrix.missing_mask, model.impute, model.mean, model.std)
    return np.array(
        [mf_predict_one(model, s, t, C[i]) for i, (s, t) in enumerate(zip(sources, targets))],
        dtype=np.float64,
    )
