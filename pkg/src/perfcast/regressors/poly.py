"""Polynomial elastic-net regression fit by cyclic coordinate descent.

Columns are mean-imputed (training-split means) and standardized (training-
split statistics), then expanded to all monomials of total degree <= degree
in a fixed order: degree 1 terms first, within each degree the
lexicographic order of nondecreasing index tuples. The objective is

    (1/2n) ||y - X beta - b||^2
        + alpha * (l1_ratio * ||beta||_1 + 0.5 * (1 - l1_ratio) * ||beta||_2^2)

minimized coordinate by coordinate until the largest coefficient change in a
sweep drops below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from ..errors import EmptyTrainingSet, SchemaMismatch
from ..records import DesignMatrix


@dataclass(frozen=True)
class PolyParams:
    degree: int = 2
    alpha: float = 0.1
    l1_ratio: float = 0.9
    max_iterations: int = 5000
    tolerance: float = 1e-9
    seed: int = 0  # unused by the deterministic solver; kept for interface symmetry

    def __post_init__(self):
        if self.degree < 1 or self.degree > 3:
            raise ValueError("degree must be 1, 2 or 3")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not (0.0 <= self.l1_ratio <= 1.0):
            raise ValueError("l1_ratio must be in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class PolyModel:
    params: PolyParams
    terms: list[tuple[int, ...]]
    intercept: float
    coef: np.ndarray
    impute: np.ndarray  # per-column training means substituted for masked cells
    mean: np.ndarray
    std: np.ndarray
    fingerprint: str
    converged: bool
    n_sweeps: int
    objective_history: list[float] = field(default_factory=list)


def expansion_terms(n_features: int, degree: int) -> list[tuple[int, ...]]:
    """All monomials of total degree 1..degree as nondecreasing index tuples."""
    terms: list[tuple[int, ...]] = []
    for deg in range(1, degree + 1):
        terms.extend(combinations_with_replacement(range(n_features), deg))
    return terms


def impute_and_standardize(rows: np.ndarray, mask: np.ndarray):
    """Training-split imputation and standardization statistics.

    Masked cells take the column mean of observed cells (0 when a column is
    entirely masked); standardization then uses the imputed column's mean and
    population std (constant columns get std 1 so they standardize to 0).
    """
    X = np.array(rows, dtype=np.float64, copy=True)
    impute = np.zeros(X.shape[1], dtype=np.float64)
    for j in range(X.shape[1]):
        observed = ~mask[:, j]
        impute[j] = float(np.mean(X[observed, j])) if observed.any() else 0.0
        X[mask[:, j], j] = impute[j]
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return X, impute, mean, std


def _apply_stats(rows: np.ndarray, mask: np.ndarray, impute: np.ndarray, mean: np.ndarray, std: np.ndarray):
    X = np.array(rows, dtype=np.float64, copy=True)
    for j in range(X.shape[1]):
        X[mask[:, j], j] = impute[j]
    return (X - mean) / std


def _expand(Z: np.ndarray, terms: list[tuple[int, ...]]) -> np.ndarray:
    out = np.empty((Z.shape[0], len(terms)), dtype=np.float64)
    for k, term in enumerate(terms):
        col = Z[:, term[0]].copy()
        for j in term[1:]:
            col *= Z[:, j]
        out[:, k] = col
    return out


def _objective(r: np.ndarray, beta: np.ndarray, params: PolyParams) -> float:
    n = r.shape[0]
    penalty = params.alpha * (
        params.l1_ratio * float(np.abs(beta).sum())
        + 0.5 * (1.0 - params.l1_ratio) * float(beta @ beta)
    )
    return 0.5 / n * float(r @ r) + penalty


def poly_fit(matrix: DesignMatrix, params: PolyParams) -> PolyModel:
    if matrix.n == 0:
        raise EmptyTrainingSet("cannot fit on an empty design matrix")
    y = matrix.targets
    Xs, impute, mean, std = impute_and_standardize(matrix.rows, matrix.missing_mask)
    Z = (Xs - mean) / std
    terms = expansion_terms(Xs.shape[1], params.degree)
    P = _expand(Z, terms)
    n, m = P.shape

    col_sq = (P * P).sum(axis=0) / n
    l1 = params.alpha * params.l1_ratio
    l2 = params.alpha * (1.0 - params.l1_ratio)

    beta = np.zeros(m, dtype=np.float64)
    intercept = float(np.mean(y))
    r = y - intercept  # residual y - P beta - intercept
    history: list[float] = []
    converged = False
    sweeps = 0
    for sweeps in range(1, params.max_iterations + 1):
        max_delta = 0.0
        for j in range(m):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            rho = (P[:, j] @ r) / n + col_sq[j] * old
            new = float(np.sign(rho) * max(abs(rho) - l1, 0.0)) / (col_sq[j] + l2)
            if new != old:
                r -= (new - old) * P[:, j]
                beta[j] = new
                max_delta = max(max_delta, abs(new - old))
        shift = float(np.mean(r))
        if shift != 0.0:
            intercept += shift
            r -= shift
            max_delta = max(max_delta, abs(shift))
        # recompute the residual each sweep so float drift cannot accumulate
        r = y - P @ beta - intercept
        history.append(_objective(r, beta, params))
        if max_delta < params.tolerance:
            converged = True
            break

    return PolyModel(
        params=params,
        terms=terms,
        intercept=intercept,
        coef=beta,
        impute=impute,
        mean=mean,
        std=std,
        fingerprint=matrix.schema.fingerprint(),
        converged=converged,
        n_sweeps=sweeps,
        objective_history=history,
    )


def poly_predict(model: PolyModel, matrix: DesignMatrix) -> np.ndarray:
    if matrix.schema.fingerprint() != model.fingerprint:
        raise SchemaMismatch("design matrix schema does not match the fitted model")
    Z = _apply_stats(matrix.rows, matrix.missing_mask, model.impute, model.mean, model.std)
    return _expand(Z, model.terms) @ model.coef + model.intercept
