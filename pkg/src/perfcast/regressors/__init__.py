"""Regressor zoo: boosted trees, polynomial elastic net, matrix factorization."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from ..records import DesignMatrix
from .gbt import GbtModel, GbtParams, gbt_fit, gbt_importance, gbt_predict
from .mf import MfModel, MfParams, mf_fit, mf_predict, mf_predict_one
from .poly import PolyModel, PolyParams, poly_fit, poly_predict
from .presets import PRESETS, get_preset
from .serialize import load_model, model_from_dict, model_to_dict, save_model

AnyParams = GbtParams | PolyParams | MfParams
AnyModel = GbtModel | PolyModel | MfModel

KIND_BY_PARAMS = {GbtParams: "gbt", PolyParams: "poly", MfParams: "mf"}


def params_kind(params: AnyParams) -> str:
    return KIND_BY_PARAMS[type(params)]


def with_seed(params: AnyParams, seed: int) -> AnyParams:
    return replace(params, seed=seed)


def fit_model(
    params: AnyParams,
    matrix: DesignMatrix,
    languages: tuple[Sequence[str], Sequence[str]] | None = None,
) -> AnyModel:
    """Uniform fit entry point; `languages` = (sources, targets) is MF-only."""
    if isinstance(params, GbtParams):
        return gbt_fit(matrix, params)
    if isinstance(params, PolyParams):
        return poly_fit(matrix, params)
    if languages is None:
        raise ValueError("matrix factorization requires per-record language pairs")
    return mf_fit(matrix, languages[0], languages[1], params)


def predict_model(
    model: AnyModel,
    matrix: DesignMatrix,
    languages: tuple[Sequence[str], Sequence[str]] | None = None,
) -> np.ndarray:
    if isinstance(model, GbtModel):
        return gbt_predict(model, matrix)
    if isinstance(model, PolyModel):
        return poly_predict(model, matrix)
    if languages is None:
        raise ValueError("matrix factorization requires per-record language pairs")
    return mf_predict(model, matrix, languages[0], languages[1])


__all__ = [
    "GbtModel", "GbtParams", "gbt_fit", "gbt_importance", "gbt_predict",
    "MfModel", "MfParams", "mf_fit", "mf_predict", "mf_predict_one",
    "PolyModel", "PolyParams", "poly_fit", "poly_predict",
    "PRESETS", "get_preset", "load_model", "save_model", "model_to_dict", "model_from_dict",
    "fit_model", "predict_model", "params_kind", "with_seed",
]
