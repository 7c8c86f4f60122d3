"""Seeded corpora of windowed smooth multipliers and operator models."""

import math

import numpy as np

from .function_spaces import windowed_smooth
from .operator_models import circulant_laplacian, diagonal_model, jordan_model


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def windowed_corpus(size=50, seed=0, window="mixed", terms=3):
    """``size`` windowed smooth multipliers with random trigonometric factors.

    Bump windows are supported inside ``[1/2, 2]`` (so every engine applies);
    Gaussian windows are entire and admit the contour engine.  ``window`` is
    ``"bump"``, ``"gauss"`` or ``"mixed"`` (alternating).
    """
    rng = _rng(seed)
    out = []
    half = math.log(2.0)
    for i in range(size):
        kind = window if window != "mixed" else ("bump" if i % 2 == 0 else "gauss")
        coeffs = rng.uniform(-1.0, 1.0, size=(terms, 2)) / (1.0 + np.arange(terms))[:, None] ** 2
        coeffs[0] = [1.0, 0.0]
        if kind == "bump":
            center = rng.uniform(-0.25, 0.25)
            width = rng.uniform(0.3, half - abs(center))
        else:
            center = rng.uniform(-1.0, 1.0)
            width = rng.uniform(0.4, 1.0)
        out.append(windowed_smooth(center, width, coeffs, kind))
    return out


def model_corpus(seed=0, max_dim=16, space_p=2.0):
    """Small models of every structure with spectrum in ``[1/4, 4]``."""
    rng = _rng(seed)
    models = [
        diagonal_model([1.0], space_p),
        diagonal_model([1.0, 2.0, 4.0], space_p),
        diagonal_model(np.exp(rng.uniform(math.log(0.25), math.log(4.0), size=max_dim)), space_p),
        jordan_model(1, 1.0, space_p),
        jordan_model(2, 1.3, space_p),
        circulant_laplacian(max_dim + 1, space_p),
        circulant_laplacian(8, space_p).scaled(0.5),
    ]
    return models
