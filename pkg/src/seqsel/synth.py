"""Synthetic ordinal instances drawn from a planted sequential logit model.

Used for CLI fixture generation and for the oracle-equivalence test
battery: features are iid standard normal, a known sparse coefficient
matrix drives the per-level pass/stop draws, and baseline intercepts are
chosen so the m+1 classes are roughly uniform.
"""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset
from .loss import sigmoid


def planted_coefficients(p: int, m: int, true_features, effects=(1.2, -0.8, 0.5)):
    """Sparse (m x p) weights and near-uniform intercepts.

    Every true feature gets the same coefficient at every level, cycling
    through ``effects``; intercepts make each class equally likely at
    x = 0.
    """
    weights = np.zeros((m, p))
    for rank, j in enumerate(sorted(true_features)):
        weights[:, j] = effects[rank % len(effects)]
    intercepts = np.array([-math.log(m + 1 - k) for k in range(1, m + 1)])
    return weights, intercepts


def draw_labels(rng: np.random.Generator, X, weights, intercepts) -> np.ndarray:
    """Sample labels by walking the per-level stop/continue chain."""
    n = X.shape[0]
    m = weights.shape[0]
    q = sigmoid(X @ weights.T + intercepts)
    y = np.full(n, m + 1, dtype=int)
    alive = np.ones(n, dtype=bool)
    for k in range(m):
        stop = alive & (rng.random(n) < q[:, k])
        y[stop] = k + 1
        alive &= ~stop
    return y


def synth_instance(
    seed: int,
    n: int,
    p: int,
    m: int,
    n_true: int = 3,
    effects=(1.2, -0.8, 0.5),
):
    """Raw draws plus ground truth: (X_raw, y, truth dict).

    Deterministic in ``seed``.  Redraws (with the same generator) until
    every class occurs at least once, so the class count is exactly m+1.
    """
    if not 0 <= n_true <= p:
        raise ValueError("n_true must lie in [0, p]")
    rng = np.random.default_rng(seed)
    true_features = tuple(range(n_true))
    weights, intercepts = planted_coefficients(p, m, true_features, effects)
    for _ in range(1000):
        X = rng.standard_normal((n, p))
        y = draw_labels(rng, X, weights, intercepts)
        if len(np.unique(y)) == m + 1:
            break
    else:
        raise RuntimeError("could not realize all classes; increase n")
    truth = {
        "true_features": [j + 1 for j in true_features],
        "weights": weights.tolist(),
        "intercepts": intercepts.tolist(),
    }
    return X, y, truth


def synth_dataset(
    seed: int,
    n: int,
    p: int,
    m: int,
    n_true: int = 3,
    effects=(1.2, -0.8, 0.5),
):
    """A ready-to-use standardized :class:`Dataset` plus its ground truth."""
    X, y, truth = synth_instance(seed, n, p, m, n_true, effects)
    Xs = (X - X.mean(axis=0)) / X.std(axis=0)
    names = tuple(f"x{j + 1}" for j in range(p))
    return Dataset(X=Xs, y=y, feature_names=names), truth


def write_synth_csv(path, seed, n, p, m, n_true=3, effects=(1.2, -0.8, 0.5)):
    """Write the raw draws as a CSV fixture; returns the ground truth."""
    X, y, truth = synth_instance(seed, n, p, m, n_true, effects)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"x{j + 1}" for j in range(p)] + ["y"]) + "\n")
        for i in range(n):
            cells = [format(v, ".17g") for v in X[i]]
            cells.append(str(int(y[i])))
            fh.write(",".join(cells) + "\n")
    return truth
