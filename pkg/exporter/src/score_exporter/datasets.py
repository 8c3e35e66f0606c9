"""Synthetic dataset generators resolved from compact spec strings.

Two families:

    blobs:classes=10,dim=8,train=100,test=40,spread=1.0,sep=3.0
        K isotropic Gaussian clusters with means scattered on a sphere of
        radius ``sep``; ``train``/``test`` are per-class counts.

    mixture1d:mu0=-1,mu1=1,sigma0=0.5,sigma1=1,train=200,test=100
        Two univariate Gaussians, labels 0/1, equal per-class counts.

Both return ((x_train, y_train), (x_test, y_test)) with float features and
integer labels, deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from .errors import DatasetSpecError

DEFAULTS = {
    "blobs": {
        "classes": 10.0,
        "dim": 8.0,
        "train": 100.0,
        "test": 40.0,
        "spread": 1.0,
        "sep": 3.0,
    },
    "mixture1d": {
        "mu0": -1.0,
        "mu1": 1.0,
        "sigma0": 0.5,
        "sigma1": 1.0,
        "train": 200.0,
        "test": 100.0,
    },
}


def parse_spec(spec: str) -> tuple[str, dict[str, float]]:
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in DEFAULTS:
        raise DatasetSpecError(f"unknown dataset family {name!r}")
    params = dict(DEFAULTS[name])
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or key not in params:
                raise DatasetSpecError(f"bad dataset parameter {item!r} for {name!r}")
            try:
                params[key] = float(value)
            except ValueError as exc:
                raise DatasetSpecError(f"non-numeric value in {item!r}") from exc
    return name, params


def _sphere_points(gen: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    raw = gen.normal(size=(count, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return radius * raw


def _blobs(params: dict[str, float], seed: int):
    k = int(params["classes"])
    dim = int(params["dim"])
    n_train = int(params["train"])
    n_test = int(params["test"])
    if k < 2 or dim < 1 or n_train < 1 or n_test < 1:
        raise DatasetSpecError("blobs needs classes>=2, dim>=1, train>=1, test>=1")
    gen = np.random.Generator(np.random.PCG64(seed))
    means = _sphere_points(gen, k, dim, params["sep"])

    def draw(per_class):
        xs = np.concatenate(
            [means[c] + params["spread"] * gen.normal(size=(per_class, dim)) for c in range(k)]
        )
        ys = np.repeat(np.arange(k), per_class)
        return xs, ys

    return draw(n_train), draw(n_test)


def _mixture1d(params: dict[str, float], seed: int):
    n_train = int(params["train"])
    n_test = int(params["test"])
    if n_train < 1 or n_test < 1:
        raise DatasetSpecError("mixture1d needs train>=1 and test>=1")
    gen = np.random.Generator(np.random.PCG64(seed))
    mus = (params["mu0"], params["mu1"])
    sigmas = (params["sigma0"], params["sigma1"])
    if min(sigmas) <= 0:
        raise DatasetSpecError("mixture1d sigmas must be positive")

    def draw(per_class):
        xs = np.concatenate(
            [mus[c] + sigmas[c] * gen.normal(size=per_class) for c in (0, 1)]
        ).reshape(-1, 1)
        ys = np.repeat(np.arange(2), per_class)
        return xs, ys

    return draw(n_train), draw(n_test)


def load(spec: str, seed: int):
    """Resolve a spec string into ((x_train, y_train), (x_test, y_test))."""
    name, params = parse_spec(spec)
    if name == "blobs":
        return _blobs(params, seed)
    return _mixture1d(params, seed)
