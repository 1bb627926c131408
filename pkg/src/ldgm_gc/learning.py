"""Least-squares data, chunked gradients and (S)GD updates."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .decoder import DecodeOutcome


class SquaredLoss:
    """``l(w, x, y) = (y - x.w)^2 / 2`` summed over rows."""

    name = "squared"

    @staticmethod
    def value(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
        r = y - X @ w
        return 0.5 * float(r @ r)

    @staticmethod
    def gradient(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        return -(X.T @ (y - X @ w))


@dataclass(frozen=True)
class Dataset:
    """Samples split into ``num_chunks`` contiguous, equal-size chunks."""

    features: np.ndarray
    labels: np.ndarray
    num_chunks: int
    loss_fn: type = SquaredLoss

    def __post_init__(self):
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ValueError(f"labels shape {self.labels.shape} does not match {n} samples")
        if self.num_chunks < 1 or n % self.num_chunks:
            raise ValueError(f"{self.num_chunks} chunks do not divide {n} samples")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def chunk_size(self) -> int:
        return self.n // self.num_chunks

    def chunk(self, k: int) -> slice:
        if not 0 <= k < self.num_chunks:
            raise IndexError(f"chunk {k} out of range [0, {self.num_chunks})")
        return slice(k * self.chunk_size, (k + 1) * self.chunk_size)

    def rechunk(self, num_chunks: int) -> "Dataset":
        """Same samples, different chunk count (the uncoded scheme uses N)."""
        return replace(self, num_chunks=num_chunks)


def generate_dataset(n: int, d: int, K: int, seed, noise: bool = True) -> tuple[Dataset, np.ndarray]:
    """Gaussian linear model ``y = X w* + eps``; returns the data and ``w*``."""
    if K < 1 or n % K:
        raise ValueError(f"K={K} must divide n={n}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    w_star = rng.standard_normal(d)
    eps = rng.standard_normal(n)
    y = X @ w_star + (eps if noise else 0.0)
    return Dataset(X, y, K), w_star


def _check_dim(dataset: Dataset, w: np.ndarray) -> None:
    if np.shape(w) != (dataset.d,):
        raise ValueError(f"parameter has shape {np.shape(w)}, expected ({dataset.d},)")


def loss(dataset: Dataset, w: np.ndarray) -> float:
    _check_dim(dataset, w)
    return dataset.loss_fn.value(dataset.features, dataset.labels, w)


def full_gradient(dataset: Dataset, w: np.ndarray) -> np.ndarray:
    _check_dim(dataset, w)
    return dataset.loss_fn.gradient(dataset.features, dataset.labels, w)


def partial_gradient(dataset: Dataset, k: int, w: np.ndarray) -> np.ndarray:
    _check_dim(dataset, w)
    s = dataset.chunk(k)
    return dataset.loss_fn.gradient(dataset.features[s], dataset.labels[s], w)


def partial_gradients(dataset: Dataset, w: np.ndarray) -> np.ndarray:
    """All chunk gradients as a ``(num_chunks, d)`` array."""
    _check_dim(dataset, w)
    if dataset.loss_fn is not SquaredLoss:
        return np.stack([partial_gradient(dataset, k, w) for k in range(dataset.num_chunks)])
    m, c = dataset.num_chunks, dataset.chunk_size
    X = dataset.features.reshape(m, c, dataset.d)
    r = (dataset.labels - dataset.features @ w).reshape(m, c)
    return -np.einsum("kcd,kc->kd", X, r)


@dataclass(frozen=True)
class ModelState:
    """Parameters plus the step counter of the ``eta0 / t`` schedule.

    ``t`` counts completed updates; the next update uses ``max(t, 1)`` so the
    very first step has rate ``eta0``.
    """

    w: np.ndarray
    t: int = 0
    eta0: float = 0.1

    @property
    def learning_rate(self) -> float:
        return self.eta0 / max(self.t, 1)

    @classmethod
    def zeros(cls, d: int, eta0: float = 0.1) -> "ModelState":
        return cls(np.zeros(d), 0, eta0)


def apply_update(state: ModelState, gradient_estimate: np.ndarray) -> ModelState:
    w = state.w - state.learning_rate * np.asarray(gradient_estimate)
    return ModelState(w, max(state.t, 1) + 1, state.eta0)


def aggregate_recovered(outcome: DecodeOutcome, dim: int, survival: float | None = None) -> np.ndarray:
    """Sum of recovered partial gradients, in increasing chunk order.

    With ``survival`` set, the sum is divided by it so that under uniform
    chunk erasure the estimate is unbiased for the full gradient.
    """
    total = np.zeros(dim)
    for k in sorted(outcome.recovered):
        total += outcome.values[k]
    if survival is not None:
        if not 0 < survival <= 1:
            raise ValueError(f"survival must be in (0, 1], got {survival}")
        total /= survival
    return total
