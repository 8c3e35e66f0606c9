"""Compact numpy query models with per-sample introspection.

Two architectures trained by minibatch SGD on softmax cross-entropy:

    linear  softmax regression; penultimate features are the raw inputs
    mlp     one ReLU hidden layer; penultimate features are the activations

Both expose exact per-sample gradient norms of the loss (the usual
"gradient norm" difficulty score) computed layer by layer in closed form,
and per-sample target-class probabilities/correctness for telemetry.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingDiverged


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class QueryModel:
    def __init__(
        self,
        n_features: int,
        n_classes: int,
        arch: str = "linear",
        hidden: int = 32,
        seed: int = 0,
    ):
        if arch not in ("linear", "mlp"):
            raise ValueError(f"unknown architecture {arch!r}")
        self.arch = arch
        self.n_classes = n_classes
        gen = np.random.Generator(np.random.PCG64(seed))
        scale_in = 1.0 / np.sqrt(n_features)
        if arch == "linear":
            self.w_out = gen.normal(scale=scale_in, size=(n_features, n_classes))
            self.b_out = np.zeros(n_classes)
        else:
            self.w_hid = gen.normal(scale=scale_in, size=(n_features, hidden))
            self.b_hid = np.zeros(hidden)
            self.w_out = gen.normal(scale=1.0 / np.sqrt(hidden), size=(hidden, n_classes))
            self.b_out = np.zeros(n_classes)
        self._shuffle_gen = gen

    def penultimate(self, x: np.ndarray) -> np.ndarray:
        if self.arch == "linear":
            return x
        return np.maximum(x @ self.w_hid + self.b_hid, 0.0)

    def probabilities(self, x: np.ndarray) -> np.ndarray:
        return _softmax(self.penultimate(x) @ self.w_out + self.b_out)

    def _check_finite(self, loss: float) -> None:
        if not np.isfinite(loss) or not np.all(np.isfinite(self.w_out)):
            raise TrainingDiverged(f"non-finite loss {loss!r} during optimization")

    def train_epoch(self, x: np.ndarray, y: np.ndarray, lr: float, batch_size: int) -> float:
        """One SGD pass in a seeded shuffle order; returns the mean loss."""
        order = self._shuffle_gen.permutation(len(x))
        losses = []
        for start in range(0, len(x), batch_size):
            idx = order[start : start + batch_size]
            xb, yb = x[idx], y[idx]
            h = self.penultimate(xb)
            probs = _softmax(h @ self.w_out + self.b_out)
            # a target probability of exactly 0 is a divergence signal, so
            # the log is taken bare and the resulting inf is caught below
            with np.errstate(divide="ignore"):
                losses.append(float(-np.log(probs[np.arange(len(yb)), yb]).mean()))
            delta = probs.copy()
            delta[np.arange(len(yb)), yb] -= 1.0
            delta /= len(yb)
            if self.arch == "mlp":
                hidden_delta = (delta @ self.w_out.T) * (h > 0.0)
                self.w_hid -= lr * xb.T @ hidden_delta
                self.b_hid -= lr * hidden_delta.sum(axis=0)
            self.w_out -= lr * h.T @ delta
            self.b_out -= lr * delta.sum(axis=0)
        mean_loss = float(np.mean(losses))
        self._check_finite(mean_loss)
        return mean_loss

    def telemetry(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(target-class probability, correctness) per sample."""
        probs = self.probabilities(x)
        p_target = probs[np.arange(len(y)), y]
        correct = probs.argmax(axis=1) == y
        return p_target, correct

    def gradient_norms(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Exact per-sample L2 norm of the parameter gradient of the loss.

        For the output layer the per-sample gradient is delta (x) features
        plus the bias term, giving ||delta|| * sqrt(||features||^2 + 1); the
        hidden layer contributes ||hidden_delta|| * sqrt(||x||^2 + 1).
        """
        h = self.penultimate(x)
        probs = _softmax(h @ self.w_out + self.b_out)
        delta = probs
        delta[np.arange(len(y)), y] -= 1.0
        out_sq = (delta**2).sum(axis=1) * ((h**2).sum(axis=1) + 1.0)
        if self.arch == "linear":
            return np.sqrt(out_sq)
        hidden_delta = (delta @ self.w_out.T) * (h > 0.0)
        hid_sq = (hidden_delta**2).sum(axis=1) * ((x**2).sum(axis=1) + 1.0)
        return np.sqrt(out_sq + hid_sq)
