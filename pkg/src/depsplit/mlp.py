"""One-hidden-layer ReLU network with hand-written backpropagation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DepsplitError

HIDDEN = 50
N_FEATURES = 6
PARAM_NAMES = ("w1", "b1", "w2", "b2")


class StaleCacheError(DepsplitError):
    """``backward`` was called without a matching ``forward``."""


@dataclass
class MlpGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    x: np.ndarray | None = None

    def __add__(self, other):
        return MlpGrads(*(getattr(self, n) + getattr(other, n) for n in PARAM_NAMES))

    def scaled(self, k):
        return MlpGrads(*(k * getattr(self, n) for n in PARAM_NAMES))

    def sq_norm(self) -> float:
        return float(sum(np.sum(getattr(self, n) ** 2) for n in PARAM_NAMES))


@dataclass
class Mlp:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    _cache: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def init(cls, n_out, rng: np.random.Generator, n_in=N_FEATURES, hidden=HIDDEN) -> "Mlp":
        """Glorot-uniform weights, zero biases."""
        a1 = np.sqrt(6.0 / (n_in + hidden))
        a2 = np.sqrt(6.0 / (hidden + n_out))
        return cls(
            w1=rng.uniform(-a1, a1, size=(n_in, hidden)),
            b1=np.zeros(hidden),
            w2=rng.uniform(-a2, a2, size=(hidden, n_out)),
            b2=np.zeros(n_out),
        )

    @classmethod
    def zeros(cls, n_out, n_in=N_FEATURES, hidden=HIDDEN) -> "Mlp":
        return cls(np.zeros((n_in, hidden)), np.zeros(hidden),
                   np.zeros((hidden, n_out)), np.zeros(n_out))

    @property
    def n_in(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.w2.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"expected input of shape [N, {self.n_in}], got {x.shape}")
        pre = x @ self.w1 + self.b1
        hidden = np.maximum(pre, 0.0)
        self._cache = (x, pre, hidden)
        return hidden @ self.w2 + self.b2

    def backward(self, x: np.ndarray, grad_out: np.ndarray) -> MlpGrads:
        """Gradients of ``sum(forward(x) * grad_out)`` for the last ``forward(x)``."""
        if self._cache is None:
            raise StaleCacheError("backward called before forward")
        cx, pre, hidden = self._cache
        if cx is not x and not (cx.shape == np.shape(x) and np.array_equal(cx, x)):
            raise StaleCacheError("backward input does not match the cached forward input")
        grad_out = np.asarray(grad_out, dtype=float).reshape(len(cx), self.n_out)
        g_hidden = grad_out @ self.w2.T
        g_pre = g_hidden * (pre > 0)
        return MlpGrads(
            w1=cx.T @ g_pre,
            b1=g_pre.sum(axis=0),
            w2=hidden.T @ grad_out,
            b2=grad_out.sum(axis=0),
            x=g_pre @ self.w1.T,
        )

    def params(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def copy(self) -> "Mlp":
        return Mlp(*(getattr(self, n).copy() for n in PARAM_NAMES))

    def flat(self) -> np.ndarray:
        return np.concatenate([getattr(self, n).ravel() for n in PARAM_NAMES])

    def with_flat(self, vec) -> "Mlp":
        out, k = [], 0
        for n in PARAM_NAMES:
            shape = getattr(self, n).shape
            size = int(np.prod(shape))
            out.append(np.asarray(vec[k:k + size], dtype=float).reshape(shape))
            k += size
        return Mlp(*out)


def sgd_step(net: Mlp, grads: MlpGrads, lr: float) -> Mlp:
    """Return a new network with every parameter moved by ``-lr * grad``."""
    return Mlp(*(getattr(net, n) - lr * getattr(grads, n) for n in PARAM_NAMES))
