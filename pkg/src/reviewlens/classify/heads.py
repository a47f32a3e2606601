"""Linear classification heads: sigmoid outputs, BCE loss and analytic
gradients, in plain numpy.

Training (training.py) uses torch modules with the same math; these
functions are the reference path used by evaluation and the gradient
checks.
"""

from dataclasses import dataclass

import numpy as np

EPS = 1e-7  # probability clamp inside the loss


@dataclass
class ClassifierHead:
    W: np.ndarray  # (out_dim, hidden_dim)
    b: np.ndarray  # (out_dim,)
    variant: str  # "binary" | "multilabel" | "adapter"

    @property
    def out_dim(self):
        return self.W.shape[0]

    @property
    def hidden_dim(self):
        return self.W.shape[1]

    def to_json(self):
        return {
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "variant": self.variant,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            W=np.asarray(obj["W"], dtype=np.float64),
            b=np.asarray(obj["b"], dtype=np.float64),
            variant=obj["variant"],
        )


def init_head(hidden_dim, out_dim, seed, scale=0.02):
    """Fresh head: zero bias, small symmetric random weights."""
    rng = np.random.default_rng(seed)
    W = rng.uniform(-scale, scale, size=(out_dim, hidden_dim))
    b = np.zeros(out_dim)
    variant = "binary" if out_dim == 1 else "multilabel"
    return ClassifierHead(W=W, b=b, variant=variant)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    # both np.where branches are evaluated, so silence the overflow in
    # the branch that is discarded
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)),
                        np.exp(z) / (1.0 + np.exp(z)))


def head_forward(head, embedding):
    """sigma(W h + b); accepts a single embedding or a batch."""
    h = np.asarray(embedding, dtype=np.float64)
    z = h @ head.W.T + head.b
    return sigmoid(z)


def predict(probs, threshold=0.5):
    """Label 1 iff probability >= threshold (closed at the threshold)."""
    return (np.asarray(probs, dtype=np.float64) >= threshold).astype(int)


def bce_loss(probs, labels):
    """Mean binary cross-entropy, averaged over instances and outputs."""
    p = np.clip(np.asarray(probs, dtype=np.float64), EPS, 1.0 - EPS)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def head_gradients(head, embeddings, labels):
    """Analytic gradient of bce_loss(head_forward(.)) w.r.t. W and b."""
    h = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    y = np.asarray(labels, dtype=np.float64).reshape(h.shape[0], head.out_dim)
    probs = head_forward(head, h).reshape(h.shape[0], head.out_dim)
    dz = (probs - y) / y.size
    return dz.T @ h, dz.sum(axis=0)
