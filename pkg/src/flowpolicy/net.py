"""Dense vector-field network with hand-rolled reverse-mode gradients.

The architecture is fixed at construction: ``num_layers`` affine layers of
``hidden_width`` units, each hidden layer followed by a swish activation
x * sigmoid(beta * x) whose slope beta is one learnable scalar per
activation layer. Forward and backward operate on batches; backward is
exact reverse accumulation and is checked against central finite
differences in the test suite.

Parameter lists are ordered [W0, b0, W1, b1, ..., act_betas] everywhere
(optimizer state, checkpoints, gradient returns).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .manifolds import Manifold

CHECKPOINT_SCHEMA = "flowpolicy.checkpoint"
CHECKPOINT_VERSION = 1


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class MLP:
    """Multilayer perceptron mapping a flat input vector to a flat output."""

    def __init__(self, input_dim: int, output_dim: int, hidden_width: int = 64,
                 num_layers: int = 5, rng: np.random.Generator | None = None):
        if input_dim < 1 or output_dim < 1:
            raise ValueError("input_dim and output_dim must be positive")
        if num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if rng is None:
            rng = np.random.default_rng()
        dims = [input_dim] + [hidden_width] * (num_layers - 1) + [output_dim]
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        self.hidden_width = int(hidden_width)
        self.num_layers = int(num_layers)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(1.0 / fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))
        # one learnable slope per activation layer; 1.0 recovers vanilla swish
        self.act_betas = np.ones(num_layers - 1)

    @property
    def num_params(self) -> int:
        n = sum(w.size for w in self.weights) + sum(b.size for b in self.biases)
        return n + self.act_betas.size

    @classmethod
    def from_arrays(cls, weights: list[np.ndarray], biases: list[np.ndarray],
                    act_betas: np.ndarray) -> "MLP":
        weights = [np.asarray(w, dtype=float) for w in weights]
        biases = [np.asarray(b, dtype=float) for b in biases]
        act_betas = np.asarray(act_betas, dtype=float)
        if len(weights) != len(biases) or len(weights) < 1:
            raise ValueError("weights and biases must be non-empty and aligned")
        if act_betas.size != len(weights) - 1:
            raise ValueError("need one activation slope per hidden layer")
        net = cls.__new__(cls)
        net.input_dim = weights[0].shape[1]
        net.output_dim = weights[-1].shape[0]
        net.hidden_width = weights[0].shape[0] if len(weights) > 1 else 0
        net.num_layers = len(weights)
        net.weights = weights
        net.biases = biases
        net.act_betas = act_betas
        return net

    def params(self) -> list[np.ndarray]:
        """References to all parameter arrays, in the canonical order."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        out.append(self.act_betas)
        return out

    def set_params(self, values: list[np.ndarray]) -> None:
        own = self.params()
        if len(own) != len(values):
            raise ValueError("parameter list length mismatch")
        for p, v in zip(own, values):
            if p.shape != np.shape(v):
                raise ValueError("parameter shape mismatch")
            p[...] = v

    def clone(self) -> "MLP":
        return MLP.from_arrays([w.copy() for w in self.weights],
                               [b.copy() for b in self.biases],
                               self.act_betas.copy())

    def forward(self, x) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x):
        """Evaluate the network, returning (output, cache) for backward."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.input_dim:
            raise ValueError(f"expected input width {self.input_dim}, got {h.shape[1]}")
        inputs = [h]
        pre = []
        sig = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            if i < self.num_layers - 1:
                s = _sigmoid(self.act_betas[i] * z)
                h = z * s
                inputs.append(h)
                sig.append(s)
        y = pre[-1]
        cache = (inputs, pre, sig, squeeze)
        return (y[0] if squeeze else y), cache

    def backward(self, cache, dout):
        """Gradients of a scalar objective given d(objective)/d(output).

        Returns (dweights, dbiases, dact_betas) summed over the batch.
        """
        inputs, pre, sig, squeeze = cache
        g = np.atleast_2d(np.asarray(dout, dtype=float))
        if g.shape != pre[-1].shape:
            raise ValueError(f"residual shape {g.shape} does not match output {pre[-1].shape}")
        n = self.num_layers
        dw: list[np.ndarray] = [np.empty(0)] * n
        db: list[np.ndarray] = [np.empty(0)] * n
        dbeta = np.zeros(n - 1)
        for i in range(n - 1, -1, -1):
            dw[i] = g.T @ inputs[i]
            db[i] = g.sum(axis=0)
            if i > 0:
                dh = g @ self.weights[i]
                z = pre[i - 1]
                s = sig[i - 1]
                beta = self.act_betas[i - 1]
                ds = s * (1.0 - s)
                # d(z * sigmoid(beta z)) / dz and / dbeta
                dbeta[i - 1] = float(np.sum(dh * z * z * ds))
                g = dh * (s + beta * z * ds)
        return dw, db, dbeta

    def grads_as_list(self, grads) -> list[np.ndarray]:
        dw, db, dbeta = grads
        out: list[np.ndarray] = []
        for w, b in zip(dw, db):
            out.append(w)
            out.append(b)
        out.append(dbeta)
        return out


class AdamEma:
    """Adam with bias correction plus an exponential moving average of the
    parameters, updated after every step. The EMA copy is what inference
    should use; the live parameters keep training.
    """

    def __init__(self, params: list[np.ndarray], learning_rate: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 ema_decay: float = 0.999):
        if not 0.0 <= ema_decay < 1.0:
            raise ValueError("ema_decay must lie in [0, 1)")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.ema_decay = float(ema_decay)
        self.step_count = 0
        self.first_moment = [np.zeros_like(p) for p in params]
        self.second_moment = [np.zeros_like(p) for p in params]
        self.ema = [p.copy() for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(grads) or len(params) != len(self.first_moment):
            raise ValueError("parameter / gradient list mismatch")
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v, e in zip(params, grads, self.first_moment,
                                 self.second_moment, self.ema):
            if p.shape != g.shape:
                raise ValueError("gradient shape mismatch")
            m[...] = self.beta1 * m + (1.0 - self.beta1) * g
            v[...] = self.beta2 * v + (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)
            e[...] = self.ema_decay * e + (1.0 - self.ema_decay) * p

    def state_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "ema_decay": self.ema_decay,
            "step_count": self.step_count,
            "first_moment": [m.tolist() for m in self.first_moment],
            "second_moment": [v.tolist() for v in self.second_moment],
            "ema": [e.tolist() for e in self.ema],
        }

    @classmethod
    def from_state_dict(cls, d: dict) -> "AdamEma":
        ema = [np.asarray(e, dtype=float) for e in d["ema"]]
        opt = cls(ema, learning_rate=d["learning_rate"], beta1=d["beta1"],
                  beta2=d["beta2"], eps=d["eps"], ema_decay=d["ema_decay"])
        opt.step_count = int(d["step_count"])
        opt.first_moment = [np.asarray(m, dtype=float) for m in d["first_moment"]]
        opt.second_moment = [np.asarray(v, dtype=float) for v in d["second_moment"]]
        opt.ema = ema
        return opt


def tangent_head(raw_output, points, manifold: Manifold) -> np.ndarray:
    """Reshape a flat network output into per-step ambient vectors and
    project each onto the tangent space at the matching horizon point."""
    raw = np.asarray(raw_output, dtype=float)
    points = np.asarray(points, dtype=float)
    expected = int(np.prod(points.shape[-2:]))
    if raw.shape[-1] != expected:
        raise ValueError(
            f"raw output width {raw.shape[-1]} does not match horizon size {expected}"
        )
    vecs = raw.reshape(points.shape)
    return manifold.to_tangent(vecs, points)


def mlp_to_dict(net: MLP) -> dict:
    """Serialize weights row-major at full decimal precision."""
    return {
        "input_dim": net.input_dim,
        "output_dim": net.output_dim,
        "hidden_width": net.hidden_width,
        "num_layers": net.num_layers,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "act_betas": net.act_betas.tolist(),
    }


def mlp_from_dict(d: dict) -> MLP:
    return MLP.from_arrays(d["weights"], d["biases"], d["act_betas"])


def save_checkpoint(path, payload: dict) -> None:
    doc = {"schema": CHECKPOINT_SCHEMA, "version": CHECKPOINT_VERSION}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
                          encoding="utf-8")


def load_checkpoint(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise SchemaError(f"{path} is not a checkpoint file")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise SchemaError(f"unsupported checkpoint version {doc.get('version')}")
    return doc
