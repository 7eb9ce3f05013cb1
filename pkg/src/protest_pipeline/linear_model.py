"""Linear suggestion models over hashed features, trained with Adam.

Three task heads share one implementation: 4-class event counting and
binary domain detection use a softmax with categorical cross-entropy;
tag suggestion uses an independent sigmoid per tag with binary
cross-entropy. The scorer contract is the pair (predict, loss_and_grad),
so a different model family can be swapped in behind the same tasks.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .text_features import FeatureVector

TASK_COUNT4 = "count4"
TASK_DOMAIN2 = "domain2"
TASK_TAGS = "tags"
TASKS = (TASK_COUNT4, TASK_DOMAIN2, TASK_TAGS)

_MODEL_MAGIC = b"PPML"
_MODEL_VERSION = 1


@dataclass
class AdamState:
    """First/second moment accumulators and the shared step counter."""

    m_w: np.ndarray
    v_w: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, w: np.ndarray, b: np.ndarray) -> "AdamState":
        return cls(
            m_w=np.zeros_like(w),
            v_w=np.zeros_like(w),
            m_b=np.zeros_like(b),
            v_b=np.zeros_like(b),
        )


@dataclass
class Hyperparams:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    l2: float = 1e-5


@dataclass
class LinearModel:
    task: str
    weights: np.ndarray  # (outputs, dim)
    bias: np.ndarray  # (outputs,)
    output_names: tuple[str, ...]
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    adam: AdamState | None = None

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        outputs = len(self.output_names)
        required = {TASK_COUNT4: 4, TASK_DOMAIN2: 2}.get(self.task)
        if required is not None and outputs != required:
            raise ValueError(f"{self.task} needs exactly {required} outputs, got {outputs}")
        if self.weights.shape[0] != outputs or self.bias.shape != (outputs,):
            raise ValueError("weight/bias shapes do not match output names")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def zeros(
        cls,
        task: str,
        output_names: Sequence[str],
        dim: int,
        hyperparams: Hyperparams | None = None,
    ) -> "LinearModel":
        w = np.zeros((len(output_names), dim), dtype=np.float64)
        b = np.zeros(len(output_names), dtype=np.float64)
        return cls(
            task=task,
            weights=w,
            bias=b,
            output_names=tuple(output_names),
            hyperparams=hyperparams or Hyperparams(),
            adam=AdamState.zeros_like(w, b),
        )

    def copy_without_adam(self) -> "LinearModel":
        return LinearModel(
            task=self.task,
            weights=self.weights.copy(),
            bias=self.bias.copy(),
            output_names=self.output_names,
            hyperparams=self.hyperparams,
            adam=None,
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _logits(model: LinearModel, x: FeatureVector) -> np.ndarray:
    if x.dim != model.dim:
        raise ValueError(f"feature dim {x.dim} does not match model dim {model.dim}")
    if x.indices.size == 0:
        return model.bias.copy()
    return model.weights[:, x.indices] @ x.values + model.bias


def predict(model: LinearModel, x: FeatureVector) -> np.ndarray:
    """Probabilities per output: softmax heads sum to 1, tag heads are independent."""
    z = _logits(model, x)
    if model.task == TASK_TAGS:
        return sigmoid(z)
    return softmax(z)


def predict_class(model: LinearModel, x: FeatureVector) -> int:
    """Argmax with ties broken toward the lower class index."""
    probs = predict(model, x)
    return int(np.argmax(probs))


def loss_and_grad(
    model: LinearModel,
    xs: Sequence[FeatureVector],
    ys: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean loss over the batch plus dense gradients for weights and bias.

    ys holds class indices for softmax tasks and multi-hot rows of shape
    (batch, outputs) for the tags task. The L2 penalty on the weights is
    included in both the loss and the gradient.
    """
    batch = len(xs)
    grad_w = np.zeros_like(model.weights)
    grad_b = np.zeros_like(model.bias)
    total = 0.0
    eps = 1e-12
    for row, x in enumerate(xs):
        z = _logits(model, x)
        if model.task == TASK_TAGS:
            p = sigmoid(z)
            y = ys[row]
            total += -float(np.sum(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps)))
            dz = p - y
        else:
            p = softmax(z)
            y_idx = int(ys[row])
            total += -float(np.log(p[y_idx] + eps))
            dz = p.copy()
            dz[y_idx] -= 1.0
        if x.indices.size:
            grad_w[:, x.indices] += np.outer(dz, x.values)
        grad_b += dz
    loss = total / batch
    grad_w /= batch
    grad_b /= batch
    l2 = model.hyperparams.l2
    if l2:
        loss += 0.5 * l2 * float(np.sum(model.weights**2))
        grad_w += l2 * model.weights
    return loss, grad_w, grad_b


def adam_step(model: LinearModel, grad_w: np.ndarray, grad_b: np.ndarray) -> None:
    """One reference Adam update, in place."""
    if model.adam is None:
        model.adam = AdamState.zeros_like(model.weights, model.bias)
    state = model.adam
    hp = model.hyperparams
    state.step += 1
    t = state.step
    b1, b2 = hp.beta1, hp.beta2

    state.m_w = b1 * state.m_w + (1.0 - b1) * grad_w
    state.v_w = b2 * state.v_w + (1.0 - b2) * grad_w**2
    state.m_b = b1 * state.m_b + (1.0 - b1) * grad_b
    state.v_b = b2 * state.v_b + (1.0 - b2) * grad_b**2

    m_w_hat = state.m_w / (1.0 - b1**t)
    v_w_hat = state.v_w / (1.0 - b2**t)
    m_b_hat = state.m_b / (1.0 - b1**t)
    v_b_hat = state.v_b / (1.0 - b2**t)

    model.weights -= hp.learning_rate * m_w_hat / (np.sqrt(v_w_hat) + hp.epsilon)
    model.bias -= hp.learning_rate * m_b_hat / (np.sqrt(v_b_hat) + hp.epsilon)


def save_model(path, model: LinearModel) -> None:
    """Versioned binary: magic, version byte, JSON header, raw float64 arrays."""
    header = json.dumps(
        {
            "task": model.task,
            "dim": model.dim,
            "outputs": list(model.output_names),
            "hyperparams": {
                "learning_rate": model.hyperparams.learning_rate,
                "beta1": model.hyperparams.beta1,
                "beta2": model.hyperparams.beta2,
                "epsilon": model.hyperparams.epsilon,
                "l2": model.hyperparams.l2,
            },
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(bytes([_MODEL_VERSION]))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(model.weights.astype("<f8").tobytes())
        fh.write(model.bias.astype("<f8").tobytes())


def load_model(path) -> LinearModel:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    if buf.read(4) != _MODEL_MAGIC:
        raise ValueError(f"not a model file: {path}")
    version = buf.read(1)[0]
    if version != _MODEL_VERSION:
        raise ValueError(f"unsupported model version {version}")
    (header_len,) = struct.unpack("<I", buf.read(4))
    header = json.loads(buf.read(header_len).decode("utf-8"))
    outputs = tuple(header["outputs"])
    dim = int(header["dim"])
    w = np.frombuffer(buf.read(8 * len(outputs) * dim), dtype="<f8").reshape(len(outputs), dim)
    b = np.frombuffer(buf.read(8 * len(outputs)), dtype="<f8").copy()
    hp = Hyperparams(**header["hyperparams"])
    return LinearModel(
        task=header["task"],
        weights=w.copy(),
        bias=b,
        output_names=outputs,
        hyperparams=hp,
        adam=None,
    )
