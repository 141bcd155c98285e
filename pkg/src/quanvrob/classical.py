"""Classical counterpart layers and the shared trainable head.

The classical extractor is a frozen 2x2, stride-2 convolution with 4
filters and ReLU, drawn once from uniform [-1, 1] with zero bias, so it
produces the same 14x14x4 feature geometry as the quanvolutional path.
Both extractors feed the same trainable piece: a dense layer with softmax
over 10 classes, optimized with Adam on the cross-entropy loss.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

N_FILTERS = 4
KERNEL = 2
STRIDE = 2
N_CLASSES = 10


@dataclass(frozen=True)
class ConvLayer:
    kernels: np.ndarray  # (filters, kernel, kernel)
    bias: np.ndarray  # (filters,)
    seed: int


def build_conv_layer(seed: int) -> ConvLayer:
    rng = np.random.default_rng(seed)
    kernels = rng.uniform(-1.0, 1.0, size=(N_FILTERS, KERNEL, KERNEL))
    return ConvLayer(kernels=kernels, bias=np.zeros(N_FILTERS), seed=int(seed))


def _patch_matrix(image: np.ndarray) -> np.ndarray:
    h, w = image.shape
    if h % 2 or w % 2:
        raise ValueError(f"image sides must be even, got {image.shape}")
    hp, wp = h // 2, w // 2
    return image.reshape(hp, 2, wp, 2).transpose(0, 2, 1, 3).reshape(hp * wp, 4)


def conv_preactivation(image: np.ndarray, layer: ConvLayer) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {image.shape}")
    hp, wp = image.shape[0] // 2, image.shape[1] // 2
    patches = _patch_matrix(image)
    pre = patches @ layer.kernels.reshape(N_FILTERS, -1).T + layer.bias
    return pre.reshape(hp, wp, N_FILTERS)


def conv_forward(image: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """ReLU(conv2d(image)) with kernel 2, stride 2, no padding."""
    return np.maximum(conv_preactivation(image, layer), 0.0)


def conv_input_gradient(
    layer: ConvLayer, upstream: np.ndarray, forward_activations: np.ndarray
) -> np.ndarray:
    """Backprop through ReLU then scatter each filter kernel to its patch."""
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != forward_activations.shape:
        raise ValueError(
            f"upstream shape {upstream.shape} does not match activations "
            f"{forward_activations.shape}"
        )
    hp, wp, _ = upstream.shape
    masked = upstream * (forward_activations > 0.0)
    # (hp, wp, filters) x (filters, 4) -> per-patch pixel gradients
    grad_patch = masked.reshape(-1, N_FILTERS) @ layer.kernels.reshape(N_FILTERS, -1)
    return grad_patch.reshape(hp, wp, 2, 2).transpose(0, 2, 1, 3).reshape(2 * hp, 2 * wp)


class ConvExtractor:
    """Frozen random convolution presented with the shared extractor surface."""

    kind = "cnn"

    def __init__(self, layer: ConvLayer):
        self.layer = layer
        self.seed = layer.seed

    @property
    def fingerprint(self) -> str:
        payload = (
            f"cnn\nseed={self.layer.seed}\n"
            + ",".join(format(v, ".17g") for v in self.layer.kernels.ravel())
            + "\n"
            + ",".join(format(v, ".17g") for v in self.layer.bias)
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def forward(self, image: np.ndarray) -> np.ndarray:
        return conv_forward(image, self.layer)

    def input_gradient(self, image: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        return conv_input_gradient(self.layer, upstream, self.forward(image))


# ---------------------------------------------------------------------------
# Dense softmax head
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DenseHead:
    weights: np.ndarray  # (classes, features)
    bias: np.ndarray  # (classes,)


def build_dense_head(seed: int, in_dim: int = 784, scale: float = 0.05) -> DenseHead:
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-scale, scale, size=(N_CLASSES, in_dim))
    return DenseHead(weights=weights, bias=np.zeros(N_CLASSES))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / np.sum(exp)


def dense_forward(features: np.ndarray, head: DenseHead) -> np.ndarray:
    flat = np.asarray(features, dtype=float).reshape(-1)
    if flat.size != head.weights.shape[1]:
        raise ValueError(
            f"feature size {flat.size} does not match head input {head.weights.shape[1]}"
        )
    return softmax(head.weights @ flat + head.bias)


def loss_and_grads(head: DenseHead, probs: np.ndarray, label: int, features: np.ndarray):
    """Cross-entropy -log p[label] and its gradients (dW, db, dfeatures)."""
    if not 0 <= label < N_CLASSES:
        raise ValueError(f"label must be in 0..{N_CLASSES - 1}, got {label}")
    flat = np.asarray(features, dtype=float).reshape(-1)
    loss = -np.log(probs[label])
    dlogits = probs.copy()
    dlogits[label] -= 1.0
    d_weights = np.outer(dlogits, flat)
    d_bias = dlogits
    d_features = head.weights.T @ dlogits
    return float(loss), d_weights, d_bias, d_features


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdamState:
    step: int
    m_weights: np.ndarray
    v_weights: np.ndarray
    m_bias: np.ndarray
    v_bias: np.ndarray
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam_state(head: DenseHead) -> AdamState:
    return AdamState(
        step=0,
        m_weights=np.zeros_like(head.weights),
        v_weights=np.zeros_like(head.weights),
        m_bias=np.zeros_like(head.bias),
        v_bias=np.zeros_like(head.bias),
    )


def adam_step(head: DenseHead, state: AdamState, grads, lr: float):
    """One bias-corrected Adam update; returns the new (head, state)."""
    d_weights, d_bias = grads
    if d_weights.shape != head.weights.shape or d_bias.shape != head.bias.shape:
        raise ValueError("gradient shapes do not match the head")
    t = state.step + 1
    m_w = state.beta1 * state.m_weights + (1 - state.beta1) * d_weights
    v_w = state.beta2 * state.v_weights + (1 - state.beta2) * d_weights**2
    m_b = state.beta1 * state.m_bias + (1 - state.beta1) * d_bias
    v_b = state.beta2 * state.v_bias + (1 - state.beta2) * d_bias**2
    bc1 = 1 - state.beta1**t
    bc2 = 1 - state.beta2**t
    new_weights = head.weights - lr * (m_w / bc1) / (np.sqrt(v_w / bc2) + state.eps)
    new_bias = head.bias - lr * (m_b / bc1) / (np.sqrt(v_b / bc2) + state.eps)
    new_head = DenseHead(weights=new_weights, bias=new_bias)
    new_state = replace(
        state, step=t, m_weights=m_w, v_weights=v_w, m_bias=m_b, v_bias=v_b
    )
    return new_head, new_state


# ---------------------------------------------------------------------------
# Checkpoints: text header, blank line, then W and b as little-endian f8
# ---------------------------------------------------------------------------


def save_checkpoint(path, kind: str, extractor_seed: int, extractor_fingerprint: str, head: DenseHead) -> None:
    header = (
        f"kind={kind}\n"
        f"extractor_seed={extractor_seed}\n"
        f"extractor_fingerprint={extractor_fingerprint}\n"
        f"in_dim={head.weights.shape[1]}\n\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(head.weights.astype("<f8").tobytes(order="C"))
        fh.write(head.bias.astype("<f8").tobytes(order="C"))


def load_checkpoint(path):
    raw = open(path, "rb").read()
    sep = raw.find(b"\n\n")
    if sep < 0:
        raise ValueError(f"checkpoint {path} has no header")
    fields = {}
    for line in raw[:sep].decode().splitlines():
        key, value = line.split("=", 1)
        fields[key] = value
    in_dim = int(fields["in_dim"])
    body = raw[sep + 2 :]
    expected = 8 * (N_CLASSES * in_dim + N_CLASSES)
    if len(body) != expected:
        raise ValueError(f"checkpoint {path} body has {len(body)} bytes, expected {expected}")
    weights = np.frombuffer(body, dtype="<f8", count=N_CLASSES * in_dim).reshape(
        N_CLASSES, in_dim
    )
    bias = np.frombuffer(body, dtype="<f8", count=N_CLASSES, offset=8 * N_CLASSES * in_dim)
    head = DenseHead(weights=weights.copy(), bias=bias.copy())
    return fields["kind"], int(fields["extractor_seed"]), fields["extractor_fingerprint"], head
