"""Quanvolutional feature extraction.

An even-sided grayscale image is cut into 2x2 patches at stride 2.  Each
patch is angle-encoded onto 4 qubits (pixel p -> Ry(pi*p), row-major within
the patch: top-left -> qubit 0, top-right -> 1, bottom-left -> 2,
bottom-right -> 3), the fixed filter circuit is applied, and the Pauli-Z
expectation of qubit k becomes channel k of the output map.  A 28x28 image
therefore produces a 14x14x4 feature map with entries in [-1, 1].

The hot path evaluates all patches of an image at once: the filter circuit
is folded into a dense 16x16 unitary (built gate-by-gate from qsim), patch
encodings are product states assembled by broadcasting, and expectations
reduce to one matrix product per image.  Input gradients are exact via the
two-term shift rule applied to the encoding angles.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .ansatz import Ansatz
from .qsim import StateVector, init_zero, run_program, ry

PATCH = 2
STRIDE = 2
N_QUBITS = PATCH * PATCH


@dataclass(frozen=True)
class Patch:
    values: tuple[float, ...]
    origin: tuple[int, int]


def _check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {image.shape}")
    if np.min(image) < 0.0 or np.max(image) > 1.0:
        raise ValueError("image pixels must lie in [0, 1]")
    return image


def extract_patches(image: np.ndarray, n: int = PATCH, stride: int = STRIDE) -> list[Patch]:
    """Row-major scan of n x n patches; with n = stride every pixel appears once."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {image.shape}")
    h, w = image.shape
    if (h - n) % stride or (w - n) % stride or h < n or w < n:
        raise ValueError(f"image shape {image.shape} incompatible with n={n}, stride={stride}")
    patches = []
    for i in range(0, h - n + 1, stride):
        for j in range(0, w - n + 1, stride):
            block = image[i : i + n, j : j + n].reshape(-1)
            patches.append(Patch(tuple(float(v) for v in block), (i, j)))
    return patches


def encode_patch(patch: Patch) -> StateVector:
    """Product state Ry(pi * pixel_q)|0> on each of the four qubits."""
    values = np.asarray(patch.values, dtype=float)
    if values.size != N_QUBITS:
        raise ValueError(f"patch must hold {N_QUBITS} values, got {values.size}")
    if np.min(values) < 0.0 or np.max(values) > 1.0:
        raise ValueError("patch values must lie in [0, 1]")
    gates = [ry(q, np.pi * values[q]) for q in range(N_QUBITS)]
    return run_program(init_zero(N_QUBITS), gates)


def _patch_matrix(image: np.ndarray) -> np.ndarray:
    """All 2x2/stride-2 patches as rows of an (H'*W', 4) array."""
    h, w = image.shape
    if h % 2 or w % 2:
        raise ValueError(f"image sides must be even, got {image.shape}")
    hp, wp = h // 2, w // 2
    return image.reshape(hp, 2, wp, 2).transpose(0, 2, 1, 3).reshape(hp * wp, 4)


def _encoding_factors(thetas: np.ndarray) -> np.ndarray:
    """Single-qubit Ry(theta)|0> factors, shape (..., 2)."""
    half = thetas / 2.0
    return np.stack([np.cos(half), np.sin(half)], axis=-1).astype(np.complex128)


def _product_states(factors: np.ndarray) -> np.ndarray:
    """(P, 4, 2) per-qubit factors -> (P, 16) amplitudes, qubit 0 most significant."""
    p = factors.shape[0]
    states = np.einsum(
        "pa,pb,pc,pd->pabcd",
        factors[:, 0],
        factors[:, 1],
        factors[:, 2],
        factors[:, 3],
    )
    return states.reshape(p, 16)


def _z_sign_table(n_qubits: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    return np.stack(
        [1.0 - 2.0 * ((idx >> (n_qubits - 1 - q)) & 1) for q in range(n_qubits)]
    )


def _ansatz_unitary(ansatz: Ansatz) -> np.ndarray:
    """Dense matrix of the filter circuit, column j = program applied to |j>."""
    dim = 2**ansatz.n_qubits
    unitary = np.empty((dim, dim), dtype=np.complex128)
    for j in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[j] = 1.0
        unitary[:, j] = run_program(StateVector(ansatz.n_qubits, amps), ansatz.gates).amps
    return unitary


class QuanvExtractor:
    """Frozen quanvolutional feature extractor for one filter circuit."""

    def __init__(self, ansatz: Ansatz):
        if ansatz.n_qubits != N_QUBITS:
            raise ValueError(f"filter circuit must use {N_QUBITS} qubits, got {ansatz.n_qubits}")
        self.ansatz = ansatz
        self.kind = f"qunn_{ansatz.kind.value}"
        self.seed = ansatz.seed
        self._unitary_t = _ansatz_unitary(ansatz).T.copy()
        self._z_signs_t = _z_sign_table(N_QUBITS).T.copy()

    @property
    def fingerprint(self) -> str:
        return self.ansatz.fingerprint()

    def _expectations(self, factors: np.ndarray) -> np.ndarray:
        states = _product_states(factors)
        phi = states @ self._unitary_t
        return (np.abs(phi) ** 2) @ self._z_signs_t

    def forward(self, image: np.ndarray) -> np.ndarray:
        image = _check_image(image)
        hp, wp = image.shape[0] // 2, image.shape[1] // 2
        factors = _encoding_factors(np.pi * _patch_matrix(image))
        return self._expectations(factors).reshape(hp, wp, N_QUBITS)

    def input_gradient(self, image: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Pixel gradient for a given feature-map cotangent.

        Each pixel drives exactly one encoding angle of one patch, so the
        chain rule reduces to pi * sum_k upstream_k * d<Z_k>/d(theta_q),
        with the angle derivative evaluated by the +-pi/2 shift rule.
        """
        image = _check_image(image)
        hp, wp = image.shape[0] // 2, image.shape[1] // 2
        upstream = np.asarray(upstream, dtype=float)
        if upstream.shape != (hp, wp, N_QUBITS):
            raise ValueError(
                f"upstream shape {upstream.shape} does not match feature map "
                f"{(hp, wp, N_QUBITS)}"
            )
        thetas = np.pi * _patch_matrix(image)
        base = _encoding_factors(thetas)
        up = upstream.reshape(-1, N_QUBITS)
        grad_patch = np.empty_like(thetas)
        for q in range(N_QUBITS):
            shifted = base.copy()
            shifted[:, q] = _encoding_factors(thetas[:, q] + np.pi / 2)
            e_plus = self._expectations(shifted)
            shifted[:, q] = _encoding_factors(thetas[:, q] - np.pi / 2)
            e_minus = self._expectations(shifted)
            dz_dtheta = 0.5 * (e_plus - e_minus)  # (P, channels)
            grad_patch[:, q] = np.pi * np.sum(up * dz_dtheta, axis=1)
        return grad_patch.reshape(hp, wp, 2, 2).transpose(0, 2, 1, 3).reshape(image.shape)


def quanv_forward(image: np.ndarray, ansatz: Ansatz) -> np.ndarray:
    return QuanvExtractor(ansatz).forward(image)


def quanv_input_gradient(image: np.ndarray, ansatz: Ansatz, upstream: np.ndarray) -> np.ndarray:
    return QuanvExtractor(ansatz).input_gradient(image, upstream)


# ---------------------------------------------------------------------------
# Disk cache for frozen-extractor feature maps
# ---------------------------------------------------------------------------
# Record layout, little endian: u32 image index, 32-byte extractor
# fingerprint digest, then the 784 feature values as f8.

_RECORD_HEAD = struct.Struct("<I32s")
_FEATURES_PER_RECORD = 14 * 14 * 4
_RECORD_SIZE = _RECORD_HEAD.size + 8 * _FEATURES_PER_RECORD


def write_feature_cache(
    path, fingerprint_hex: str, indices: np.ndarray, feature_maps: np.ndarray
) -> None:
    digest = bytes.fromhex(fingerprint_hex)
    if len(digest) != 32:
        raise ValueError("fingerprint must be a 32-byte hex digest")
    maps = np.asarray(feature_maps, dtype=float).reshape(len(indices), -1)
    if maps.shape[1] != _FEATURES_PER_RECORD:
        raise ValueError(f"each record must hold {_FEATURES_PER_RECORD} features")
    with open(path, "wb") as fh:
        for index, row in zip(indices, maps):
            fh.write(_RECORD_HEAD.pack(int(index), digest))
            fh.write(row.astype("<f8").tobytes())


def read_feature_cache(path, expected_fingerprint_hex: str | None = None):
    """Load cached maps as {image index: (14, 14, 4) array}, plus the digest."""
    raw = open(path, "rb").read()
    if len(raw) % _RECORD_SIZE:
        raise ValueError(f"feature cache {path} is truncated")
    maps: dict[int, np.ndarray] = {}
    digest_hex = None
    for off in range(0, len(raw), _RECORD_SIZE):
        index, digest = _RECORD_HEAD.unpack_from(raw, off)
        if digest_hex is None:
            digest_hex = digest.hex()
        elif digest.hex() != digest_hex:
            raise ValueError("feature cache mixes records from different extractors")
        values = np.frombuffer(
            raw, dtype="<f8", count=_FEATURES_PER_RECORD, offset=off + _RECORD_HEAD.size
        )
        maps[index] = values.reshape(14, 14, 4).copy()
    if expected_fingerprint_hex is not None and digest_hex != expected_fingerprint_hex:
        raise ValueError("feature cache was written by a different extractor")
    return maps, digest_hex
