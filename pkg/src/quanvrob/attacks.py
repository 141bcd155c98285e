"""Gradient-sign attacks and robustness/transfer evaluation.

Three white-box attacks against any model exposing ``input_gradient``:

  fgsm  x' = clip(x + eps * sign(grad))
  pgd   k steps of x <- clip_eps(x + alpha * sign(grad at x)), no random start
  mim   like pgd but the step direction is the sign of an accumulated
        gradient g <- mu * g + grad / ||grad||_1

Every adversarial image stays within the L-infinity ball of radius eps
around the original and inside [0, 1].  sign(0) is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AttackKind:
    FGSM = "fgsm"
    PGD = "pgd"
    MIM = "mim"

    ALL = (FGSM, PGD, MIM)


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    epsilon: float
    step_size: float | None = None
    iterations: int | None = None
    momentum: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in AttackKind.ALL:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.kind in (AttackKind.PGD, AttackKind.MIM):
            if self.step_size is None or self.step_size < 0:
                raise ValueError(f"{self.kind} needs a non-negative step size")
            if self.iterations is None or self.iterations < 1:
                raise ValueError(f"{self.kind} needs at least one iteration")
        if self.kind == AttackKind.MIM and (self.momentum is None or self.momentum < 0):
            raise ValueError("mim needs a non-negative momentum factor")


def make_spec(
    kind: str,
    epsilon: float,
    iterations: int = 10,
    step_ratio: float = 0.25,
    momentum: float = 1.0,
) -> AttackSpec:
    """Spec with the default iterative hyperparameters (alpha = eps * ratio)."""
    if kind == AttackKind.FGSM:
        return AttackSpec(kind, epsilon)
    if kind == AttackKind.PGD:
        return AttackSpec(kind, epsilon, step_size=epsilon * step_ratio, iterations=iterations)
    return AttackSpec(
        kind, epsilon, step_size=epsilon * step_ratio, iterations=iterations, momentum=momentum
    )


def _project(x: np.ndarray, origin: np.ndarray, epsilon: float) -> np.ndarray:
    return np.clip(origin + np.clip(x - origin, -epsilon, epsilon), 0.0, 1.0)


def fgsm(model, image: np.ndarray, label: int, spec: AttackSpec) -> np.ndarray:
    if spec.kind != AttackKind.FGSM:
        raise ValueError(f"expected an fgsm spec, got {spec.kind}")
    image = np.asarray(image, dtype=float)
    if spec.epsilon == 0:
        return image.copy()
    grad = model.input_gradient(image, label)
    return np.clip(image + spec.epsilon * np.sign(grad), 0.0, 1.0)


def pgd(model, image: np.ndarray, label: int, spec: AttackSpec) -> np.ndarray:
    if spec.kind != AttackKind.PGD:
        raise ValueError(f"expected a pgd spec, got {spec.kind}")
    image = np.asarray(image, dtype=float)
    x = image.copy()
    for _ in range(spec.iterations):
        grad = model.input_gradient(x, label)
        x = _project(x + spec.step_size * np.sign(grad), image, spec.epsilon)
    return x


def mim(model, image: np.ndarray, label: int, spec: AttackSpec) -> np.ndarray:
    if spec.kind != AttackKind.MIM:
        raise ValueError(f"expected a mim spec, got {spec.kind}")
    image = np.asarray(image, dtype=float)
    x = image.copy()
    g = np.zeros_like(image)
    for _ in range(spec.iterations):
        grad = model.input_gradient(x, label)
        l1 = np.sum(np.abs(grad))
        # a vanished gradient contributes nothing this step
        g = spec.momentum * g + (grad / l1 if l1 > 0 else 0.0)
        x = _project(x + spec.step_size * np.sign(g), image, spec.epsilon)
    return x


_GENERATORS = {AttackKind.FGSM: fgsm, AttackKind.PGD: pgd, AttackKind.MIM: mim}


def generate(model, image: np.ndarray, label: int, spec: AttackSpec) -> np.ndarray:
    return _GENERATORS[spec.kind](model, image, label, spec)


# ---------------------------------------------------------------------------
# Robustness and transfer evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobustnessCurve:
    model_kind: str
    model_fingerprint: str
    attack_kind: str
    points: tuple[tuple[float, float], ...]  # (epsilon, accuracy)

    def __post_init__(self) -> None:
        epsilons = [e for e, _ in self.points]
        if not epsilons or epsilons[0] != 0.0:
            raise ValueError("a robustness curve must start at epsilon = 0")
        if any(b <= a for a, b in zip(epsilons, epsilons[1:])):
            raise ValueError("curve epsilons must be strictly increasing")
        if any(not 0.0 <= acc <= 1.0 for _, acc in self.points):
            raise ValueError("accuracies must lie in [0, 1]")


def _check_grid(specs) -> None:
    if not specs:
        raise ValueError("empty attack grid")
    kinds = {s.kind for s in specs}
    if len(kinds) != 1:
        raise ValueError(f"attack grid mixes kinds {sorted(kinds)}")
    epsilons = [s.epsilon for s in specs]
    if epsilons[0] != 0.0 or any(b <= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("attack grid epsilons must start at 0 and increase strictly")


def evaluate_robustness(model, images, labels, specs) -> RobustnessCurve:
    """White-box accuracy-versus-epsilon curve of a model attacked by itself."""
    if len(images) == 0:
        raise ValueError("cannot evaluate robustness on an empty image set")
    _check_grid(specs)
    kind = specs[0].kind
    points = []
    if kind == AttackKind.FGSM:
        # the gradient is evaluated at the clean input only, so it is shared
        # by every epsilon in the grid
        signs = [np.sign(model.input_gradient(img, int(lbl))) for img, lbl in zip(images, labels)]
        for spec in specs:
            hits = 0
            for img, lbl, s in zip(images, labels, signs):
                adv = img if spec.epsilon == 0 else np.clip(img + spec.epsilon * s, 0.0, 1.0)
                hits += model.predict_label(adv) == int(lbl)
            points.append((spec.epsilon, hits / len(images)))
    else:
        for spec in specs:
            hits = 0
            for img, lbl in zip(images, labels):
                adv = generate(model, img, int(lbl), spec)
                hits += model.predict_label(adv) == int(lbl)
            points.append((spec.epsilon, hits / len(images)))
    return RobustnessCurve(
        model_kind=model.kind,
        model_fingerprint=model.fingerprint,
        attack_kind=kind,
        points=tuple(points),
    )


def transfer_attack(source_model, target_model, images, labels, spec: AttackSpec) -> float:
    """Accuracy of the target on examples crafted against the source."""
    if len(images) == 0:
        raise ValueError("cannot evaluate a transfer attack on an empty image set")
    hits = 0
    for img, lbl in zip(images, labels):
        adv = generate(source_model, img, int(lbl), spec)
        hits += target_model.predict_label(adv) == int(lbl)
    return hits / len(images)


# ---------------------------------------------------------------------------
# Adversarial batches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialBatch:
    originals: np.ndarray  # (N, H, W)
    adversarials: np.ndarray  # (N, H, W)
    source_fingerprint: str
    spec: AttackSpec

    def __post_init__(self) -> None:
        if self.originals.shape != self.adversarials.shape:
            raise ValueError("original and adversarial stacks must share a shape")
        overshoot = np.max(np.abs(self.adversarials - self.originals), initial=0.0)
        if overshoot > self.spec.epsilon + 1e-12:
            raise ValueError(
                f"adversarial examples exceed the epsilon ball: {overshoot} > {self.spec.epsilon}"
            )
        if self.adversarials.size and (
            np.min(self.adversarials) < 0.0 or np.max(self.adversarials) > 1.0
        ):
            raise ValueError("adversarial pixels must lie in [0, 1]")


def make_batch(model, images, labels, spec: AttackSpec) -> AdversarialBatch:
    adversarials = np.stack([generate(model, img, int(lbl), spec) for img, lbl in zip(images, labels)])
    return AdversarialBatch(
        originals=np.asarray(images, dtype=float).copy(),
        adversarials=adversarials,
        source_fingerprint=model.fingerprint,
        spec=spec,
    )


def save_batch(path, batch: AdversarialBatch) -> None:
    """Text header, blank line, then (original, adversarial) f8 pairs."""
    spec = batch.spec
    n, h, w = batch.originals.shape
    header = (
        f"kind={spec.kind}\n"
        f"epsilon={spec.epsilon:.17g}\n"
        f"step_size={'' if spec.step_size is None else format(spec.step_size, '.17g')}\n"
        f"iterations={'' if spec.iterations is None else spec.iterations}\n"
        f"momentum={'' if spec.momentum is None else format(spec.momentum, '.17g')}\n"
        f"source_fingerprint={batch.source_fingerprint}\n"
        f"count={n}\nheight={h}\nwidth={w}\n\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode())
        for orig, adv in zip(batch.originals, batch.adversarials):
            fh.write(orig.astype("<f8").tobytes())
            fh.write(adv.astype("<f8").tobytes())


def load_batch(path) -> AdversarialBatch:
    raw = open(path, "rb").read()
    sep = raw.find(b"\n\n")
    if sep < 0:
        raise ValueError(f"adversarial batch {path} has no header")
    fields = dict(line.split("=", 1) for line in raw[:sep].decode().splitlines())
    n, h, w = int(fields["count"]), int(fields["height"]), int(fields["width"])
    spec = AttackSpec(
        kind=fields["kind"],
        epsilon=float(fields["epsilon"]),
        step_size=float(fields["step_size"]) if fields["step_size"] else None,
        iterations=int(fields["iterations"]) if fields["iterations"] else None,
        momentum=float(fields["momentum"]) if fields["momentum"] else None,
    )
    body = raw[sep + 2 :]
    per_image = h * w
    expected = 2 * n * per_image * 8
    if len(body) != expected:
        raise ValueError(f"adversarial batch {path} body has {len(body)} bytes, expected {expected}")
    pairs = np.frombuffer(body, dtype="<f8").reshape(n, 2, h, w)
    return AdversarialBatch(
        originals=pairs[:, 0].copy(),
        adversarials=pairs[:, 1].copy(),
        source_fingerprint=fields["source_fingerprint"],
        spec=spec,
    )
