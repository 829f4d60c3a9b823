"""Densify/prune decisions for an anchor-based Gaussian population.

The base rule densifies a primitive when its accumulated positional
gradient exceeds a threshold and prunes it when its opacity falls below
one. Three modulations tie the thresholds to frame confidence:

* exponential: both thresholds scaled by exp(q_bar - q);
* linear: both scaled by 1 + alpha_lin * (q_bar - q), floored;
* scale-based pruning: per-anchor opacity threshold omega0 * exp(q_bar *
  normalized anchor scale), removing over-diffused primitives first.

``apply_policy`` composes these into one pass over the population and
returns an audit record.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AllZeroScales, ThresholdOverflowWarning

THETA_FLOOR = 1e-8
LINEAR_FACTOR_FLOOR = 0.05

_SIGMOID_SATURATION = 40.0  # logit magnitude at which sigmoid rounds to 0/1 in float64


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    if p >= 1.0:
        return _SIGMOID_SATURATION
    if p <= 0.0:
        return -_SIGMOID_SATURATION
    return math.log(p / (1.0 - p))


@dataclass
class GaussianPrimitive:
    """One 2D Gaussian, stored in its unconstrained optimization parameters.

    covariance = R(angle) diag(exp(log_scales))^2 R(angle)^T stays symmetric
    positive-definite and opacity = sigmoid(opacity_logit) stays in (0, 1]
    under arbitrary gradient steps.
    """

    mean: np.ndarray                 # (2,)
    log_scales: np.ndarray           # (2,)
    angle: float
    opacity_logit: float
    color: np.ndarray                # (3,) in [0, 1]
    grad_accum: float = 0.0
    grad_count: int = 0

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.log_scales = np.asarray(self.log_scales, dtype=np.float64)
        self.color = np.asarray(self.color, dtype=np.float64)

    @property
    def opacity(self) -> float:
        return _sigmoid(self.opacity_logit)

    @property
    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    @property
    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    @property
    def covariance(self) -> np.ndarray:
        # Closed-form R diag(v) R^T keeps the arithmetic identical to the
        # batched renderer path, so both derive bit-equal matrices.
        c, s = float(np.cos(self.angle)), float(np.sin(self.angle))
        sc = self.scales
        v1 = sc[0] * sc[0]
        v2 = sc[1] * sc[1]
        s11 = c * v1 * c + (-s) * v2 * (-s)
        s12 = c * v1 * s + (-s) * v2 * c
        s22 = s * v1 * s + c * v2 * c
        return np.array([[s11, s12], [s12, s22]])

    @property
    def mean_gradient(self) -> float:
        """Average positional-gradient norm since the last densify/reset."""
        return self.grad_accum / max(self.grad_count, 1)

    def reset_gradients(self) -> None:
        self.grad_accum = 0.0
        self.grad_count = 0

    @classmethod
    def from_covariance(cls, mean, covariance, opacity: float, color, **kwargs) -> "GaussianPrimitive":
        cov = np.asarray(covariance, dtype=np.float64)
        eigvals, eigvecs = np.linalg.eigh(cov)
        if np.any(eigvals <= 0):
            raise ValueError("covariance must be positive-definite")
        angle = math.atan2(eigvecs[1, 0], eigvecs[0, 0])
        return cls(
            mean=mean,
            log_scales=0.5 * np.log(eigvals),
            angle=angle,
            opacity_logit=_logit(opacity),
            color=color,
            **kwargs,
        )

    def clone_jittered(self) -> "GaussianPrimitive":
        """Copy displaced by one standard deviation along the dominant axis."""
        k = int(np.argmax(self.log_scales))
        direction = self.rotation[:, k]
        return GaussianPrimitive(
            mean=self.mean + direction * self.scales[k],
            log_scales=self.log_scales.copy(),
            angle=self.angle,
            opacity_logit=self.opacity_logit,
            color=self.color.copy(),
        )


@dataclass
class Anchor:
    """Spatial point owning child Gaussians via offsets and a scale factor."""

    position: np.ndarray             # (2,)
    offsets: np.ndarray              # (k, 2)
    scale_factor: float
    scale_vector: np.ndarray         # (2,) non-negative representative scale
    children: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.offsets = np.asarray(self.offsets, dtype=np.float64)
        self.scale_vector = np.asarray(self.scale_vector, dtype=np.float64)
        if self.offsets.ndim != 2 or self.offsets.shape[0] < 1:
            raise ValueError("an anchor needs at least one offset")
        if self.scale_factor <= 0:
            raise ValueError("scale_factor must be positive")


@dataclass
class AnchorPopulation:
    anchors: list[Anchor]
    primitives: list[GaussianPrimitive]

    def __len__(self) -> int:
        return len(self.primitives)

    def anchor_of(self) -> list[int]:
        """Primitive index -> owning anchor index."""
        owner = [-1] * len(self.primitives)
        for ai, anchor in enumerate(self.anchors):
            for child in anchor.children:
                owner[child] = ai
        return owner


class Decision(Enum):
    DENSIFY = "densify"
    PRUNE = "prune"
    KEEP = "keep"


class PruneReason(Enum):
    OPACITY = "opacity"
    SCALE = "scale"


class Modulation(Enum):
    FIXED = "fixed"
    EXPONENTIAL = "exponential"
    LINEAR_VARIANT = "linear"


class ScaleSource(Enum):
    """How an anchor's representative scale vector is derived."""

    OFFSET_MEAN = "offset_mean"          # componentwise mean |offset| * scale_factor
    COVARIANCE_SCALE = "covariance_scale"  # mean of children's covariance stds


@dataclass(frozen=True)
class DensityPolicyConfig:
    theta0: float = 2e-4
    omega0: float = 0.005
    modulation: Modulation = Modulation.EXPONENTIAL
    alpha_lin: float = 1.0
    scale_pruning: bool = True
    scale_source: ScaleSource = ScaleSource.OFFSET_MEAN

    def __post_init__(self):
        if self.theta0 <= 0:
            raise ValueError("theta0 must be positive")
        if not 0.0 < self.omega0 < 1.0:
            raise ValueError("omega0 must lie strictly between 0 and 1")


@dataclass
class DensityUpdate:
    """Audit record of one policy application; indices are pre-update."""

    densified: list[tuple[int, GaussianPrimitive]]
    pruned: list[tuple[int, PruneReason]]
    theta: float
    omega_prime: float
    anchor_omegas: list[float] | None

    def to_json_dict(self) -> dict:
        return {
            "densified_parents": [int(parent) for parent, _ in self.densified],
            "pruned": [{"index": int(i), "reason": reason.value} for i, reason in self.pruned],
            "thresholds": {
                "theta": float(self.theta),
                "omega_prime": float(self.omega_prime),
                "anchor_omegas": None if self.anchor_omegas is None else [float(w) for w in self.anchor_omegas],
            },
        }


def base_decision(g: float, alpha: float, theta: float, omega: float) -> Decision:
    """Densify on g > theta, else prune on alpha < omega, else keep.

    Comparisons are strict; ties keep the primitive.
    """
    if g > theta:
        return Decision.DENSIFY
    if alpha < omega:
        return Decision.PRUNE
    return Decision.KEEP


def anchor_scale_norm(anchors: list[Anchor]) -> np.ndarray:
    """Scale norms normalized by their median across the scene.

    Even anchor counts use the mean of the two middle norms as the median.
    """
    if not anchors:
        raise ValueError("need at least one anchor")
    norms = np.array([float(np.linalg.norm(a.scale_vector)) for a in anchors])
    med = float(np.median(norms))
    if med == 0.0:
        raise AllZeroScales("median anchor scale is zero")
    return norms / med


def scale_prune_threshold(q_bar: float, u_tilde: float, omega0: float) -> float:
    """Per-anchor opacity threshold omega0 * exp(q_bar * u_tilde), clamped to 1."""
    value = omega0 * math.exp(q_bar * u_tilde)
    if value > 1.0:
        warnings.warn(
            f"scale-pruning threshold {value:.4g} exceeds 1; clamped",
            ThresholdOverflowWarning,
            stacklevel=2,
        )
        return 1.0
    return value


def adaptive_thresholds(q: float, q_bar: float, theta0: float, omega0: float) -> tuple[float, float]:
    """Exponential modulation: both base thresholds scaled by exp(q_bar - q).

    theta is floored at 1e-8 and omega clamped to at most 1; within the
    meaningful confidence range neither clamp engages.
    """
    factor = math.exp(q_bar - q)
    return max(theta0 * factor, THETA_FLOOR), min(omega0 * factor, 1.0)


def linear_variant_thresholds(
    q: float, q_bar: float, theta0: float, omega0: float, alpha_lin: float
) -> tuple[float, float]:
    """Linear modulation: both thresholds scaled by 1 + alpha_lin * (q_bar - q).

    The factor is floored at 0.05 so a large favorable gap cannot produce a
    non-positive threshold.
    """
    factor = max(1.0 + alpha_lin * (q_bar - q), LINEAR_FACTOR_FLOOR)
    return max(theta0 * factor, THETA_FLOOR), min(omega0 * factor, 1.0)


def thresholds_for(q: float, q_bar: float, cfg: DensityPolicyConfig) -> tuple[float, float]:
    if cfg.modulation is Modulation.FIXED:
        return cfg.theta0, cfg.omega0
    if cfg.modulation is Modulation.EXPONENTIAL:
        return adaptive_thresholds(q, q_bar, cfg.theta0, cfg.omega0)
    return linear_variant_thresholds(q, q_bar, cfg.theta0, cfg.omega0, cfg.alpha_lin)


def update_scale_vectors(population: AnchorPopulation, source: ScaleSource) -> None:
    """Refresh every anchor's representative scale vector in place."""
    for anchor in population.anchors:
        if source is ScaleSource.OFFSET_MEAN:
            anchor.scale_vector = np.mean(np.abs(anchor.offsets), axis=0) * anchor.scale_factor
        else:
            if anchor.children:
                stds = np.stack([population.primitives[c].scales for c in anchor.children])
                anchor.scale_vector = stds.mean(axis=0)
            else:
                anchor.scale_vector = np.zeros(2)


def apply_policy(
    population: AnchorPopulation,
    conf,
    t: int,
    cfg: DensityPolicyConfig,
    densify_enabled: bool = True,
) -> DensityUpdate:
    """Run one densify/prune pass over the population, mutating it.

    ``conf`` is a scored sequence providing q and q_bar at frame ``t``.
    Densification clones the selected primitive (jittered along its dominant
    covariance axis) and resets both copies' gradient accumulators; a
    densified primitive is never also pruned in the same pass. Pruned
    primitives are removed and anchor child lists are reindexed.
    ``densify_enabled=False`` turns Densify decisions into Keep, letting a
    caller cap population growth without touching the pruning rules.
    """
    if not population.primitives:
        raise ValueError("population is empty")
    q = float(conf.q[t])
    q_bar = float(conf.q_bar[t])
    theta, omega_prime = thresholds_for(q, q_bar, cfg)

    anchor_omegas: list[float] | None = None
    owner = population.anchor_of()
    if cfg.scale_pruning:
        u_tilde = anchor_scale_norm(population.anchors)
        anchor_omegas = [scale_prune_threshold(q_bar, float(u), cfg.omega0) for u in u_tilde]

    densified: list[tuple[int, GaussianPrimitive]] = []
    pruned: list[tuple[int, PruneReason]] = []
    for i, prim in enumerate(population.primitives):
        decision = base_decision(prim.mean_gradient, prim.opacity, theta, omega_prime)
        if decision is Decision.DENSIFY:
            if densify_enabled:
                densified.append((i, prim.clone_jittered()))
                prim.reset_gradients()
        elif decision is Decision.PRUNE:
            pruned.append((i, PruneReason.OPACITY))
        elif anchor_omegas is not None and owner[i] >= 0 and prim.opacity < anchor_omegas[owner[i]]:
            pruned.append((i, PruneReason.SCALE))

    # Rebuild the primitive list: survivors keep relative order, clones append.
    pruned_set = {i for i, _ in pruned}
    remap: dict[int, int] = {}
    survivors: list[GaussianPrimitive] = []
    for i, prim in enumerate(population.primitives):
        if i not in pruned_set:
            remap[i] = len(survivors)
            survivors.append(prim)
    for anchor in population.anchors:
        anchor.children = [remap[c] for c in anchor.children if c in remap]
    for parent, clone in densified:
        new_index = len(survivors)
        survivors.append(clone)
        if owner[parent] >= 0:
            population.anchors[owner[parent]].children.append(new_index)
    population.primitives = survivors

    return DensityUpdate(
        densified=densified,
        pruned=pruned,
        theta=theta,
        omega_prime=omega_prime,
        anchor_omegas=anchor_omegas,
    )
