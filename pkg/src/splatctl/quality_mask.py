"""View reliability from keypoint inlier counts, and Bernoulli pixel masks.

A view's inlier ratio maps to a pixel drop rate; a seeded Bernoulli draw
then excludes that fraction of pixels from photometric supervision.
Masks are pure functions of (seed, dimensions, drop rate), so a training
loop that derives one seed per (frame, iteration) is fully reproducible.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMaskWarning, DimensionMismatch, SchemaError


@dataclass(frozen=True)
class MatchStats:
    """Keypoint and inlier counts reported by an external matcher."""

    frame_index: int
    keypoints: int
    inliers: int


@dataclass(frozen=True)
class MaskConfig:
    eta: float = 0.5
    epsilon: float = 1e-6
    seed_base: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class MaskPlan:
    """A drop decision per pixel; mask value True means the pixel is kept."""

    frame_index: int
    drop_rate: float
    seed: int
    mask: np.ndarray                 # (height, width) bool
    inlier_ratio: float | None = None

    @property
    def kept_fraction(self) -> float:
        return float(self.mask.mean())


def inlier_ratio(stats: MatchStats, epsilon: float) -> float:
    """inliers / (keypoints + epsilon); zero keypoints yield zero."""
    return stats.inliers / (stats.keypoints + epsilon)


def drop_rate(r: float, eta: float) -> float:
    """eta * (1 - r): fully reliable views drop nothing."""
    return eta * (1.0 - r)


def mask_seed(seed_base: int, frame_index: int, iteration: int) -> int:
    """Stable 64-bit seed for one (frame, iteration) mask draw."""
    state = np.random.SeedSequence([seed_base, frame_index, iteration]).generate_state(1, np.uint64)
    return int(state[0])


def make_mask(
    width: int,
    height: int,
    d: float,
    seed: int,
    frame_index: int = 0,
    inlier_ratio: float | None = None,
) -> MaskPlan:
    """Draw an independent per-pixel keep mask with drop probability ``d``."""
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be at least 1x1")
    if not 0.0 <= d <= 1.0:
        raise ValueError("drop rate must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((height, width)) >= d
    return MaskPlan(frame_index=frame_index, drop_rate=d, seed=seed, mask=mask, inlier_ratio=inlier_ratio)


def plan_for_frame(
    stats: MatchStats, cfg: MaskConfig, width: int, height: int, iteration: int = 0
) -> MaskPlan:
    """Compose ratio, drop rate, seed derivation, and the mask draw."""
    r = inlier_ratio(stats, cfg.epsilon)
    d = drop_rate(r, cfg.eta)
    seed = mask_seed(cfg.seed_base, stats.frame_index, iteration)
    return make_mask(width, height, d, seed, frame_index=stats.frame_index, inlier_ratio=r)


def masked_photometric_loss(render: np.ndarray, target: np.ndarray, plan: MaskPlan) -> float:
    """Mean absolute color difference over kept pixels.

    An all-dropped mask returns 0 and emits DegenerateMaskWarning.
    """
    render = np.asarray(render, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if render.shape != target.shape:
        raise DimensionMismatch(f"render {render.shape} vs target {target.shape}")
    if render.shape[:2] != plan.mask.shape:
        raise DimensionMismatch(f"images {render.shape[:2]} vs mask {plan.mask.shape}")
    kept = plan.mask
    if not kept.any():
        warnings.warn("mask drops every pixel; loss is vacuous", DegenerateMaskWarning, stacklevel=2)
        return 0.0
    return float(np.abs(render[kept] - target[kept]).mean())


def to_pbm(plan: MaskPlan) -> str:
    """ASCII PBM rendering of the mask; 1 (black) marks dropped pixels."""
    h, w = plan.mask.shape
    rows = [" ".join("0" if kept else "1" for kept in row) for row in plan.mask]
    return f"P1\n{w} {h}\n" + "\n".join(rows) + "\n"


def load_match_stats(text: bytes | str) -> list[MatchStats]:
    """Parse the match-stats interchange JSON: [{frame_index, keypoints, inliers}].

    Structural problems raise SchemaError with the JSON path; value-domain
    checks live in :func:`validate_match_stats`.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise SchemaError("$", f"expected an array, got {type(doc).__name__}")
    stats = []
    for i, obj in enumerate(doc):
        path = f"$[{i}]"
        if not isinstance(obj, dict):
            raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
        values = {}
        for key in ("frame_index", "keypoints", "inliers"):
            if key not in obj:
                raise SchemaError(f"{path}.{key}", "missing required key")
            value = obj[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(f"{path}.{key}", f"expected an integer, got {value!r}")
            values[key] = value
        stats.append(MatchStats(**values))
    return stats


def validate_match_stats(stats: list[MatchStats]) -> list[tuple[int, str]]:
    """Domain checks; returns (frame_index, message) per violation."""
    problems = []
    for s in stats:
        if s.keypoints < 0 or s.inliers < 0:
            problems.append((s.frame_index, "counts must be non-negative"))
        elif s.inliers > s.keypoints:
            problems.append((s.frame_index, f"inliers {s.inliers} exceed keypoints {s.keypoints}"))
    return problems


def serialize_match_stats(stats: list[MatchStats]) -> str:
    rows = [
        {"frame_index": s.frame_index, "keypoints": s.keypoints, "inliers": s.inliers}
        for s in stats
    ]
    return json.dumps(rows, indent=2, sort_keys=True)
