"""End-to-end harness: fit a degraded sequence with policy-driven density.

Each frame is scored once against the whole log, then optimized for a
fixed iteration budget with masked photometric supervision; the density
policy runs at a fixed interval using that frame's confidence row. The
whole run is a pure function of (sequence, config), so reports from equal
seeds are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..confidence import ScoringConfig, score_sequence
from ..density_control import (
    DensityPolicyConfig,
    PruneReason,
    apply_policy,
    thresholds_for,
    update_scale_vectors,
)
from ..errors import PolicyCollapse
from ..quality_mask import MaskConfig, drop_rate, inlier_ratio, make_mask, mask_seed
from .degrade import psnr
from .gradients import SceneGradients, loss_and_gradients
from .render import Workspace, render
from .scene import Scene2D, grid_scene
from .sequence import SyntheticSequence

MIN_LOG_SCALE = math.log(0.3)


@dataclass(frozen=True)
class ExperimentConfig:
    iterations_per_frame: int = 200
    densify_interval: int = 50
    lr_mean: float = 20.0
    lr_cov: float = 10.0
    lr_opacity: float = 400.0
    lr_color: float = 300.0
    seed: int = 0
    anchors_per_axis: int = 4
    max_primitives: int = 1000
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    density: DensityPolicyConfig = field(default_factory=DensityPolicyConfig)
    mask: MaskConfig = field(default_factory=MaskConfig)

    def __post_init__(self):
        if self.iterations_per_frame < 1 or self.densify_interval < 1:
            raise ValueError("iteration counts must be at least 1")
        for name in ("lr_mean", "lr_cov", "lr_opacity", "lr_color"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class FrameTrace:
    frame: int
    qp: float
    q: float
    q_bar: float
    theta: float
    omega_prime: float
    drop_rate: float
    psnr: float
    primitives: int
    densified: int
    pruned_opacity: int
    pruned_scale: int

    def to_json_dict(self) -> dict:
        return {k: (float(v) if isinstance(v, float) else int(v)) for k, v in vars(self).items()}


@dataclass
class ExperimentReport:
    frames: list[FrameTrace]
    population_curve: list[tuple[int, int, int]]  # (frame, iteration, count)
    totals: dict[str, int]
    final_primitive_count: int
    snapshots: list[np.ndarray] = field(default_factory=list, repr=False)
    audit: list[dict] = field(default_factory=list, repr=False)

    def audit_json_text(self) -> str:
        return json.dumps(self.audit, indent=2, sort_keys=True)

    def to_json_dict(self) -> dict:
        return {
            "frames": [ft.to_json_dict() for ft in self.frames],
            "population_curve": [[int(a), int(b), int(c)] for a, b, c in self.population_curve],
            "totals": {k: int(v) for k, v in sorted(self.totals.items())},
            "final_primitive_count": int(self.final_primitive_count),
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def traces_csv_text(self) -> str:
        lines = ["t,q,q_bar,theta,omega_prime"]
        for ft in self.frames:
            lines.append(f"{ft.frame},{ft.q!r},{ft.q_bar!r},{ft.theta!r},{ft.omega_prime!r}")
        return "\n".join(lines) + "\n"


def _sgd_step(scene: Scene2D, grads: SceneGradients, cfg: ExperimentConfig) -> None:
    max_log_scale = math.log(max(scene.width, scene.height))
    for i, prim in enumerate(scene.primitives):
        prim.mean -= cfg.lr_mean * grads.mean[i]
        prim.log_scales = np.clip(
            prim.log_scales - cfg.lr_cov * grads.log_scales[i], MIN_LOG_SCALE, max_log_scale
        )
        prim.angle -= cfg.lr_cov * grads.angle[i]
        prim.opacity_logit -= cfg.lr_opacity * grads.opacity_logit[i]
        prim.color = np.clip(prim.color - cfg.lr_color * grads.color[i], 0.0, 1.0)
        norm = float(np.hypot(grads.mean[i, 0], grads.mean[i, 1]))
        prim.grad_accum += norm
        prim.grad_count += 1


def run_experiment(seq: SyntheticSequence, cfg: ExperimentConfig) -> ExperimentReport:
    """Fit every frame in display order and return the audit report.

    Raises PolicyCollapse if density control empties the population.
    """
    n_frames = len(seq.ground_truth)
    h, w = seq.ground_truth[0].shape[:2]
    conf = score_sequence(seq.log, cfg.scoring)
    scene = grid_scene(w, h, cfg.anchors_per_axis)
    workspace = Workspace()

    curve: list[tuple[int, int, int]] = [(0, 0, len(scene.primitives))]
    traces: list[FrameTrace] = []
    snapshots: list[np.ndarray] = []
    audit: list[dict] = []
    totals = {"densified": 0, "pruned_opacity": 0, "pruned_scale": 0}

    for t in range(n_frames):
        target = seq.degraded[t]
        d = 0.0
        if seq.match_stats is not None:
            d = drop_rate(inlier_ratio(seq.match_stats[t], cfg.mask.epsilon), cfg.mask.eta)
        theta_t, omega_t = thresholds_for(float(conf.q[t]), float(conf.q_bar[t]), cfg.density)

        densified = pruned_opacity = pruned_scale = 0
        for it in range(cfg.iterations_per_frame):
            plan = None
            if d > 0.0:
                plan = make_mask(w, h, d, mask_seed(cfg.mask.seed_base, t, it), frame_index=t)
            _, grads = loss_and_gradients(scene, target, plan, workspace=workspace)
            _sgd_step(scene, grads, cfg)
            if (it + 1) % cfg.densify_interval == 0:
                update_scale_vectors(scene.population, cfg.density.scale_source)
                allow = len(scene.primitives) < cfg.max_primitives
                update = apply_policy(scene.population, conf, t, cfg.density, densify_enabled=allow)
                if not scene.primitives:
                    raise PolicyCollapse(f"population emptied at frame {t}, iteration {it + 1}")
                densified += len(update.densified)
                pruned_opacity += sum(1 for _, r in update.pruned if r is PruneReason.OPACITY)
                pruned_scale += sum(1 for _, r in update.pruned if r is PruneReason.SCALE)
                curve.append((t, it + 1, len(scene.primitives)))
                audit.append({"frame": t, "iteration": it + 1, **update.to_json_dict()})

        final_render = render(scene)
        traces.append(
            FrameTrace(
                frame=t,
                qp=float(seq.qp_schedule[t]),
                q=float(conf.q[t]),
                q_bar=float(conf.q_bar[t]),
                theta=theta_t,
                omega_prime=omega_t,
                drop_rate=d,
                psnr=psnr(final_render, seq.ground_truth[t]),
                primitives=len(scene.primitives),
                densified=densified,
                pruned_opacity=pruned_opacity,
                pruned_scale=pruned_scale,
            )
        )
        snapshots.append(final_render)
        totals["densified"] += densified
        totals["pruned_opacity"] += pruned_opacity
        totals["pruned_scale"] += pruned_scale

    return ExperimentReport(
        frames=traces,
        population_curve=curve,
        totals=totals,
        final_primitive_count=len(scene.primitives),
        snapshots=snapshots,
        audit=audit,
    )
