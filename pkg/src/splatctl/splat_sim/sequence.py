"""Synthetic degraded sequences standing in for encoded video.

Ground-truth frames are procedural (drifting color blobs over a moving
grating whose spatial frequency varies per frame); degraded frames apply
the QP-driven blur/quantize model. The frame log is synthesized to match:
QP follows a GOP-style schedule where intra frames get the lowest QP, and
bits are proportional to the degraded frame's spatial-gradient energy so
the bit signal carries real content information. Matcher statistics fall
off with QP, exercising the mask pathway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..codec_log import FrameLogSeries, FrameRecord, FrameType, LogSource
from ..quality_mask import MatchStats
from .degrade import degrade_frame, gradient_energy

BITS_FLOOR = 400.0
BITS_PER_ENERGY = 300_000.0
KEYPOINT_BUDGET = 1000


@dataclass(frozen=True)
class SequenceConfig:
    frames: int = 8
    width: int = 64
    height: int = 64
    base_qp: float = 37.0
    gop: int = 32
    i_qp_drop: float = 4.0
    b_qp_rise: float = 2.0
    seed: int = 0
    blob_count: int = 5
    grating_amplitude: float = 0.18

    def __post_init__(self):
        if self.frames < 1 or self.gop < 1:
            raise ValueError("frames and gop must be at least 1")


@dataclass
class SyntheticSequence:
    ground_truth: list[np.ndarray]
    degraded: list[np.ndarray]
    qp_schedule: list[float]
    log: FrameLogSeries
    match_stats: list[MatchStats] | None = field(default=None)

    def __post_init__(self):
        lengths = {len(self.ground_truth), len(self.degraded), len(self.qp_schedule), len(self.log)}
        if self.match_stats is not None:
            lengths.add(len(self.match_stats))
        if len(lengths) != 1:
            raise ValueError("per-frame containers must have equal lengths")


def gop_frame_types(n_frames: int, gop: int) -> list[FrameType]:
    """I at each GOP start, alternating B (odd) and P (even) elsewhere."""
    types = []
    for t in range(n_frames):
        pos = t % gop
        if pos == 0:
            types.append(FrameType.I)
        elif pos % 2 == 1:
            types.append(FrameType.B)
        else:
            types.append(FrameType.P)
    return types


def sawtooth_qp_schedule(cfg: SequenceConfig) -> list[float]:
    """Frame-type-driven QP: intra frames dip, B frames ride high.

    Mirrors constant-QP encoder behavior where the per-frame average QP
    takes a few discrete values, so the QP signal is coarse and bit counts
    carry the finer ordering.
    """
    schedule = []
    for ftype in gop_frame_types(cfg.frames, cfg.gop):
        if ftype is FrameType.I:
            schedule.append(cfg.base_qp - cfg.i_qp_drop)
        elif ftype is FrameType.B:
            schedule.append(cfg.base_qp + cfg.b_qp_rise)
        else:
            schedule.append(cfg.base_qp)
    return schedule


def make_ground_truth(cfg: SequenceConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    w, h = cfg.width, cfg.height
    centers = rng.uniform([0.1 * w, 0.1 * h], [0.9 * w, 0.9 * h], size=(cfg.blob_count, 2))
    velocities = rng.uniform(-1.5, 1.5, size=(cfg.blob_count, 2))
    colors = rng.uniform(0.25, 1.0, size=(cfg.blob_count, 3))
    radii = rng.uniform(w / 8.0, w / 4.0, size=cfg.blob_count)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)

    frames = []
    for t in range(cfg.frames):
        img = np.full((h, w, 3), 0.08)
        # Grating frequency cycles so frames sharing a QP differ in texture.
        freq = 4.0 + 3.0 * math.sin(2.0 * math.pi * t / 5.0) + 0.8 * t
        theta = 0.3 + 0.15 * t
        phase = 0.9 * t
        wave = np.sin(2.0 * math.pi * freq * (xs * math.cos(theta) + ys * math.sin(theta)) / w + phase)
        img += cfg.grating_amplitude * wave[:, :, None]
        for b in range(cfg.blob_count):
            cx, cy = centers[b] + velocities[b] * t
            falloff = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * radii[b] ** 2))
            img += falloff[:, :, None] * (colors[b] - 0.5)[None, None, :]
        frames.append(np.clip(img, 0.0, 1.0))
    return frames


def synth_match_stats(qp_schedule: list[float]) -> list[MatchStats]:
    """Inlier counts decaying with QP: heavier compression, fewer stable matches."""
    stats = []
    for t, qp in enumerate(qp_schedule):
        ratio = min(max(1.0 - (qp - 22.0) / 45.0, 0.05), 0.999)
        stats.append(MatchStats(frame_index=t, keypoints=KEYPOINT_BUDGET, inliers=round(KEYPOINT_BUDGET * ratio)))
    return stats


def synthesize_sequence(cfg: SequenceConfig) -> SyntheticSequence:
    ground_truth = make_ground_truth(cfg)
    qp_schedule = sawtooth_qp_schedule(cfg)
    types = gop_frame_types(cfg.frames, cfg.gop)
    degraded = [degrade_frame(img, qp) for img, qp in zip(ground_truth, qp_schedule)]
    records = []
    for t in range(cfg.frames):
        bits = BITS_FLOOR + BITS_PER_ENERGY * gradient_energy(degraded[t])
        records.append(
            FrameRecord(
                display_index=t,
                frame_type=types[t],
                qp=qp_schedule[t],
                bits=bits,
                gop_position=t % cfg.gop,
            )
        )
    return SyntheticSequence(
        ground_truth=ground_truth,
        degraded=degraded,
        qp_schedule=qp_schedule,
        log=FrameLogSeries(tuple(records), source=LogSource.SYNTHETIC),
        match_stats=synth_match_stats(qp_schedule),
    )
