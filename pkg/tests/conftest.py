from __future__ import annotations

import numpy as np
import pytest

from splatctl.codec_log import FrameLogSeries, FrameRecord, FrameType, LogSource
from splatctl.density_control import Anchor, AnchorPopulation, GaussianPrimitive
from splatctl.splat_sim.scene import Scene2D


def make_series(qps, bits, types=None, source=LogSource.SYNTHETIC) -> FrameLogSeries:
    types = types or [FrameType.P] * len(qps)
    records = tuple(
        FrameRecord(display_index=t, frame_type=types[t], qp=float(qps[t]), bits=float(bits[t]))
        for t in range(len(qps))
    )
    return FrameLogSeries(records, source=source)


def gop_series(n_frames: int, gop: int = 8, base_qp: float = 37.0) -> FrameLogSeries:
    """Sawtooth log: I-frames get the lowest QP and the most bits."""
    qps, bits, types = [], [], []
    for t in range(n_frames):
        pos = t % gop
        if pos == 0:
            qps.append(base_qp - 6.0)
            bits.append(50_000.0 - 10.0 * t)
            types.append(FrameType.I)
        else:
            qps.append(base_qp + 0.25 * pos)
            bits.append(9_000.0 - 120.0 * pos - 10.0 * t)
            types.append(FrameType.B if pos % 2 else FrameType.P)
    return make_series(qps, bits, types)


def random_population(seed: int, n_primitives: int, n_anchors: int = 4) -> AnchorPopulation:
    rng = np.random.default_rng(seed)
    anchors = []
    for a in range(n_anchors):
        anchors.append(
            Anchor(
                position=rng.uniform(0, 64, 2),
                offsets=rng.uniform(-1, 1, (4, 2)),
                scale_factor=float(rng.uniform(0.5, 8.0)),
                scale_vector=rng.uniform(0.1, 6.0, 2),
                children=[],
            )
        )
    primitives = []
    for i in range(n_primitives):
        owner = int(rng.integers(0, n_anchors))
        anchors[owner].children.append(i)
        prim = GaussianPrimitive(
            mean=rng.uniform(0, 64, 2),
            log_scales=rng.uniform(np.log(0.5), np.log(8.0), 2),
            angle=float(rng.uniform(-np.pi, np.pi)),
            opacity_logit=float(rng.uniform(-6, 3)),
            color=rng.uniform(0, 1, 3),
            grad_accum=float(rng.uniform(0, 2e-3)),
            grad_count=int(rng.integers(1, 8)),
        )
        primitives.append(prim)
    return AnchorPopulation(anchors=anchors, primitives=primitives)


def random_scene(seed: int, n_primitives: int, width: int, height: int) -> Scene2D:
    rng = np.random.default_rng(seed)
    population = random_population(seed, n_primitives, n_anchors=max(1, n_primitives // 8))
    for prim in population.primitives:
        prim.mean = rng.uniform([-2.0, -2.0], [width + 2.0, height + 2.0])
        prim.log_scales = rng.uniform(np.log(0.8), np.log(8.0), 2)
    return Scene2D(
        population=population,
        width=width,
        height=height,
        background=rng.uniform(0, 1, 3),
    )


@pytest.fixture
def sample_csv() -> str:
    return (
        "Encode Order, Type, POC, QP, Bits, PSNR Y, PSNR U, PSNR V, PSNR, SSIM, RateFactor\n"
        " 0, I, 0, 27.00, 185000, 41.20, 44.10, 44.50, 41.90, 0.981, 25.1\n"
        " 2, B, 3, 31.25, 8000, 38.00, 42.00, 42.20, 38.90, 0.954, 29.3\n"
        " 1, P, 2, 29.00, 24000, 39.50, 43.00, 43.10, 40.20, 0.967, 27.2\n"
        " 3, B, 1, 31.00, 9000, 38.20, 42.10, 42.30, 39.00, 0.955, 29.1\n"
    )
