"""2D scene container and grid initialization.

Pixel centers sit at integer coordinates, so a primitive with mean
(x, y) peaks at column x, row y. Primitive list order doubles as depth
order: earlier entries composite in front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..density_control import Anchor, AnchorPopulation, GaussianPrimitive

MIN_CANVAS = 8


@dataclass
class Scene2D:
    population: AnchorPopulation
    width: int
    height: int
    background: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.background = np.asarray(self.background, dtype=np.float64)
        if self.width < MIN_CANVAS or self.height < MIN_CANVAS:
            raise ValueError(f"canvas must be at least {MIN_CANVAS}x{MIN_CANVAS}")

    @property
    def anchors(self) -> list[Anchor]:
        return self.population.anchors

    @property
    def primitives(self) -> list[GaussianPrimitive]:
        return self.population.primitives


def gaussian_mean_from_anchor(anchor: Anchor, i: int) -> np.ndarray:
    """Child mean: anchor position + offset scaled by the anchor's factor."""
    if not 0 <= i < len(anchor.offsets):
        raise IndexError(f"offset index {i} out of range for {len(anchor.offsets)} offsets")
    return anchor.position + anchor.offsets[i] * anchor.scale_factor


_CHILD_OFFSETS = np.array([[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [0.5, 0.5]])


def grid_scene(
    width: int,
    height: int,
    anchors_per_axis: int = 4,
    opacity: float = 0.5,
    color=(0.5, 0.5, 0.5),
    background=(0.0, 0.0, 0.0),
) -> Scene2D:
    """Uniform initialization: anchors on a grid, four children per anchor.

    Children sit half an anchor pitch from their anchor, forming a uniform
    primitive grid of twice the anchor resolution; covariance std is half
    the primitive pitch.
    """
    anchors: list[Anchor] = []
    primitives: list[GaussianPrimitive] = []
    pitch_x = width / anchors_per_axis
    pitch_y = height / anchors_per_axis
    std = min(pitch_x, pitch_y) / 4.0
    log_scales = np.full(2, math.log(std))
    for gy in range(anchors_per_axis):
        for gx in range(anchors_per_axis):
            position = np.array([(gx + 0.5) * pitch_x, (gy + 0.5) * pitch_y])
            scale_factor = min(pitch_x, pitch_y)
            children = []
            for off in _CHILD_OFFSETS:
                children.append(len(primitives))
                primitives.append(
                    GaussianPrimitive(
                        mean=position + off * scale_factor,
                        log_scales=log_scales.copy(),
                        angle=0.0,
                        opacity_logit=math.log(opacity / (1.0 - opacity)),
                        color=np.array(color, dtype=np.float64),
                    )
                )
            anchors.append(
                Anchor(
                    position=position,
                    offsets=_CHILD_OFFSETS.copy(),
                    scale_factor=scale_factor,
                    scale_vector=np.abs(_CHILD_OFFSETS).mean(axis=0) * scale_factor,
                    children=children,
                )
            )
    return Scene2D(
        population=AnchorPopulation(anchors=anchors, primitives=primitives),
        width=width,
        height=height,
        background=np.asarray(background, dtype=np.float64),
    )
