"""Masked photometric loss and analytic parameter gradients.

The loss is the mean squared color error over kept pixels. Gradients come
from differentiating the compositing sum directly: for primitive i with
blend weight alpha_i * T_i, the derivative of the pixel color with
respect to alpha_i is T_i * (c_i - R_i), where R_i is the color the
primitives behind i (plus background) would composite to on their own.
R_i is accumulated with a back-to-front recurrence, which avoids the
numerically fragile division by (1 - alpha_i). Spatial and covariance
gradients reduce to per-primitive moments sum(ga * dx^a * dy^b), so the
heavy pixel work is a handful of batched products and reductions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateMaskWarning, DimensionMismatch
from ..quality_mask import MaskPlan
from .render import RenderCache, Workspace, forward
from .scene import Scene2D


@dataclass
class SceneGradients:
    """Loss gradients per primitive, one row per parameter class."""

    mean: np.ndarray           # (N, 2)
    log_scales: np.ndarray     # (N, 2)
    angle: np.ndarray          # (N,)
    opacity_logit: np.ndarray  # (N,)
    color: np.ndarray          # (N, 3)

    @classmethod
    def zeros(cls, n: int) -> "SceneGradients":
        return cls(
            mean=np.zeros((n, 2)),
            log_scales=np.zeros((n, 2)),
            angle=np.zeros(n),
            opacity_logit=np.zeros(n),
            color=np.zeros((n, 3)),
        )

    def mean_norms(self) -> np.ndarray:
        return np.linalg.norm(self.mean, axis=1)


def masked_mse(image: np.ndarray, target: np.ndarray, keep: np.ndarray | None) -> tuple[float, np.ndarray]:
    """Loss and its per-pixel color derivative; dropped pixels contribute zero."""
    err = image - target
    if keep is None:
        kept_count = err.shape[0] * err.shape[1]
        grad = (2.0 / (3.0 * kept_count)) * err
        return float(np.sum(err * err)) / (3.0 * kept_count), grad
    kept_count = int(keep.sum())
    if kept_count == 0:
        warnings.warn("mask drops every pixel; zero loss and gradients", DegenerateMaskWarning, stacklevel=3)
        return 0.0, np.zeros_like(err)
    masked = err * keep[:, :, None]
    grad = (2.0 / (3.0 * kept_count)) * masked
    return float(np.sum(masked * err)) / (3.0 * kept_count), grad


def loss_and_gradients(
    scene: Scene2D,
    target: np.ndarray,
    mask: MaskPlan | None = None,
    workspace: Workspace | None = None,
) -> tuple[float, SceneGradients]:
    """Render the scene and differentiate the masked MSE w.r.t. every parameter."""
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (scene.height, scene.width, 3):
        raise DimensionMismatch(f"target {target.shape} vs canvas {(scene.height, scene.width, 3)}")
    keep = None
    if mask is not None:
        if mask.mask.shape != (scene.height, scene.width):
            raise DimensionMismatch(f"mask {mask.mask.shape} vs canvas {(scene.height, scene.width)}")
        keep = mask.mask

    cache = forward(scene, workspace)
    loss, dldc = masked_mse(cache.image, target, keep)
    return loss, _backward(scene, cache, dldc)


def _backward(scene: Scene2D, cache: RenderCache, dldc: np.ndarray) -> SceneGradients:
    n = len(scene.primitives)
    grads = SceneGradients.zeros(n)
    if n == 0:
        return grads
    arrays = cache.arrays
    buffers = cache.buffers
    alpha = cache.alpha
    colors = arrays.colors

    # Behind-colors: composite of primitives i+1.. over the background.
    behind = buffers["behind"]
    om = buffers["scratch_hw"]
    ac = buffers["scratch_hw3"]
    behind[n - 1] = scene.background
    for i in range(n - 1, 0, -1):
        np.subtract(1.0, alpha[i], out=om)
        np.multiply(om[:, :, None], behind[i], out=behind[i - 1])
        np.multiply(alpha[i, :, :, None], colors[i][None, None, :], out=ac)
        behind[i - 1] += ac

    # d(loss)/d(alpha_i) = sum_ch dldc * T_i * (c_i - behind_i)
    diff = np.subtract(colors[:, None, None, :], behind, out=behind)
    grad_alpha = np.einsum("nhwc,hwc->nhw", diff, dldc, out=buffers["grad_alpha"])
    grad_alpha *= cache.trans_before

    grads.color = np.einsum("nhw,hwc->nc", cache.weights, dldc)

    sum_ga_gauss = np.einsum("nhw,nhw->n", grad_alpha, cache.gauss)
    grads.opacity_logit = sum_ga_gauss * arrays.opacities * (1.0 - arrays.opacities)

    # Moments sum(ga * dx^a * dy^b) carry all spatial/covariance gradients.
    ga = np.multiply(grad_alpha, alpha, out=buffers["ga"])
    dx, dy = cache.dx, cache.dy
    gad = np.multiply(ga, dx, out=buffers["gad"])
    s10 = np.einsum("nhw->n", gad)
    s20 = np.einsum("nhw,nhw->n", gad, dx)
    s11 = np.einsum("nhw,nhw->n", gad, dy)
    gad = np.multiply(ga, dy, out=buffers["gad"])
    s01 = np.einsum("nhw->n", gad)
    s02 = np.einsum("nhw,nhw->n", gad, dy)

    m11, m12, m22 = arrays.inverse_covariances()
    grads.mean[:, 0] = m11 * s10 + m12 * s01
    grads.mean[:, 1] = m12 * s10 + m22 * s01

    # u = R^T M d expressed as linear forms in (dx, dy).
    c = np.cos(arrays.angles)
    s = np.sin(arrays.angles)
    p1 = c * m11 + s * m12
    p2 = c * m12 + s * m22
    q1 = c * m12 - s * m11
    q2 = c * m22 - s * m12
    su1u1 = p1 * p1 * s20 + 2.0 * p1 * p2 * s11 + p2 * p2 * s02
    su2u2 = q1 * q1 * s20 + 2.0 * q1 * q2 * s11 + q2 * q2 * s02
    su1u2 = p1 * q1 * s20 + (p1 * q2 + p2 * q1) * s11 + p2 * q2 * s02
    v1 = arrays.scales[:, 0] * arrays.scales[:, 0]
    v2 = arrays.scales[:, 1] * arrays.scales[:, 1]
    grads.log_scales[:, 0] = v1 * su1u1
    grads.log_scales[:, 1] = v2 * su2u2
    grads.angle = (v1 - v2) * su1u2
    return grads
