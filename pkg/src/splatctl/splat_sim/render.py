"""Front-to-back alpha compositing of 2D Gaussians.

Per pixel p and primitive i, alpha_i(p) = opacity_i * exp(-0.5 * (p -
mu_i)^T Sigma_i^{-1} (p - mu_i)); the pixel color is the transmittance-
weighted sum of primitive colors with the residual transmittance applied
to the background. Evaluation is batched over primitives, but every
reduction (cumulative transmittance, color accumulation) runs in
primitive order with a fixed floating-point operation sequence per pixel,
so results match a naive per-pixel front-to-back loop bit for bit and
blend weights plus residual transmittance sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import SingularCovariance
from .scene import Scene2D

CONDITION_LIMIT = 1e8


@dataclass
class SceneArrays:
    """Primitive parameters stacked for vectorized evaluation."""

    means: np.ndarray       # (N, 2)
    scales: np.ndarray      # (N, 2) exp(log_scales)
    angles: np.ndarray      # (N,)
    opacities: np.ndarray   # (N,)
    colors: np.ndarray      # (N, 3)

    @classmethod
    def from_scene(cls, scene: Scene2D) -> "SceneArrays":
        n = len(scene.primitives)
        if n == 0:
            return cls(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0), np.zeros(0), np.zeros((0, 3)))
        return cls(
            means=np.stack([p.mean for p in scene.primitives]),
            scales=np.stack([p.scales for p in scene.primitives]),
            angles=np.array([p.angle for p in scene.primitives]),
            opacities=np.array([p.opacity for p in scene.primitives]),
            colors=np.stack([p.color for p in scene.primitives]),
        )

    def inverse_covariances(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Entries (m11, m12, m22) of each Sigma^{-1}.

        Uses the same closed-form covariance arithmetic as the primitive
        property, so per-primitive and batched evaluation agree bit for bit.
        """
        c = np.cos(self.angles)
        s = np.sin(self.angles)
        v1 = self.scales[:, 0] * self.scales[:, 0]
        v2 = self.scales[:, 1] * self.scales[:, 1]
        s11 = c * v1 * c + (-s) * v2 * (-s)
        s12 = c * v1 * s + (-s) * v2 * c
        s22 = s * v1 * s + c * v2 * c
        det = s11 * s22 - s12 * s12
        return s22 / det, -s12 / det, s11 / det


class Workspace:
    """Scratch buffers reused across same-shape forward/backward passes.

    A workspace must not be shared between concurrent renders, and a
    RenderCache built on one is only valid until the next call that reuses
    it.
    """

    _NHW = ("dx", "dy", "quad", "tmp", "gauss", "alpha", "trans_before", "weights", "grad_alpha", "ga", "gad")

    def __init__(self):
        self._shape: tuple[int, int, int] | None = None
        self.buffers: dict[str, np.ndarray] = {}

    def for_shape(self, n: int, h: int, w: int) -> dict[str, np.ndarray]:
        if self._shape != (n, h, w):
            self._shape = (n, h, w)
            self.buffers = {name: np.empty((n, h, w)) for name in self._NHW}
            self.buffers["behind"] = np.empty((n, h, w, 3))
            self.buffers["scratch_hw"] = np.empty((h, w))
            self.buffers["scratch_hw3"] = np.empty((h, w, 3))
        return self.buffers


@dataclass
class RenderCache:
    """Forward-pass intermediates reused by the gradient computation."""

    image: np.ndarray          # (H, W, 3)
    alpha: np.ndarray          # (N, H, W) per-primitive alpha maps
    gauss: np.ndarray          # (N, H, W) Gaussian falloff without opacity
    trans_before: np.ndarray   # (N, H, W) transmittance in front of each primitive
    trans_final: np.ndarray    # (H, W) residual transmittance
    weights: np.ndarray        # (N, H, W) blend weights alpha_i * T_i
    arrays: SceneArrays
    dx: np.ndarray             # (N, H, W) pixel-to-mean x offsets
    dy: np.ndarray             # (N, H, W) pixel-to-mean y offsets
    buffers: dict[str, np.ndarray] | None = None


def _check_conditioning(arrays: SceneArrays) -> None:
    s = arrays.scales
    if s.size == 0:
        return
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise SingularCovariance("a primitive has degenerate scales")
    cond = (s.max(axis=1) / s.min(axis=1)) ** 2
    worst = int(np.argmax(cond))
    if cond[worst] > CONDITION_LIMIT:
        raise SingularCovariance(
            f"primitive {worst}: covariance condition {cond[worst]:.3g} exceeds {CONDITION_LIMIT:g}"
        )


@lru_cache(maxsize=8)
def pixel_grid(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Read-only pixel-center coordinates; centers sit at integer positions."""
    ys, xs = np.mgrid[0:height, 0:width]
    xs = xs.astype(np.float64)
    ys = ys.astype(np.float64)
    xs.setflags(write=False)
    ys.setflags(write=False)
    return xs, ys


def forward(scene: Scene2D, workspace: Workspace | None = None) -> RenderCache:
    """Composite the scene, retaining per-primitive maps for the backward pass."""
    arrays = SceneArrays.from_scene(scene)
    _check_conditioning(arrays)
    h, w = scene.height, scene.width
    n = len(scene.primitives)
    buffers = (workspace or Workspace()).for_shape(n, h, w)
    xs, ys = pixel_grid(w, h)

    dx = np.subtract(xs[None, :, :], arrays.means[:, 0, None, None], out=buffers["dx"])
    dy = np.subtract(ys[None, :, :], arrays.means[:, 1, None, None], out=buffers["dy"])
    m11, m12, m22 = arrays.inverse_covariances()
    two_m12 = 2.0 * m12
    # quad = (m11*dx)*dx + (2*m12)*(dx*dy) + (m22*dy)*dy, the same order a
    # scalar per-pixel evaluation uses.
    tmp = np.multiply(m11[:, None, None], dx, out=buffers["tmp"])
    quad = np.multiply(tmp, dx, out=buffers["quad"])
    tmp = np.multiply(dx, dy, out=buffers["tmp"])
    tmp = np.multiply(two_m12[:, None, None], tmp, out=tmp)
    quad += tmp
    tmp = np.multiply(m22[:, None, None], dy, out=buffers["tmp"])
    tmp = np.multiply(tmp, dy, out=tmp)
    quad += tmp

    quad = np.multiply(quad, -0.5, out=quad)
    gauss = np.exp(quad, out=buffers["gauss"])
    alpha = np.multiply(arrays.opacities[:, None, None], gauss, out=buffers["alpha"])

    # Exclusive cumulative product of (1 - alpha); np.cumprod multiplies
    # sequentially, matching the per-primitive recurrence bit for bit.
    trans_before = buffers["trans_before"]
    if n > 0:
        one_minus = np.subtract(1.0, alpha, out=buffers["quad"])
        np.cumprod(one_minus, axis=0, out=one_minus)
        trans_before[0] = 1.0
        trans_before[1:] = one_minus[:-1]
        trans_final = one_minus[-1].copy()
    else:
        trans_final = np.ones((h, w))
    weights = np.multiply(alpha, trans_before, out=buffers["weights"])

    # einsum accumulates over n in index order, matching sequential
    # front-to-back color accumulation exactly.
    image = np.einsum("nhw,nc->hwc", weights, arrays.colors)
    image += trans_final[:, :, None] * scene.background[None, None, :]
    return RenderCache(
        image=image,
        alpha=alpha,
        gauss=gauss,
        trans_before=trans_before,
        trans_final=trans_final,
        weights=weights,
        arrays=arrays,
        dx=dx,
        dy=dy,
        buffers=buffers,
    )


def render(scene: Scene2D, workspace: Workspace | None = None) -> np.ndarray:
    """Composite the scene to an (H, W, 3) image in [0, 1]."""
    return forward(scene, workspace).image
