"""Synthetic codec-style degradation and image fidelity metrics.

Real encoders are out of scope, so compression damage is modeled as a
QP-driven Gaussian blur followed by uniform color quantization. Severity
is monotone in QP: sigma = (qp - 22) / 10 pixels and the palette shrinks
as 256 / 2^((qp - 22) / 8) levels; QP at or below 22 leaves the image
untouched.
"""

from __future__ import annotations

import math

import numpy as np


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflect padding."""
    if sigma <= 0:
        return img.copy()
    radius = max(1, int(math.ceil(3.0 * sigma)))
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel /= kernel.sum()

    out = img.astype(np.float64, copy=True)
    for axis in (0, 1):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (radius, radius)
        padded = np.pad(out, pad, mode="reflect")
        acc = np.zeros_like(out)
        length = out.shape[axis]
        for k, weight in enumerate(kernel):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(k, k + length)
            acc += weight * padded[tuple(sl)]
        out = acc
    return out


def quantize_levels(img: np.ndarray, levels: int) -> np.ndarray:
    """Snap colors in [0, 1] to a uniform palette of ``levels`` values."""
    levels = max(2, int(levels))
    return np.round(img * (levels - 1)) / (levels - 1)


def degrade_frame(img: np.ndarray, qp: float) -> np.ndarray:
    """Blur-plus-quantize proxy for encoding ``img`` at the given QP."""
    if not 0.0 <= qp <= 63.0:
        raise ValueError("qp must lie in [0, 63]")
    img = np.asarray(img, dtype=np.float64)
    if qp <= 22.0:
        return img.copy()
    sigma = (qp - 22.0) / 10.0
    levels = round(256.0 / 2.0 ** ((qp - 22.0) / 8.0))
    return quantize_levels(np.clip(gaussian_blur(img, sigma), 0.0, 1.0), levels)


def psnr(img: np.ndarray, reference: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    img = np.asarray(img, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if img.shape != reference.shape:
        raise ValueError(f"shape mismatch: {img.shape} vs {reference.shape}")
    mse = float(np.mean((img - reference) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * math.log10(peak * peak / mse)


def gradient_energy(img: np.ndarray) -> float:
    """Mean absolute forward-difference magnitude, a cheap texture measure."""
    img = np.asarray(img, dtype=np.float64)
    gx = np.abs(np.diff(img, axis=1)).sum()
    gy = np.abs(np.diff(img, axis=0)).sum()
    return float(gx + gy) / img.size
