"""PNG and NPY image round-tripping for fixtures and snapshots."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def to_uint8(img: np.ndarray) -> np.ndarray:
    return (np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_png(path: str | Path, img: np.ndarray) -> None:
    Image.fromarray(to_uint8(img), mode="RGB").save(path, format="PNG")


def load_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def save_npy(path: str | Path, img: np.ndarray) -> None:
    np.save(path, np.asarray(img, dtype=np.float64))


def load_npy(path: str | Path) -> np.ndarray:
    return np.load(path)
