"""Clip decoding: a clip is a .npy array of shape T x H x W x 3, uint8."""
from pathlib import Path

import numpy as np

from .errors import DecodeFailure


def load_clip(path):
    path = Path(path)
    if not path.exists():
        raise DecodeFailure(f"no such clip: {path}")
    try:
        frames = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise DecodeFailure(f"{path}: {exc}") from exc
    if frames.ndim != 4 or frames.shape[3] != 3 or frames.dtype != np.uint8:
        raise DecodeFailure(f"{path}: expected T x H x W x 3 uint8, "
                            f"got {frames.shape} {frames.dtype}")
    if frames.shape[0] < 1:
        raise DecodeFailure(f"{path}: empty clip")
    return frames


def resize(frame, height, width):
    """Nearest-neighbor resize; deterministic and dependency-free."""
    h, w = frame.shape[:2]
    rows = (np.arange(height) * h // height).clip(0, h - 1)
    cols = (np.arange(width) * w // width).clip(0, w - 1)
    return frame[rows][:, cols]
