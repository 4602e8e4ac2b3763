"""Reconstruction-aspect scorers (R.1-R.4).

Aggregates photometric fidelity, masked depth errors, and novel-view
quality/discrepancy over renders produced upstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors
from .generation import perceptual_discrepancy
from .numerics import psnr, ssim

TRAJECTORY_CONDITIONS = (
    "front_center_interp",
    "s_curve",
    "lateral_offset_left",
    "lateral_offset_right",
)


@dataclass
class DepthErrorReport:
    abs_rel: float
    rmse: float
    delta1: float
    delta2: float
    delta3: float


def _to_gray(img):
    if img.ndim == 3:
        return img.mean(axis=2)
    return img


def photometric_report(pairs, lpips=None):
    """PSNR/SSIM means over (rendered, reference) frame pairs.

    ``pairs`` is a sequence of (H x W x 3 float32 in [0,1], same) tuples;
    ``lpips`` an optional sequence of adapter-supplied per-frame scalars.
    Returns (psnr_mean, ssim_mean, lpips_mean_or_None).
    """
    if not pairs:
        raise errors.ShapeMismatch("need at least one render pair")
    psnrs = []
    ssims = []
    for rendered, reference in pairs:
        rendered = np.asarray(rendered, dtype=np.float64)
        reference = np.asarray(reference, dtype=np.float64)
        if rendered.shape != reference.shape:
            raise errors.ShapeMismatch(f"{rendered.shape} vs {reference.shape}")
        psnrs.append(psnr(rendered, reference, peak=1.0))
        ssims.append(ssim(_to_gray(rendered), _to_gray(reference)))
    lpips_mean = None
    if lpips is not None and len(lpips) > 0:
        for v in lpips:
            if not 0.0 <= v <= 2.0:
                raise errors.InvariantViolation(f"LPIPS {v} out of [0, 2]")
        lpips_mean = float(np.mean(lpips))
    return float(np.mean(psnrs)), float(np.mean(ssims)), lpips_mean


def geometric_report(pred, gt, masks) -> DepthErrorReport:
    """Masked depth error statistics between rendered and reference depth.

    AbsRel and RMSE are per-frame means over masked pixels, averaged over
    frames; delta_k is the masked-pixel fraction with max-ratio < 1.25^k.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    masks = np.asarray(masks)
    if pred.shape != gt.shape or pred.shape != masks.shape:
        raise errors.ShapeMismatch("depth/mask shapes differ")

    abs_rels, rmses, d1s, d2s, d3s = [], [], [], [], []
    for i in range(pred.shape[0]):
        sel = masks[i] != 0
        if not sel.any():
            raise errors.EmptyMask(f"frame {i} has an empty mask")
        p = pred[i][sel]
        g = gt[i][sel]
        if np.any(g <= 0):
            raise errors.NonPositiveGtDepth(f"frame {i}")
        abs_rels.append(float(np.mean(np.abs(p - g) / g)))
        rmses.append(float(np.sqrt(np.mean((p - g) ** 2))))
        with np.errstate(divide="ignore"):
            ratio = np.maximum(p / g, np.divide(g, p, out=np.full_like(g, np.inf),
                                                where=p > 0))
        d1s.append(float(np.mean(ratio < 1.25)))
        d2s.append(float(np.mean(ratio < 1.25 ** 2)))
        d3s.append(float(np.mean(ratio < 1.25 ** 3)))

    return DepthErrorReport(
        abs_rel=float(np.mean(abs_rels)),
        rmse=float(np.mean(rmses)),
        delta1=float(np.mean(d1s)),
        delta2=float(np.mean(d2s)),
        delta3=float(np.mean(d3s)),
    )


def _check_conditions(per_condition):
    for name in per_condition:
        if name not in TRAJECTORY_CONDITIONS:
            raise errors.UnknownTrajectoryName(name)
    for name in TRAJECTORY_CONDITIONS:
        if name not in per_condition:
            raise errors.UnknownTrajectoryName(f"missing condition {name!r}")


def novel_view_quality(scores_by_condition):
    """Per-condition means of frame quality scores plus their equal-weight average.

    ``scores_by_condition`` maps each of the four trajectory names to a flat
    sequence of per-frame scores in [0, 100].
    """
    _check_conditions(scores_by_condition)
    means = {}
    for name in TRAJECTORY_CONDITIONS:
        vals = list(scores_by_condition[name])
        if not vals:
            raise errors.EmptyCondition(name)
        for v in vals:
            if not 0.0 <= v <= 100.0:
                raise errors.InvariantViolation(f"quality score {v} out of [0, 100]")
        means[name] = float(np.mean(vals))
    average = float(np.mean([means[n] for n in TRAJECTORY_CONDITIONS]))
    return means, average


def novel_view_discrepancy(features_by_condition):
    """Per-condition FVD plus equal-weight average.

    ``features_by_condition`` maps each trajectory name to (real N x D, gen M x D).
    """
    _check_conditions(features_by_condition)
    fvds = {}
    warned = False
    for name in TRAJECTORY_CONDITIONS:
        real, gen = features_by_condition[name]
        fvd, warn = perceptual_discrepancy(real, gen)
        fvds[name] = fvd
        warned = warned or warn
    average = float(np.mean([fvds[n] for n in TRAJECTORY_CONDITIONS]))
    return fvds, average, warned
