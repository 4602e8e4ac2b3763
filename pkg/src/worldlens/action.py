"""Action-following scorers (A.1-A.4).

Sub-scores (NC, DAC, EP, TTC, comfort) arrive from an external simulation
harness log; this module only composes and aggregates them.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import errors

PDMS_WEIGHTS = {"ep": 5.0, "ttc": 5.0, "comfort": 2.0}


@dataclass
class EpisodeSubScores:
    nc: float
    dac: float
    ep: float
    ttc: float
    comfort: float
    d_completed: float
    d_total: float

    def validate(self):
        for name in ("nc", "dac", "ep", "ttc", "comfort"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise errors.OutOfRangeSubScore(f"{name}={v}")
        if self.d_total <= 0:
            raise errors.ZeroRoute(f"d_total={self.d_total}")
        if self.d_completed < 0:
            raise errors.OutOfRangeSubScore(f"d_completed={self.d_completed}")


def displacement_error(gen_trajectories, gt_trajectories):
    """Mean L2 distance between corresponding waypoints, averaged over videos."""
    if len(gen_trajectories) != len(gt_trajectories):
        raise errors.LengthMismatch("trajectory set sizes differ")
    if not gen_trajectories:
        raise errors.LengthMismatch("empty trajectory sets")
    per_video = []
    for gen, gt in zip(gen_trajectories, gt_trajectories):
        gen = np.asarray(gen, dtype=np.float64)
        gt = np.asarray(gt, dtype=np.float64)
        if gen.shape != gt.shape:
            raise errors.LengthMismatch(f"{gen.shape} vs {gt.shape}")
        per_video.append(float(np.mean(np.linalg.norm(gen - gt, axis=1))))
    return float(np.mean(per_video))


def pdms(s: EpisodeSubScores) -> float:
    """Penalty product (NC * DAC) times the weighted EP/TTC/comfort mean."""
    s.validate()
    weighted = (PDMS_WEIGHTS["ep"] * s.ep + PDMS_WEIGHTS["ttc"] * s.ttc
                + PDMS_WEIGHTS["comfort"] * s.comfort)
    return s.nc * s.dac * weighted / sum(PDMS_WEIGHTS.values())


def route_completion(s: EpisodeSubScores) -> float:
    if s.d_total <= 0:
        raise errors.ZeroRoute(f"d_total={s.d_total}")
    ratio = s.d_completed / s.d_total
    if ratio > 1.0:
        warnings.warn("d_completed exceeds d_total; clamping route completion to 1",
                      stacklevel=2)
        return 1.0
    return ratio


def ads(s: EpisodeSubScores) -> float:
    """Arena Driving Score: route completion times PDMS, per episode."""
    return route_completion(s) * pdms(s)


def aggregate_episodes(episodes):
    """Dataset means of per-episode PDMS, RC, and ADS (never recomposed from
    dataset-mean sub-scores)."""
    if not episodes:
        raise errors.LengthMismatch("no episodes")
    pdms_vals = [pdms(e) for e in episodes]
    rc_vals = [route_completion(e) for e in episodes]
    ads_vals = [ads(e) for e in episodes]
    return {
        "pdms": float(np.mean(pdms_vals)),
        "route_completion": float(np.mean(rc_vals)),
        "ads": float(np.mean(ads_vals)),
    }
