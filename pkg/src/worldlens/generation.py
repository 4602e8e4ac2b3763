"""Generation-aspect scorers (dimensions G.1-G.8).

Every scorer is a dataset-level aggregate built from per-video values, with
the per-video breakdown preserved so reports can expose both levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors
from .numerics import (
    TEMPORAL_BETA,
    TEMPORAL_EPS,
    connected_components,
    cosine_similarity,
    binary_erode,
    frechet_distance,
    hungarian_assign,
    jsd,
    summarize_gaussian,
    temporal_profile,
)


@dataclass
class ConfidenceRecord:
    video_id: str
    frame_index: int
    track_id: int
    class_id: str
    confidence: float


@dataclass
class SemanticComponents:
    lfr: float
    sac: float
    cds: float

    @property
    def score(self):
        return 0.5 * self.lfr + 0.4 * self.sac + 0.1 * self.cds


@dataclass
class GenerationReport:
    scores: dict = field(default_factory=dict)
    substats: dict = field(default_factory=dict)
    per_video: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


# --------------------------------------------------------------------------
# G.1 subject fidelity
# --------------------------------------------------------------------------

def subject_fidelity(records, classes):
    """Nested mean of per-instance realism confidences.

    Instance -> frame -> class -> video.  Frames with no instances of a class
    are excluded from that class's frame mean; classes absent from a video are
    excluded from that video's class mean.  Returns (per_class, class_mean_total,
    instance_weighted_total, per_video).
    """
    if not records:
        raise errors.EmptyInput("no confidence records")
    classes = list(classes)
    known = set(classes)
    for r in records:
        if r.class_id not in known:
            raise errors.InvariantViolation(f"class {r.class_id!r} not in table")
        if not 0.0 <= r.confidence <= 1.0:
            raise errors.InvariantViolation(f"confidence {r.confidence} out of range")

    by_video = {}
    for r in records:
        by_video.setdefault(r.video_id, {}).setdefault(r.class_id, {}).setdefault(
            r.frame_index, []).append(r.confidence)

    per_video = {}
    video_class = {}  # video -> class -> frame-mean aggregate
    for vid in sorted(by_video):
        class_scores = {}
        for cls in classes:
            frames = by_video[vid].get(cls)
            if not frames:
                continue
            frame_means = [float(np.mean(v)) for _, v in sorted(frames.items())]
            class_scores[cls] = float(np.mean(frame_means))
        video_class[vid] = class_scores
        per_video[vid] = float(np.mean(list(class_scores.values())))

    per_class = {}
    for cls in classes:
        vals = [video_class[v][cls] for v in sorted(video_class) if cls in video_class[v]]
        if vals:
            per_class[cls] = float(np.mean(vals))

    total = float(np.mean([per_video[v] for v in sorted(per_video)]))
    weighted = float(np.mean([r.confidence for r in records]))
    return per_class, total, weighted, per_video


# --------------------------------------------------------------------------
# G.2 subject coherence
# --------------------------------------------------------------------------

def subject_coherence(videos):
    """Mean consecutive-frame cosine over object tracks.

    ``videos`` maps video_id -> {track_id: T_r x D array}.  Tracks with fewer
    than 2 frames are excluded; videos with no usable track are skipped.
    """
    per_video = {}
    for vid in sorted(videos):
        track_scores = []
        for tid in sorted(videos[vid]):
            emb = np.asarray(videos[vid][tid], dtype=np.float64)
            if emb.shape[0] < 2:
                continue
            sims = [cosine_similarity(emb[i], emb[i + 1])
                    for i in range(emb.shape[0] - 1)]
            track_scores.append(float(np.mean(sims)))
        if track_scores:
            per_video[vid] = float(np.mean(track_scores))
    if not per_video:
        raise errors.NoUsableTracks("no track with >= 2 frames")
    total = float(np.mean([per_video[v] for v in sorted(per_video)]))
    return total, per_video


# --------------------------------------------------------------------------
# G.3 / G.5 temporal composition
# --------------------------------------------------------------------------

def consistency_score(gen, ref, beta=TEMPORAL_BETA, eps=TEMPORAL_EPS):
    """Per-video ACM/(1+TJI) * sqrt(MRS) composition."""
    prof = temporal_profile(gen, ref, beta=beta, eps=eps)
    return prof.acm / (1.0 + prof.tji) * prof.mrs ** 0.5, prof


def subject_consistency(pairs):
    """Dataset mean of the composed score; ``pairs`` maps id -> (gen, ref)."""
    per_video = {}
    profiles = {}
    for vid in sorted(pairs):
        gen, ref = pairs[vid]
        score, prof = consistency_score(gen, ref)
        per_video[vid] = score
        profiles[vid] = prof
    total = float(np.mean([per_video[v] for v in sorted(per_video)]))
    return total, per_video, profiles


temporal_consistency = subject_consistency  # same contract, CLIP-space inputs


# --------------------------------------------------------------------------
# G.4 depth discrepancy
# --------------------------------------------------------------------------

def depth_discrepancy(videos):
    """Mean consecutive L2 distance of depth-colormap embeddings (not renormalized)."""
    per_video = {}
    for vid in sorted(videos):
        emb = np.asarray(videos[vid], dtype=np.float64)
        if emb.shape[0] < 2:
            raise errors.TooShort(f"video {vid!r} has fewer than 2 frames")
        dists = np.linalg.norm(np.diff(emb, axis=0), axis=1)
        per_video[vid] = float(np.mean(dists))
    total = float(np.mean([per_video[v] for v in sorted(per_video)]))
    return total, per_video


# --------------------------------------------------------------------------
# G.6 semantic consistency
# --------------------------------------------------------------------------

def _region_iou(a, b):
    sa, sb = set(a), set(b)
    inter = len(sa & sb)
    union = len(sa | sb)
    return inter / union if union else 0.0


def semantic_consistency_video(masks, class_count, erosion_radius=1) -> SemanticComponents:
    """LFR / SAC / CDS components for one video's T x H x W label masks."""
    masks = np.asarray(masks)
    t = masks.shape[0]
    if t < 2:
        raise errors.SingleFrame("semantic consistency needs >= 2 frames")

    # LFR: flip fraction over eroded class interiors, skipping transitions
    # whose eroded interiors are all empty
    flip_ratios = []
    for i in range(t - 1):
        flips = 0
        total = 0
        for c in range(class_count):
            interior = binary_erode(masks[i] == c, erosion_radius)
            idx = interior != 0
            total += int(idx.sum())
            flips += int(np.count_nonzero(masks[i + 1][idx] != c))
        if total > 0:
            flip_ratios.append(flips / total)
    lfr = 1.0 - float(np.mean(flip_ratios)) if flip_ratios else 1.0

    # SAC: Hungarian-matched, pixel-weighted region IoU persistence
    sac_terms = []
    for i in range(t - 1):
        num = 0.0
        den = 0.0
        for c in range(class_count):
            regions_a = connected_components(masks[i], c)
            regions_b = connected_components(masks[i + 1], c)
            den += float(sum(len(r) for r in regions_a))
            if not regions_a or not regions_b:
                continue
            cost = np.array([[1.0 - _region_iou(ra, rb) for rb in regions_b]
                             for ra in regions_a])
            assign = hungarian_assign(cost)
            for r, cc in assign.pairs:
                num += len(regions_a[r]) * _region_iou(regions_a[r], regions_b[cc])
        if den > 0:
            sac_terms.append(num / den)
    if not sac_terms:
        raise errors.EmptyMasks("all frames empty")
    sac = float(np.mean(sac_terms))

    # CDS: 1 - mean JSD of consecutive class histograms
    hists = [np.bincount(masks[i].ravel().astype(np.int64), minlength=class_count)
             for i in range(t)]
    divs = [jsd(hists[i], hists[i + 1]) for i in range(t - 1)]
    cds = 1.0 - float(np.mean(divs))

    return SemanticComponents(lfr=lfr, sac=sac, cds=cds)


def semantic_consistency(videos, class_count, erosion_radius=1):
    """Dataset-level per-video means of (score, LFR, SAC, CDS)."""
    per_video = {}
    for vid in sorted(videos):
        per_video[vid] = semantic_consistency_video(videos[vid], class_count,
                                                    erosion_radius)
    order = sorted(per_video)
    lfr = float(np.mean([per_video[v].lfr for v in order]))
    sac = float(np.mean([per_video[v].sac for v in order]))
    cds = float(np.mean([per_video[v].cds for v in order]))
    score = float(np.mean([per_video[v].score for v in order]))
    return score, SemanticComponents(lfr=lfr, sac=sac, cds=cds), per_video


# --------------------------------------------------------------------------
# G.7 perceptual discrepancy (FVD)
# --------------------------------------------------------------------------

def perceptual_discrepancy(real_feats, gen_feats):
    """Frechet distance between Gaussian summaries of the two feature sets.

    Returns (fvd, singular_warning) where the warning flags N < D+1 on
    either side (singular covariance regime).
    """
    real = np.asarray(real_feats, dtype=np.float64)
    gen = np.asarray(gen_feats, dtype=np.float64)
    if real.shape[0] < 2 or gen.shape[0] < 2:
        raise errors.TooFewSamples("need >= 2 feature rows on each side")
    warn = real.shape[0] < real.shape[1] + 1 or gen.shape[0] < gen.shape[1] + 1
    fvd = frechet_distance(summarize_gaussian(real), summarize_gaussian(gen))
    return fvd, warn


# --------------------------------------------------------------------------
# G.8 cross-view consistency
# --------------------------------------------------------------------------

def cross_view_consistency(match_set, pairs, frames_per_video, video_ids):
    """Sum of all match confidences over N_g * |P| * T.

    ``frames_per_video`` is the shared clip length T; absent (video, pair,
    frame) cells contribute 0 to the numerator.
    """
    declared = {tuple(p) for p in pairs}
    declared |= {(b, a) for a, b in declared}
    known_videos = set(video_ids)
    total_conf = 0.0
    for rec in match_set.records:
        if tuple(rec.camera_pair) not in declared:
            raise errors.UnknownPair(str(rec.camera_pair))
        if rec.video_id not in known_videos:
            raise errors.DanglingReference(f"match for unknown video {rec.video_id!r}")
        total_conf += float(sum(rec.confidences))
    denom = len(video_ids) * len(pairs) * frames_per_video
    if denom == 0:
        raise errors.EmptyInput("empty video/pair/frame set")
    return total_conf / denom
