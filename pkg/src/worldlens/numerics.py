"""Numerical kernels shared by every metric.

Similarities, divergences, optimal assignment, symmetric matrix functions,
morphology, image-quality kernels, and temporal embedding statistics.
All operations are pure and reentrant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import errors
from ._kernels import erode as _erode
from ._kernels import label_components

TEMPORAL_EPS = 1e-8
TEMPORAL_BETA = 0.5

PSNR_CAP_DB = 100.0


@dataclass
class Assignment:
    pairs: list          # [(row, col), ...] sorted
    total_cost: float


@dataclass
class GaussianSummary:
    mean: np.ndarray
    cov: np.ndarray
    sample_count: int


@dataclass
class TemporalProfile:
    acm: float
    tji: float
    mrs: float


# --------------------------------------------------------------------------
# vector and distribution kernels
# --------------------------------------------------------------------------

def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise errors.ZeroVector("cosine similarity of a zero vector")
    v = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, v))


def temporal_profile(gen, ref, beta=TEMPORAL_BETA, eps=TEMPORAL_EPS) -> TemporalProfile:
    """ACM / TJI / MRS statistics of an embedding sequence against a reference.

    ACM is the mean cosine of consecutive rows of ``gen``; TJI the normalized
    second-difference magnitude (0 when fewer than 3 frames); MRS the
    exponential penalty on log motion-rate ratios between ``gen`` and ``ref``.
    """
    gen = np.asarray(gen, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if gen.shape[0] != ref.shape[0]:
        raise errors.LengthMismatch(f"{gen.shape[0]} vs {ref.shape[0]} frames")
    t = gen.shape[0]
    if t < 2:
        raise errors.TooShort("need at least 2 frames")

    acm = float(np.mean([cosine_similarity(gen[i], gen[i + 1]) for i in range(t - 1)]))

    if t < 3:
        tji = 0.0
    else:
        terms = []
        for i in range(1, t - 1):
            second = np.linalg.norm(gen[i + 1] - 2.0 * gen[i] + gen[i - 1])
            d_fwd = np.linalg.norm(gen[i + 1] - gen[i])
            d_bwd = np.linalg.norm(gen[i] - gen[i - 1])
            terms.append(second / (0.5 * (d_fwd + d_bwd) + eps))
        tji = float(np.mean(terms))

    ratios = []
    for i in range(t - 1):
        dg = np.linalg.norm(gen[i + 1] - gen[i])
        df = np.linalg.norm(ref[i + 1] - ref[i])
        ratios.append(abs(math.log((dg + eps) / (df + eps))))
    mrs = float(math.exp(-beta * np.mean(ratios)))

    return TemporalProfile(acm=acm, tji=tji, mrs=mrs)


def summarize_gaussian(features) -> GaussianSummary:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise errors.TooFewSamples("need at least 2 feature rows")
    mean = features.mean(axis=0)
    centered = features - mean
    cov = centered.T @ centered / (features.shape[0] - 1)
    cov = 0.5 * (cov + cov.T)
    return GaussianSummary(mean=mean, cov=cov, sample_count=features.shape[0])


def psd_matrix_sqrt(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise errors.NotSymmetric("matrix must be square")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > 1e-6 * scale:
        raise errors.NotSymmetric("asymmetry beyond tolerance")
    sym = 0.5 * (m + m.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -1e-8 * max(1.0, float(np.abs(vals).max())):
        raise errors.IndefiniteMatrix(f"eigenvalue {vals.min()}")
    vals = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T)


def frechet_distance(x: GaussianSummary, y: GaussianSummary) -> float:
    if x.mean.shape != y.mean.shape:
        raise errors.DimMismatch(f"{x.mean.shape} vs {y.mean.shape}")
    diff = x.mean - y.mean
    sx = psd_matrix_sqrt(x.cov)
    inner = psd_matrix_sqrt(sx @ y.cov @ sx)
    value = float(diff @ diff + np.trace(x.cov) + np.trace(y.cov) - 2.0 * np.trace(inner))
    return max(0.0, value)


def jsd(p, q) -> float:
    """Jensen-Shannon divergence, base-2 logarithm, in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if np.any(p < 0) or np.any(q < 0):
        raise errors.NegativeMass("histogram entries must be nonnegative")
    sp, sq = p.sum(), q.sum()
    if sp == 0.0 or sq == 0.0:
        raise errors.ZeroMass("histogram has zero total mass")
    p = p / sp
    q = q / sq
    m = 0.5 * (p + q)

    def _kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))

    v = 0.5 * _kl(p, m) + 0.5 * _kl(q, m)
    return min(1.0, max(0.0, v))


# --------------------------------------------------------------------------
# assignment
# --------------------------------------------------------------------------

def _lap_cost(cost):
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def hungarian_assign(cost) -> Assignment:
    """Minimum-cost one-to-one assignment of size min(n, m).

    Among all optimal assignments, returns the lexicographically smallest
    sorted pair list (deterministic reports regardless of solver internals).
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise errors.EmptyMatrix("cost matrix must be non-empty 2-D")
    if not np.isfinite(cost).all():
        raise errors.NonFiniteCost("cost matrix must be finite")

    n, m = cost.shape
    k = min(n, m)
    optimal = _lap_cost(cost)
    tol = 1e-9 * (1.0 + abs(optimal))

    pairs = []
    rows_left = list(range(n))
    cols_left = list(range(m))
    fixed = 0.0
    for _ in range(k):
        done = False
        for ri, r in enumerate(rows_left):
            for ci, c in enumerate(cols_left):
                rest_rows = rows_left[:ri] + rows_left[ri + 1:]
                rest_cols = cols_left[:ci] + cols_left[ci + 1:]
                # fixing (r, c) must still be completable at optimal cost;
                # if rows remain unmatched the remaining block may drop rows
                if min(len(rest_rows), len(rest_cols)) > 0:
                    sub = cost[np.ix_(rest_rows, rest_cols)]
                    rest = _lap_cost(sub)
                else:
                    rest = 0.0
                if fixed + cost[r, c] + rest <= optimal + tol:
                    pairs.append((r, c))
                    fixed += cost[r, c]
                    rows_left = rest_rows
                    cols_left = rest_cols
                    done = True
                    break
            if done:
                break
        if not done:  # pragma: no cover - optimal always completable
            raise errors.WorldLensError("assignment refinement failed")

    pairs.sort()
    return Assignment(pairs=pairs, total_cost=float(sum(cost[r, c] for r, c in pairs)))


# --------------------------------------------------------------------------
# morphology and labeling
# --------------------------------------------------------------------------

def binary_erode(mask, radius: int):
    """Erosion by the Chebyshev ball of the given radius.

    A pixel stays set iff every pixel within the (2r+1)^2 square neighborhood
    is set; pixels outside the image count as unset.  Radius 0 is identity.
    """
    if radius < 0:
        raise errors.InvariantViolation("radius must be >= 0")
    mask = np.asarray(mask)
    return _erode((mask != 0).astype(np.uint8), int(radius))


def connected_components(mask, class_id: int):
    """4-connected regions of ``mask == class_id`` as lists of (row, col).

    Regions are sorted by (min row, min col) and pixels within a region by
    (row, col) for deterministic downstream matching.
    """
    binary = (np.asarray(mask) == class_id).astype(np.uint8)
    labels, count = label_components(binary)
    regions = []
    for lab in range(1, count + 1):
        rows, cols = np.nonzero(labels == lab)
        order = np.lexsort((cols, rows))
        regions.append(list(zip(rows[order].tolist(), cols[order].tolist())))
    regions.sort(key=lambda px: px[0])
    return regions


# --------------------------------------------------------------------------
# image quality
# --------------------------------------------------------------------------

def psnr(a, b, peak: float = 1.0) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise errors.ShapeMismatch(f"{a.shape} vs {b.shape}")
    if peak <= 0:
        raise errors.InvariantViolation("peak must be positive")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(peak * peak / mse))


def _gaussian_window(size=11, sigma=1.5):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


_SSIM_WINDOW = _gaussian_window()


def _window_means(img, kernel):
    from numpy.lib.stride_tricks import sliding_window_view

    win = sliding_window_view(img, kernel.shape)
    return np.einsum("ijkl,kl->ij", win, kernel)


def ssim(a, b) -> float:
    """Mean local SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03, L=1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise errors.ShapeMismatch(f"{a.shape} vs {b.shape}")
    if a.ndim != 2 or min(a.shape) < 11:
        raise errors.TooSmall("SSIM needs a 2-D image at least 11x11")

    c1 = 0.01 ** 2
    c2 = 0.03 ** 2
    k = _SSIM_WINDOW
    mu_a = _window_means(a, k)
    mu_b = _window_means(b, k)
    var_a = _window_means(a * a, k) - mu_a ** 2
    var_b = _window_means(b * b, k) - mu_b ** 2
    cov = _window_means(a * b, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    value = float(np.mean(num / den))
    return min(1.0, max(-1.0, value))
