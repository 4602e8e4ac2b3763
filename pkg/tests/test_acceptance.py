"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line at its stated tolerance and runtime budget.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines inline.
"""
import contextlib
import itertools
import json
import math
import time

import numpy as np
import pytest

from worldlens.action import EpisodeSubScores, ads, pdms, route_completion
from worldlens.downstream import DetectionSummary, TrackingFrame, TrackingLog, amota, nds, ray_iou
from worldlens.engine import RunConfig, run_evaluation
from worldlens.generation import consistency_score, semantic_consistency_video
from worldlens.interchange import TensorFile, read_tensor, write_tensor
from worldlens.numerics import (
    GaussianSummary,
    frechet_distance,
    hungarian_assign,
    summarize_gaussian,
    temporal_profile,
)
from worldlens.preference import ScoreRecord, dimension_stats, export_sft, serialize_sft
from worldlens.reconstruction import novel_view_discrepancy, novel_view_quality
from worldlens.report import canonical_json

from test_downstream import _random_instance, oracle_ray_iou
from test_generation import _random_mask_triple, _oracle_regions, oracle_semantic
from test_interchange import _random_tensor
from test_numerics import brute_force_assignment, oracle_frechet, random_spd
from test_preference import _oracle_quantile


@contextlib.contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def test_c01_nds_table_rows():
    with criterion("NDS composition reproduces both reference rows "
                   "(+/-0.0005, < 1 ms)"):
        row1 = DetectionSummary(0.3657, 0.7356, 0.2919, 0.4400, 0.6821, 0.2072)
        row2 = DetectionSummary(0.2242, 0.9256, 0.3214, 0.5252, 0.7897, 0.2374)
        nds(row1)  # warm validation path before timing
        t0 = time.perf_counter()
        a = nds(row1)
        b = nds(row2)
        elapsed = time.perf_counter() - t0
        assert abs(a - 0.4472) <= 0.0005
        assert abs(b - 0.3322) <= 0.0005
        assert elapsed < 0.001


def test_c02_novel_view_averages():
    with criterion("Novel-view quality 39.82 and discrepancy 427.30 "
                   "reference averages (+/-0.01)"):
        quality = {
            "front_center_interp": [39.31],
            "s_curve": [39.67],
            "lateral_offset_left": [40.28],
            "lateral_offset_right": [40.02],
        }
        _, average = novel_view_quality(quality)
        assert abs(average - 39.82) <= 0.01

        targets = {
            "front_center_interp": 448.62,
            "s_curve": 281.91,
            "lateral_offset_left": 492.97,
            "lateral_offset_right": 485.70,
        }
        # synthesize per-condition 1-D feature pools whose Frechet distance
        # equals the published value: shift means by sqrt(target)
        feats = {}
        base = np.linspace(-1.0, 1.0, 9)[:, None].astype(np.float64)
        for name, value in targets.items():
            feats[name] = (base, base + math.sqrt(value))
        fvds, average, _ = novel_view_discrepancy(feats)
        for name, value in targets.items():
            assert abs(fvds[name] - value) <= 0.01
        assert abs(average - 427.30) <= 0.01


def test_c03_frechet_identity_analytic_and_oracle():
    with criterion("Frechet distance: identity 0 (1e-9), 1-D analytic cases "
                   "(1e-9), 100 random 5-D pairs vs Newton oracle (1e-5, < 5 s)"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(101)
        g = summarize_gaussian(rng.normal(size=(30, 5)))
        assert abs(frechet_distance(g, g)) <= 1e-9

        shifted = frechet_distance(GaussianSummary(np.array([0.0]), np.array([[1.0]]), 2),
                                   GaussianSummary(np.array([1.0]), np.array([[1.0]]), 2))
        scaled = frechet_distance(GaussianSummary(np.array([0.0]), np.array([[4.0]]), 2),
                                  GaussianSummary(np.array([0.0]), np.array([[1.0]]), 2))
        assert abs(shifted - 1.0) <= 1e-9
        assert abs(scaled - 1.0) <= 1e-9

        for _ in range(100):
            mu_x, mu_y = rng.normal(size=5), rng.normal(size=5)
            cov_x, cov_y = random_spd(rng, 5), random_spd(rng, 5)
            got = frechet_distance(GaussianSummary(mu_x, cov_x, 10),
                                   GaussianSummary(mu_y, cov_y, 10))
            assert abs(got - oracle_frechet(mu_x, cov_x, mu_y, cov_y)) <= 1e-5
        assert time.perf_counter() - t0 < 5.0


def test_c04_hungarian_vs_brute_force():
    with criterion("Hungarian assignment equals exhaustive permutation search "
                   "on 500 random matrices, n,m <= 7 (exact, < 10 s)"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(103)
        for _ in range(500):
            n, m = int(rng.integers(1, 8)), int(rng.integers(1, 8))
            cost = np.round(rng.uniform(0, 4, size=(n, m)) * 4) / 4
            got = hungarian_assign(cost)
            want_pairs, want_cost = brute_force_assignment(cost)
            assert abs(got.total_cost - want_cost) <= 1e-9
            assert got.pairs == want_pairs
        assert time.perf_counter() - t0 < 10.0


def test_c05_ray_iou_vs_brute_force():
    with criterion("RayIoU equals the brute-force ray-march oracle on 50 "
                   "random 8^3 grid pairs x 64 rays (exact) with "
                   "RayIoU@1 <= @2 <= @4 on every instance"):
        rng = np.random.default_rng(107)
        for _ in range(50):
            grid_p, grid_g, rays = _random_instance(rng)
            result = ray_iou(grid_p, grid_g, rays)
            want = oracle_ray_iou(grid_p.labels, grid_g.labels, rays, 1.0,
                                  (1.0, 2.0, 4.0))
            for delta in (1.0, 2.0, 4.0):
                assert result.per_delta[delta] == want[delta]
            assert (result.per_delta[1.0] <= result.per_delta[2.0]
                    <= result.per_delta[4.0])


def test_c06_semantic_components_vs_oracle():
    with criterion("Semantic consistency (LFR, SAC, CDS) matches the "
                   "exhaustive oracle on 100 random mask triples (1e-6); "
                   "static masks score exactly (1, 1, 1) and total 1.0"):
        rng = np.random.default_rng(109)
        checked = 0
        while checked < 100:
            masks = _random_mask_triple(rng)
            if any(len(_oracle_regions(masks[f], c)) > 6
                   for f in range(3) for c in range(3)):
                continue
            comps = semantic_consistency_video(masks, 3, erosion_radius=1)
            lfr, sac, cds = oracle_semantic(masks, 3, 1)
            assert abs(comps.lfr - lfr) <= 1e-6
            assert abs(comps.sac - sac) <= 1e-6
            assert abs(comps.cds - cds) <= 1e-6
            checked += 1

        frame = np.zeros((8, 8), dtype=np.uint16)
        frame[2:6, 2:6] = 1
        static = semantic_consistency_video(np.stack([frame] * 3), 2)
        assert (static.lfr, static.sac, static.cds) == (1.0, 1.0, 1.0)
        assert static.score == 1.0


def test_c07_temporal_statistics():
    with criterion("Temporal stats: MRS(x,x) == 1 exactly on 100 sequences, "
                   "constant-step TJI <= 1e-3, 4-frame toy matches hand "
                   "arithmetic (1e-6)"):
        rng = np.random.default_rng(113)
        for _ in range(100):
            x = rng.normal(size=(int(rng.integers(2, 10)), 6))
            assert temporal_profile(x, x).mrs == 1.0

        base = np.array([1.0, 0.0, 0.0])
        step = np.array([0.0, 0.02, 0.0])
        seq = np.stack([base + i * step for i in range(10)])
        assert temporal_profile(seq, seq).tji <= 1e-3

        gen = np.array([[1.0, 0.0], [0.8, 0.6], [0.0, 1.0], [-0.6, 0.8]])
        ref = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.5, 0.0]])
        eps = 1e-8
        acm = (0.8 + 0.6 + 0.8) / 3.0
        tji = math.sqrt(0.4) / (0.5 * (math.sqrt(0.8) + math.sqrt(0.4)) + eps)
        steps = [math.sqrt(0.4), math.sqrt(0.8), math.sqrt(0.4)]
        mrs = math.exp(-0.5 * sum(abs(math.log((s + eps) / (0.5 + eps)))
                                  for s in steps) / 3.0)
        want = acm / (1.0 + tji) * math.sqrt(mrs)
        score, _ = consistency_score(gen, ref)
        assert abs(score - want) <= 1e-6


def test_c08_pdms_and_ads():
    with criterion("PDMS: all-ones 1, NC=0 0, worked example 0.74250 "
                   "(1e-5); ADS == RC * PDMS on 1,000 random episodes (1e-9)"):
        ones = EpisodeSubScores(1, 1, 1, 1, 1, 100.0, 100.0)
        assert pdms(ones) == 1.0
        zero_nc = EpisodeSubScores(0, 1, 1, 1, 1, 100.0, 100.0)
        assert pdms(zero_nc) == 0.0
        worked = EpisodeSubScores(0.9, 1.0, 0.8, 0.9, 0.7, 100.0, 100.0)
        assert abs(pdms(worked) - 0.74250) <= 1e-5

        rng = np.random.default_rng(127)
        for _ in range(1000):
            s = EpisodeSubScores(rng.uniform(), rng.uniform(), rng.uniform(),
                                 rng.uniform(), rng.uniform(),
                                 rng.uniform(0, 100), 100.0)
            assert abs(ads(s) - route_completion(s) * pdms(s)) <= 1e-9


def test_c09_amota():
    with criterion("AMOTA matches the hand-computed sweep on the 2-track toy "
                   "(exact); an extra false positive never increases AMOTA "
                   "over 200 perturbations"):
        frames = []
        for f in range(6):
            gt = [("g1", float(f), 0.0), ("g2", float(f), 5.0)]
            pred = [("t1", float(f), 0.0, 0.9)]
            if f < 5:
                pred.append(("t2", float(f), 5.0, 0.8))
            if f == 2:
                pred.append(("t9", 50.0, 50.0, 0.85))
            frames.append(TrackingFrame(gt=gt, pred=pred))
        result = amota(TrackingLog(frames=frames))
        r = 11.0 / 12.0
        motar_low = 1.0 - (0 + 1 + 1 - (1.0 - r) * 12.0) / (r * 12.0)
        hand = [1.0] * 20 + [motar_low] * 16
        got = [m for _, m in result.motar_per_threshold if m is not None]
        assert got == hand
        assert result.amota == np.mean(hand)

        rng = np.random.default_rng(131)
        for _ in range(200):
            base_frames = []
            for f in range(5):
                gt = [(f"g{t}", float(t * 10), float(f)) for t in range(3)]
                pred = [(f"t{t}", t * 10 + rng.normal(0, 0.3),
                         f + rng.normal(0, 0.3), float(rng.uniform(0.3, 1.0)))
                        for t in range(3) if rng.random() < 0.8]
                base_frames.append(TrackingFrame(gt=gt, pred=list(pred)))
            before = amota(TrackingLog(frames=base_frames)).amota
            fi = int(rng.integers(0, 5))
            base_frames[fi].pred.append(
                ("fp", 1000.0, 1000.0, float(rng.uniform(0.3, 1.0))))
            after = amota(TrackingLog(frames=base_frames)).amota
            assert after <= before + 1e-12


def test_c10_worker_determinism(synthetic_manifest):
    with criterion("run_evaluation is byte-identical with 1 and 8 workers on "
                   "the 20-video synthetic manifest (< 30 s)"):
        t0 = time.perf_counter()
        one = run_evaluation(RunConfig(manifest_path=str(synthetic_manifest),
                                       workers=1))
        eight = run_evaluation(RunConfig(manifest_path=str(synthetic_manifest),
                                         workers=8))
        assert canonical_json(one).encode() == canonical_json(eight).encode()
        assert time.perf_counter() - t0 < 30.0


def test_c11_tensor_round_trip(tmp_path):
    with criterion("1,000 random tensors across all dtypes survive "
                   "write -> read bit-exactly"):
        rng = np.random.default_rng(137)
        path = tmp_path / "t.wlt"
        for _ in range(1000):
            t = _random_tensor(rng)
            write_tensor(t, path)
            back = read_tensor(path)
            assert back.dtype == t.dtype
            assert back.shape == t.shape
            assert back.data.tobytes() == t.data.tobytes()


def test_c12_preference_stats_and_sft():
    with criterion("DimensionStats matches the sort-based oracle on 50 random "
                   "record sets (1e-9); every SFT line reparses with exactly "
                   "the keys score and reason"):
        rng = np.random.default_rng(139)
        all_records = []
        for _ in range(50):
            n = int(rng.integers(1, 25))
            scores = [int(rng.integers(1, 11)) for _ in range(n)]
            records = [ScoreRecord("v", "m", "overall_realism", "A", s, "ok")
                       for s in scores]
            all_records.extend(records)
            stats = dimension_stats(records, "overall_realism", "m")
            vals = sorted(scores)
            mean = sum(vals) / n
            std = (math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1))
                   if n > 1 else 0.0)
            assert stats.min == vals[0] and stats.max == vals[-1]
            assert abs(stats.mean - mean) <= 1e-9
            assert abs(stats.std - std) <= 1e-9
            assert abs(stats.median - _oracle_quantile(vals, 0.5)) <= 1e-9
            assert abs(stats.q25 - _oracle_quantile(vals, 0.25)) <= 1e-9
            assert abs(stats.q75 - _oracle_quantile(vals, 0.75)) <= 1e-9

        text = serialize_sft(export_sft(all_records))
        for line in text.strip().split("\n"):
            assert set(json.loads(line)) == {"score", "reason"}
