"""Shared fixtures: a fully populated synthetic evaluation manifest."""
import json

import numpy as np
import pytest

from worldlens.interchange import TensorFile, write_tensor
from worldlens.preference import DIMENSIONS
from worldlens.reconstruction import TRAJECTORY_CONDITIONS

N_FRAMES = 4
EMB_DIM = 6


def _unit_rows(rng, t, d):
    rows = rng.normal(size=(t, d))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return rows.astype(np.float32)


def _write(arr, path):
    write_tensor(TensorFile.from_array(arr), path)


def build_manifest(root, n_videos=20, seed=0):
    """Write a complete artifact tree under ``root``; returns the manifest path."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    vids = [f"vid{i:02d}" for i in range(n_videos)]
    refs = [f"ref{i:02d}" for i in range(n_videos)]

    camera_pairs = [["CAM_FRONT", "CAM_FRONT_RIGHT"], ["CAM_FRONT_RIGHT", "CAM_BACK"]]

    # G1 per-instance realism confidences
    g1 = []
    for vid in vids:
        for f in range(N_FRAMES):
            for tid, cls in ((1, "vehicle"), (2, "pedestrian")):
                g1.append({"video_id": vid, "frame_index": f, "track_id": tid,
                           "class_id": cls,
                           "confidence": float(rng.uniform(0.2, 0.95))})
    (root / "g1.json").write_text(json.dumps(g1))

    # G2 track embedding files
    tracks_dir = root / "g2"
    tracks_dir.mkdir()
    for vid in vids:
        doc = {"tracks": []}
        for tid in (1, 2):
            name = f"{vid}_t{tid}.wlt"
            _write(_unit_rows(rng, N_FRAMES, EMB_DIM), tracks_dir / name)
            doc["tracks"].append({
                "track_id": tid, "class_id": "vehicle",
                "confidences": [float(rng.uniform(0.3, 1.0))] * N_FRAMES,
                "embeddings": name,
            })
        (tracks_dir / f"{vid}.json").write_text(json.dumps(doc))

    # G3 / G5 paired embedding sequences
    for sub in ("g3", "g5"):
        d = root / sub
        d.mkdir()
        for vid, ref in zip(vids, refs):
            _write(_unit_rows(rng, N_FRAMES, EMB_DIM), d / f"{vid}.wlt")
            _write(_unit_rows(rng, N_FRAMES, EMB_DIM), d / f"{ref}.wlt")

    # G4 depth-feature sequences (not normalized)
    g4 = root / "g4"
    g4.mkdir()
    for vid in vids:
        _write(rng.normal(size=(N_FRAMES, EMB_DIM)).astype(np.float32),
               g4 / f"{vid}.wlt")

    # G6 semantic label masks
    g6 = root / "g6"
    g6.mkdir()
    for vid in vids:
        _write(rng.integers(0, 3, size=(N_FRAMES, 8, 8)).astype(np.uint16),
               g6 / f"{vid}.wlt")

    # G7 pooled video features
    _write(rng.normal(size=(12, 4)).astype(np.float32), root / "g7_real.wlt")
    _write(rng.normal(size=(12, 4)).astype(np.float32), root / "g7_gen.wlt")

    # G8 cross-view match records
    g8 = []
    for vid in vids:
        for pair in camera_pairs:
            for f in range(N_FRAMES):
                g8.append({"video_id": vid, "frame_index": f, "camera_pair": pair,
                           "confidences": [float(rng.uniform(0, 1)) for _ in range(3)]})
    (root / "g8.json").write_text(json.dumps(g8))

    # R1 rendered / reference frames
    r1 = root / "r1"
    r1.mkdir()
    for vid in vids:
        ref = rng.random((N_FRAMES, 12, 12, 3)).astype(np.float32)
        noise = rng.normal(0, 0.02, size=ref.shape).astype(np.float32)
        _write(np.clip(ref + noise, 0, 1), r1 / f"{vid}_pred.wlt")
        _write(ref, r1 / f"{vid}_ref.wlt")

    # R2 depth maps with validity masks
    r2 = root / "r2"
    r2.mkdir()
    for vid in vids:
        gt = rng.uniform(1.0, 40.0, size=(N_FRAMES, 8, 8)).astype(np.float32)
        pred = (gt * rng.uniform(0.9, 1.1, size=gt.shape)).astype(np.float32)
        mask = (rng.random(gt.shape) > 0.3).astype(np.uint8)
        mask[:, 0, 0] = 1  # no frame may be fully masked out
        _write(pred, r2 / f"{vid}_pred.wlt")
        _write(gt, r2 / f"{vid}_gt.wlt")
        _write(mask, r2 / f"{vid}_mask.wlt")

    # R3 per-frame quality scores per trajectory condition
    r3 = {name: [float(rng.uniform(30, 60)) for _ in range(3 * n_videos)]
          for name in TRAJECTORY_CONDITIONS}
    (root / "r3.json").write_text(json.dumps(r3))

    # R4 per-condition feature pools
    r4 = root / "r4"
    r4.mkdir()
    for name in TRAJECTORY_CONDITIONS:
        _write(rng.normal(size=(10, 4)).astype(np.float32), r4 / f"{name}_real.wlt")
        _write(rng.normal(size=(10, 4)).astype(np.float32), r4 / f"{name}_gen.wlt")

    # A1 trajectories
    a1 = {}
    for vid in vids:
        gt = rng.normal(size=(6, 2))
        a1[vid] = {"gt": gt.tolist(), "gen": (gt + rng.normal(0, 0.5, gt.shape)).tolist()}
    (root / "a1.json").write_text(json.dumps(a1))

    # A2-A4 episode sub-scores
    episodes = [{"nc": float(rng.uniform(0.5, 1)), "dac": float(rng.uniform(0.5, 1)),
                 "ep": float(rng.uniform(0.5, 1)), "ttc": float(rng.uniform(0.5, 1)),
                 "comfort": float(rng.uniform(0.5, 1)),
                 "d_completed": float(rng.uniform(50, 100)), "d_total": 100.0}
                for _ in range(30)]
    (root / "episodes.json").write_text(json.dumps(episodes))

    # D1 BEV label maps
    d1 = root / "d1"
    d1.mkdir()
    for vid in vids:
        gt = rng.integers(0, 3, size=(N_FRAMES, 8, 8)).astype(np.uint16)
        pred = gt.copy()
        flip = rng.random(gt.shape) < 0.1
        pred[flip] = (pred[flip] + 1) % 3
        _write(pred, d1 / f"{vid}_pred.wlt")
        _write(gt, d1 / f"{vid}_gt.wlt")

    # D2 detection summary
    (root / "d2.json").write_text(json.dumps({
        "m_ap": 0.3657, "m_ate": 0.7356, "m_ase": 0.2919,
        "m_aoe": 0.4400, "m_ave": 0.6821, "m_aae": 0.2072}))

    # D3 tracking logs
    d3 = {"videos": {}}
    for vid in vids:
        frames = []
        for f in range(6):
            gt = [["g1", float(f), 0.0], ["g2", float(f), 5.0]]
            pred = [["t1", float(f) + 0.2, 0.0, 0.9],
                    ["t2", float(f) - 0.1, 5.0, 0.8]]
            if f == 3 and int(vid[3:]) % 2 == 0:
                pred.append(["t9", 50.0, 50.0, 0.7])
            frames.append({"gt": gt, "pred": pred})
        d3["videos"][vid] = {"frames": frames, "distance_threshold": 2.0}
    (root / "d3.json").write_text(json.dumps(d3))

    # D4 occupancy grids and query rays
    d4 = root / "d4"
    d4.mkdir()
    for vid in vids:
        gt = (rng.random((8, 8, 8)) < 0.15).astype(np.uint16) * \
            rng.integers(1, 3, size=(8, 8, 8)).astype(np.uint16)
        pred = gt.copy()
        swap = rng.random(gt.shape) < 0.05
        pred[swap] = (pred[swap] + 1) % 3
        _write(pred, d4 / f"{vid}_pred.wlt")
        _write(gt, d4 / f"{vid}_gt.wlt")
        (d4 / f"{vid}_geom.json").write_text(
            json.dumps({"origin": [0.0, 0.0, 0.0], "voxel_size": 1.0}))
    rays = []
    for _ in range(16):
        o = rng.uniform(-2, 0, size=3)
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        rays.append({"origin": o.tolist(), "direction": d.tolist(), "max_range": 40.0})
    (root / "rays.json").write_text(json.dumps(rays))

    # H preference records
    lines = []
    for vid in vids[:5]:
        for model in ("model_x", "model_y"):
            for dim in DIMENSIONS:
                for group in ("A", "B"):
                    lines.append(json.dumps({
                        "video_id": vid, "model_id": model, "dimension": dim,
                        "group_id": group, "score": int(rng.integers(1, 11)),
                        "rationale": "plausible motion and stable geometry"}))
    (root / "h.ndjson").write_text("\n".join(lines) + "\n")

    manifest = {
        "run_id": "synthetic",
        "videos": [{"id": v, "gt_id": r, "frames": N_FRAMES}
                   for v, r in zip(vids, refs)],
        "camera_pairs": camera_pairs,
        "classes": {"objects": ["vehicle", "pedestrian"],
                    "semantic_count": 3, "bev_count": 3},
        "thresholds": {"vehicle": 0.25, "pedestrian": 0.50},
        "artifacts": {
            "G1": {"confidences": "g1.json"},
            "G2": {"tracks_dir": "g2"},
            "G3": {"features_dir": "g3"},
            "G4": {"features_dir": "g4"},
            "G5": {"features_dir": "g5"},
            "G6": {"masks_dir": "g6", "erosion_radius": 1},
            "G7": {"real": "g7_real.wlt", "gen": "g7_gen.wlt"},
            "G8": {"matches": "g8.json"},
            "R1": {"renders_dir": "r1"},
            "R2": {"depth_dir": "r2"},
            "R3": {"quality": "r3.json"},
            "R4": {"features_dir": "r4"},
            "A1": {"trajectories": "a1.json"},
            "A2": {"episodes": "episodes.json"},
            "A3": {"episodes": "episodes.json"},
            "A4": {"episodes": "episodes.json"},
            "D1": {"bev_dir": "d1"},
            "D2": {"detection": "d2.json"},
            "D3": {"tracking": "d3.json"},
            "D4": {"occ_dir": "d4", "rays": "rays.json"},
            "H": {"records": "h.ndjson"},
        },
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


@pytest.fixture(scope="session")
def synthetic_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return build_manifest(root)
