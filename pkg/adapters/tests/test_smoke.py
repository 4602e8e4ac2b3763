"""Adapter smoke corpus: every emitted artifact passes validate-artifacts."""
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from worldlens_adapters import AdapterJob, errors, extract
from worldlens_adapters.cli import main as adapt_cli

CONDITIONS = ("front_center_interp", "s_curve",
              "lateral_offset_left", "lateral_offset_right")


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Two random clips plus a full adapter artifact tree."""
    root = tmp_path_factory.mktemp("smoke")
    rng = np.random.default_rng(0)
    clips = []
    for name in ("clip_a", "clip_b"):
        path = root / f"{name}.npy"
        np.save(path, rng.integers(0, 256, size=(8, 32, 48, 3)).astype(np.uint8))
        clips.append(path)

    runner = CliRunner()

    def run(extractor, clip, out, extra=()):
        result = runner.invoke(adapt_cli, ["--extractor", extractor,
                                           "--in", str(clip),
                                           "--out", str(root / "artifacts" / out),
                                           *extra])
        assert result.exit_code == 0, result.output

    for clip in clips:
        run("object-classifier", clip, "g1")
        run("reid", clip, "g2")
        run("dino", clip, "g3")
        run("depth-feature", clip, "g4")
        run("clip", clip, "g5")
        run("segmenter", clip, "g6")
        run("i3d", clip, "g7")
        run("cross-view-matcher", clip, "g8")
        run("lpips", clip, "lpips")
        for condition in CONDITIONS:
            run("musiq", clip, "r3", ["--condition", condition])

    manifest = {
        "run_id": "smoke",
        "videos": [{"id": "clip_a", "frames": 8}, {"id": "clip_b", "frames": 8}],
        "camera_pairs": [["CAM_FRONT", "CAM_FRONT_RIGHT"]],
        "classes": {"objects": ["vehicle"], "semantic_count": 3},
        "artifacts": {
            "G1": {"confidences": "artifacts/g1/confidences.json"},
            "G2": {"tracks_dir": "artifacts/g2"},
            "G3": {"features_dir": "artifacts/g3"},
            "G4": {"features_dir": "artifacts/g4"},
            "G5": {"features_dir": "artifacts/g5"},
            "G6": {"masks_dir": "artifacts/g6", "erosion_radius": 1},
            "G7": {"real": "artifacts/g7/clip_a.wlt",
                   "gen": "artifacts/g7/clip_b.wlt"},
            "G8": {"matches": "artifacts/g8/matches.json"},
            "R3": {"quality": "artifacts/r3/quality.json"},
        },
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return root


def test_validate_artifacts_zero_diagnostics(corpus):
    result = subprocess.run(
        [sys.executable, "-m", "worldlens.cli", "validate-artifacts",
         "--manifest", str(corpus / "manifest.json")],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stdout + result.stderr
    assert result.stdout.strip() == "ok"


def test_provenance_sidecars_present(corpus):
    dirs = [p for p in (corpus / "artifacts").iterdir() if p.is_dir()]
    assert len(dirs) == 10
    for d in dirs:
        sidecar = d / "provenance.json"
        assert sidecar.exists(), f"missing provenance in {d.name}"
        entries = json.loads(sidecar.read_text())
        assert entries, d.name
        for entry in entries:
            assert entry["version"]
            assert entry["backend"] == "builtin"
            assert entry["extractor"]
            assert entry["artifacts"]


def test_embeddings_are_normalized(corpus):
    import struct

    raw = (corpus / "artifacts" / "g3" / "clip_a.wlt").read_bytes()
    assert raw[:4] == b"WLT1"
    code, ndim, _ = struct.unpack("<BBH", raw[4:8])
    assert code == 1 and ndim == 2
    t, d = struct.unpack("<QQ", raw[8:24])
    rows = np.frombuffer(raw[24:], dtype="<f4").reshape(t, d)
    assert np.allclose(np.linalg.norm(rows.astype(np.float64), axis=1), 1.0,
                       atol=1e-4)


def test_segmenter_labels_in_range(corpus):
    import struct

    raw = (corpus / "artifacts" / "g6" / "clip_a.wlt").read_bytes()
    code, ndim, _ = struct.unpack("<BBH", raw[4:8])
    assert code == 3 and ndim == 3
    dims = struct.unpack("<QQQ", raw[8:32])
    labels = np.frombuffer(raw[32:], dtype="<u2").reshape(dims)
    assert labels.max() < 3


def test_lpips_scores_in_range(corpus):
    doc = json.loads((corpus / "artifacts" / "lpips" / "lpips.json").read_text())
    assert set(doc) == {"clip_a", "clip_b"}
    for scores in doc.values():
        assert all(0.0 <= s <= 2.0 for s in scores)


def test_quality_covers_all_conditions(corpus):
    doc = json.loads((corpus / "artifacts" / "r3" / "quality.json").read_text())
    assert set(doc) == set(CONDITIONS)
    for scores in doc.values():
        assert all(0.0 <= s <= 100.0 for s in scores)


def test_unknown_extractor_and_backends(corpus, tmp_path):
    clip = corpus / "clip_a.npy"
    with pytest.raises(errors.UnknownExtractor):
        extract(AdapterJob(str(clip), "yolo", str(tmp_path)))
    with pytest.raises(errors.ModelUnavailable):
        extract(AdapterJob(str(clip), "dino", str(tmp_path),
                           backend="pretrained"))


def test_decode_failures(tmp_path):
    with pytest.raises(errors.DecodeFailure):
        extract(AdapterJob(str(tmp_path / "missing.npy"), "dino", str(tmp_path)))
    bad = tmp_path / "bad.npy"
    np.save(bad, np.zeros((4, 8, 8), dtype=np.uint8))  # no channel axis
    with pytest.raises(errors.DecodeFailure):
        extract(AdapterJob(str(bad), "dino", str(tmp_path)))


def test_extraction_is_deterministic(corpus, tmp_path):
    clip = corpus / "clip_a.npy"
    out1, out2 = tmp_path / "a", tmp_path / "b"
    extract(AdapterJob(str(clip), "clip", str(out1)))
    extract(AdapterJob(str(clip), "clip", str(out2)))
    assert (out1 / "clip_a.wlt").read_bytes() == (out2 / "clip_a.wlt").read_bytes()
