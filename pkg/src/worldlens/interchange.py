"""Artifact formats and evaluation manifests.

All metric inputs enter the engine through this module: the WLT binary
tensor format, JSON record arrays, and the evaluation manifest.  No other
module performs file I/O.

WLT layout (little-endian throughout):

    bytes 0..3   magic "WLT1"
    byte  4      dtype code (1 = f32, 2 = u8, 3 = u16)
    byte  5      ndim
    bytes 6..7   reserved (zero)
    next ndim*8  shape as u64
    rest         row-major payload
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import errors

MAGIC = b"WLT1"

_DTYPE_CODES = {"f32": 1, "u8": 2, "u16": 3}
_CODE_DTYPES = {1: "f32", 2: "u8", 3: "u16"}
_NUMPY_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("<u1"), "u16": np.dtype("<u2")}

MAX_ELEMENTS = 1 << 48

# Default camera-pair set: the six adjacent pairs of a 6-camera ring.
DEFAULT_CAMERA_PAIRS = [
    ["CAM_FRONT", "CAM_FRONT_RIGHT"],
    ["CAM_FRONT_RIGHT", "CAM_BACK_RIGHT"],
    ["CAM_BACK_RIGHT", "CAM_BACK"],
    ["CAM_BACK", "CAM_BACK_LEFT"],
    ["CAM_BACK_LEFT", "CAM_FRONT_LEFT"],
    ["CAM_FRONT_LEFT", "CAM_FRONT"],
]


# --------------------------------------------------------------------------
# tensors
# --------------------------------------------------------------------------

@dataclass
class TensorFile:
    dtype: str
    shape: tuple
    data: np.ndarray

    def validate(self):
        if self.dtype not in _DTYPE_CODES:
            raise errors.UnknownDtype(self.dtype)
        if len(self.shape) == 0:
            raise errors.InvariantViolation("empty shape")
        if any(s <= 0 for s in self.shape):
            raise errors.InvariantViolation(f"non-positive shape entry: {self.shape}")
        n = 1
        for s in self.shape:
            n *= int(s)
        if n > MAX_ELEMENTS:
            raise errors.ShapeOverflow(f"{n} elements")
        if tuple(self.data.shape) != tuple(self.shape):
            raise errors.InvariantViolation("data shape mismatch")
        if self.data.dtype != _NUMPY_DTYPES[self.dtype]:
            raise errors.InvariantViolation(
                f"data dtype {self.data.dtype} != declared {self.dtype}")

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        kind = {np.dtype("float32"): "f32", np.dtype("uint8"): "u8",
                np.dtype("uint16"): "u16"}.get(arr.dtype)
        if kind is None:
            raise errors.UnknownDtype(str(arr.dtype))
        arr = arr.astype(_NUMPY_DTYPES[kind], copy=False)
        return cls(dtype=kind, shape=tuple(arr.shape), data=arr)


def write_tensor(t: TensorFile, path):
    t.validate()
    header = MAGIC + struct.pack("<BBH", _DTYPE_CODES[t.dtype], len(t.shape), 0)
    dims = b"".join(struct.pack("<Q", int(s)) for s in t.shape)
    payload = np.ascontiguousarray(t.data, dtype=_NUMPY_DTYPES[t.dtype]).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(dims)
            fh.write(payload)
    except OSError as exc:
        raise errors.IoFailure(str(exc)) from exc


def read_tensor(path) -> TensorFile:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise errors.IoFailure(str(exc)) from exc
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise errors.BadMagic(str(path))
    code, ndim, _reserved = struct.unpack("<BBH", raw[4:8])
    if code not in _CODE_DTYPES:
        raise errors.UnknownDtype(f"code {code}")
    dtype = _CODE_DTYPES[code]
    if len(raw) < 8 + 8 * ndim:
        raise errors.TruncatedPayload(f"{path}: header cut short")
    shape = struct.unpack("<" + "Q" * ndim, raw[8:8 + 8 * ndim])
    if ndim == 0 or any(s == 0 for s in shape):
        raise errors.InvariantViolation(f"bad shape {shape}")
    n = 1
    for s in shape:
        n *= s
        if n > MAX_ELEMENTS:
            raise errors.ShapeOverflow(f"{n} elements")
    np_dtype = _NUMPY_DTYPES[dtype]
    expected = n * np_dtype.itemsize
    body = raw[8 + 8 * ndim:]
    if len(body) != expected:
        raise errors.TruncatedPayload(
            f"{path}: payload {len(body)} bytes, expected {expected}")
    data = np.frombuffer(body, dtype=np_dtype).reshape(shape).copy()
    return TensorFile(dtype=dtype, shape=tuple(int(s) for s in shape), data=data)


# --------------------------------------------------------------------------
# domain carriers
# --------------------------------------------------------------------------

@dataclass
class EmbeddingSequence:
    values: np.ndarray  # T x D float32
    normalized: bool = False

    @property
    def frames(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[1]

    def validate(self):
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise errors.InvariantViolation("embeddings must be T x D with T >= 1")
        if self.normalized:
            norms = np.linalg.norm(self.values.astype(np.float64), axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-4):
                raise errors.InvariantViolation("rows flagged normalized but are not")


@dataclass
class LabelMaskSequence:
    labels: np.ndarray  # T x H x W uint16
    class_count: int

    @property
    def frames(self):
        return self.labels.shape[0]

    def validate(self):
        if self.labels.ndim != 3:
            raise errors.InvariantViolation("label masks must be T x H x W")
        if self.labels.size and int(self.labels.max()) >= self.class_count:
            raise errors.InvariantViolation(
                f"label {int(self.labels.max())} >= class_count {self.class_count}")


@dataclass
class DepthFrameSet:
    depth: np.ndarray  # T x H x W float32, meters
    valid_mask: np.ndarray | None = None  # T x H x W uint8

    def validate(self):
        if self.depth.ndim != 3:
            raise errors.InvariantViolation("depth must be T x H x W")
        if self.valid_mask is not None:
            if self.valid_mask.shape != self.depth.shape:
                raise errors.InvariantViolation("mask shape mismatch")
            if not np.isin(self.valid_mask, (0, 1)).all():
                raise errors.InvariantViolation("mask must be binary")
            if np.any(self.depth[self.valid_mask != 0] < 0):
                raise errors.InvariantViolation("negative depth under valid mask")


@dataclass
class BoxEntry:
    frame_index: int
    track_id: int
    class_id: int
    center: tuple
    size: tuple
    yaw: float
    confidence: float
    velocity: tuple | None = None


@dataclass
class TrackedBoxSet:
    entries: list

    def validate(self):
        seen = set()
        for e in self.entries:
            if any(s <= 0 for s in e.size):
                raise errors.InvariantViolation(f"non-positive box size {e.size}")
            if not 0.0 <= e.confidence <= 1.0:
                raise errors.InvariantViolation(f"confidence {e.confidence} out of range")
            key = (e.frame_index, e.track_id)
            if key in seen:
                raise errors.InvariantViolation(f"duplicate (frame, track) {key}")
            seen.add(key)


@dataclass
class TrajectorySet:
    waypoints: np.ndarray  # T_p x 2 float32, meters

    def validate(self):
        if self.waypoints.ndim != 2 or self.waypoints.shape[1] != 2:
            raise errors.InvariantViolation("waypoints must be T_p x 2")
        if self.waypoints.shape[0] < 1:
            raise errors.InvariantViolation("need at least one waypoint")
        if not np.isfinite(self.waypoints).all():
            raise errors.InvariantViolation("non-finite waypoint")


@dataclass
class VoxelGrid:
    labels: np.ndarray  # X x Y x Z uint16, 0 = free
    origin: np.ndarray  # xyz meters
    voxel_size: float

    @property
    def dims(self):
        return self.labels.shape

    def validate(self):
        if self.labels.ndim != 3:
            raise errors.InvariantViolation("voxel labels must be X x Y x Z")
        if self.voxel_size <= 0:
            raise errors.InvariantViolation("voxel_size must be positive")


@dataclass
class MatchRecord:
    video_id: str
    frame_index: int
    camera_pair: tuple
    confidences: list


@dataclass
class MatchRecordSet:
    records: list

    def validate(self):
        for r in self.records:
            for c in r.confidences:
                if not 0.0 <= c <= 1.0:
                    raise errors.InvariantViolation(
                        f"match confidence {c} out of range")


@dataclass
class RaySet:
    origins: np.ndarray     # N x 3
    directions: np.ndarray  # N x 3, unit
    max_ranges: np.ndarray  # N

    def validate(self):
        norms = np.linalg.norm(self.directions.astype(np.float64), axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise errors.InvariantViolation("ray directions must be unit length")
        if np.any(self.max_ranges <= 0):
            raise errors.InvariantViolation("max_range must be positive")


# --------------------------------------------------------------------------
# JSON record loaders
# --------------------------------------------------------------------------

def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise errors.IoFailure(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise errors.ParseError(f"{path}: {exc}") from exc


def load_match_records(path) -> MatchRecordSet:
    doc = _load_json(path)
    records = [
        MatchRecord(video_id=r["video_id"], frame_index=int(r["frame_index"]),
                    camera_pair=tuple(r["camera_pair"]),
                    confidences=[float(c) for c in r["confidences"]])
        for r in doc
    ]
    out = MatchRecordSet(records=records)
    out.validate()
    return out


def load_ray_set(path) -> RaySet:
    doc = _load_json(path)
    origins = np.array([r["origin"] for r in doc], dtype=np.float64)
    directions = np.array([r["direction"] for r in doc], dtype=np.float64)
    max_ranges = np.array([r["max_range"] for r in doc], dtype=np.float64)
    out = RaySet(origins=origins, directions=directions, max_ranges=max_ranges)
    out.validate()
    return out


def load_voxel_grid(tensor_path, geometry_path) -> VoxelGrid:
    t = read_tensor(tensor_path)
    if t.dtype != "u16" or len(t.shape) != 3:
        raise errors.InvariantViolation("voxel grid must be a 3-D u16 tensor")
    geo = _load_json(geometry_path)
    grid = VoxelGrid(labels=t.data, origin=np.asarray(geo["origin"], dtype=np.float64),
                     voxel_size=float(geo["voxel_size"]))
    grid.validate()
    return grid


# --------------------------------------------------------------------------
# evaluation manifest
# --------------------------------------------------------------------------

@dataclass
class VideoEntry:
    id: str
    gt_id: str
    frames: int


@dataclass
class EvaluationManifest:
    run_id: str
    root: Path
    videos: list                       # sorted by id
    camera_pairs: list
    classes: dict
    artifacts: dict                    # metric -> {name: resolved Path or value}
    thresholds: dict = field(default_factory=dict)

    def video_ids(self):
        return [v.id for v in self.videos]


# artifact keys each metric requires in the manifest; values are path keys
# unless listed in _VALUE_KEYS
_REQUIRED_KEYS = {
    "G1": ["confidences"],
    "G2": ["tracks_dir"],
    "G3": ["features_dir"],
    "G4": ["features_dir"],
    "G5": ["features_dir"],
    "G6": ["masks_dir"],
    "G7": ["real", "gen"],
    "G8": ["matches"],
    "R1": ["renders_dir"],
    "R2": ["depth_dir"],
    "R3": ["quality"],
    "R4": ["features_dir"],
    "A1": ["trajectories"],
    "A2": ["episodes"],
    "A3": ["episodes"],
    "A4": ["episodes"],
    "D1": ["bev_dir"],
    "D2": ["detection"],
    "D3": ["tracking"],
    "D4": ["occ_dir", "rays"],
    "H": ["records"],
}

_VALUE_KEYS = {"erosion_radius", "lpips"}

KNOWN_METRICS = tuple(sorted(_REQUIRED_KEYS))


def load_manifest(path) -> EvaluationManifest:
    path = Path(path)
    doc = _load_json(path)
    root = path.parent

    seen = set()
    videos = []
    for v in doc.get("videos", []):
        vid = v["id"]
        if vid in seen:
            raise errors.DanglingReference(f"duplicate video id {vid!r}")
        seen.add(vid)
        videos.append(VideoEntry(id=vid, gt_id=v.get("gt_id", vid),
                                 frames=int(v.get("frames", 0))))
    videos.sort(key=lambda v: v.id)

    artifacts = {}
    for metric, spec in doc.get("artifacts", {}).items():
        if metric not in _REQUIRED_KEYS:
            raise errors.DanglingReference(f"unknown metric {metric!r}")
        resolved = {}
        for key in _REQUIRED_KEYS[metric]:
            if key not in spec:
                raise errors.MissingArtifact(metric, f"missing artifact key {key!r}")
            p = root / spec[key]
            if not p.exists():
                raise errors.MissingArtifact(metric, f"unresolvable path {p}")
            resolved[key] = p
        for key, value in spec.items():
            if key in _VALUE_KEYS:
                if key == "lpips":
                    p = root / value
                    if not p.exists():
                        raise errors.MissingArtifact(metric, f"unresolvable path {p}")
                    resolved[key] = p
                else:
                    resolved[key] = value
        artifacts[metric] = resolved

    return EvaluationManifest(
        run_id=doc.get("run_id", "run"),
        root=root,
        videos=videos,
        camera_pairs=[list(p) for p in doc.get("camera_pairs", DEFAULT_CAMERA_PAIRS)],
        classes=doc.get("classes", {}),
        artifacts=artifacts,
        thresholds=doc.get("thresholds", {"vehicle": 0.25, "pedestrian": 0.50}),
    )
