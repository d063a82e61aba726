"""Core value types: boxes, appearance descriptors, detections, trajectories, sequences.

Appearance descriptors are carried on detections as data; this package never
touches pixels. Sequences are stored as line-oriented JSON (schema
``ctxtrack-seq/1``): a header record followed by one record per object, where
records with an ``objectId`` are ground-truth annotations and records without
one are detector output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class SequenceFormatError(ValueError):
    """Raised when a sequence file fails to parse or violates an invariant."""


SEQ_SCHEMA = "ctxtrack-seq/1"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, top-left corner plus size, in pixels. w and h must be positive."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box size must be positive, got w={self.w} h={self.h}")

    def area(self) -> float:
        return self.w * self.h

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes in square pixels."""
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union, symmetric, in [0, 1]."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area() + b.area() - inter)


@dataclass(frozen=True, eq=False)
class Appearance:
    """Per-detection appearance descriptors.

    color_histogram: length-B vector, entries >= 0 summing to 1.
    color_covariance: symmetric positive-semidefinite 3x3 matrix.
    dominant_colors: up to K (bin, weight) pairs, weights descending, sum <= 1.
    contrast: scalar in [0, 1], difference against the surrounding background.
    """

    color_histogram: np.ndarray
    color_covariance: np.ndarray
    dominant_colors: tuple
    contrast: float

    def __post_init__(self):
        hist = np.asarray(self.color_histogram, dtype=np.float64)
        cov = np.asarray(self.color_covariance, dtype=np.float64)
        object.__setattr__(self, "color_histogram", hist)
        object.__setattr__(self, "color_covariance", cov)
        object.__setattr__(self, "dominant_colors", tuple((int(b), float(w)) for b, w in self.dominant_colors))
        if hist.ndim != 1:
            raise ValueError("histogram must be a 1-D vector")
        if np.any(hist < -1e-12):
            raise ValueError("histogram entries must be non-negative")
        if abs(float(hist.sum()) - 1.0) > 1e-9:
            raise ValueError(f"histogram must sum to 1, got {hist.sum()!r}")
        if cov.shape != (3, 3) or not np.allclose(cov, cov.T, atol=1e-8):
            raise ValueError("covariance must be a symmetric 3x3 matrix")
        weights = [w for _, w in self.dominant_colors]
        if any(w1 < w2 - 1e-12 for w1, w2 in zip(weights, weights[1:])):
            raise ValueError("dominant color weights must be descending")
        if sum(weights) > 1.0 + 1e-9:
            raise ValueError("dominant color weights must sum to at most 1")
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError(f"contrast must be in [0,1], got {self.contrast}")


@dataclass(frozen=True, eq=False)
class Detection:
    """One detected object on one frame."""

    frame_index: int
    box: BBox
    appearance: Appearance
    detection_id: int

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")


@dataclass(frozen=True, eq=False)
class AnnotatedObject(Detection):
    """Ground-truth object: a detection plus its true identity."""

    object_id: int = 0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered observations sharing one track identity."""

    track_id: int
    observations: tuple

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        frames = [d.frame_index for d in self.observations]
        if any(f2 <= f1 for f1, f2 in zip(frames, frames[1:])):
            raise ValueError(f"track {self.track_id}: observation frames must be strictly increasing")

    def frame_span(self) -> tuple[int, int]:
        return self.observations[0].frame_index, self.observations[-1].frame_index


@dataclass(eq=False)
class Sequence:
    """A video's worth of detections, with optional ground-truth annotations."""

    frame_width: float
    frame_height: float
    frames: list = field(default_factory=list)        # per-frame lists of Detection
    annotations: Optional[list] = None                # per-frame lists of AnnotatedObject
    hist_bins: int = 64
    dominant_k: int = 3

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def frame_area(self) -> float:
        return self.frame_width * self.frame_height

    def validate(self) -> None:
        if self.annotations is not None and len(self.annotations) != len(self.frames):
            raise ValueError("annotation and detection frame counts differ")
        for lists in filter(None, (self.frames, self.annotations)):
            for i, objs in enumerate(lists):
                for obj in objs:
                    if obj.frame_index != i:
                        raise ValueError(f"object {obj.detection_id} filed under frame {i} but claims {obj.frame_index}")
                    b = obj.box
                    if b.x < -1e-9 or b.y < -1e-9 or b.x2 > self.frame_width + 1e-9 or b.y2 > self.frame_height + 1e-9:
                        raise ValueError(f"object {obj.detection_id} box exceeds frame bounds")


def clamp_box(box: BBox, frame_width: float, frame_height: float) -> BBox:
    """Clip a box to frame bounds. Raises if nothing is left inside the frame."""
    x1 = min(max(box.x, 0.0), frame_width)
    y1 = min(max(box.y, 0.0), frame_height)
    x2 = min(max(box.x2, 0.0), frame_width)
    y2 = min(max(box.y2, 0.0), frame_height)
    if x2 - x1 <= 0 or y2 - y1 <= 0:
        raise ValueError("box lies entirely outside the frame")
    return BBox(x1, y1, x2 - x1, y2 - y1)


def _upper_triangular(cov: np.ndarray) -> list[float]:
    return [float(cov[0, 0]), float(cov[0, 1]), float(cov[0, 2]),
            float(cov[1, 1]), float(cov[1, 2]), float(cov[2, 2])]


def _cov_from_upper(values) -> np.ndarray:
    c00, c01, c02, c11, c12, c22 = (float(v) for v in values)
    return np.array([[c00, c01, c02], [c01, c11, c12], [c02, c12, c22]], dtype=np.float64)


def _record_for(obj: Detection) -> dict:
    rec = {
        "frame": obj.frame_index,
        "id": obj.detection_id,
    }
    if isinstance(obj, AnnotatedObject):
        rec["objectId"] = obj.object_id
    rec.update(
        x=obj.box.x, y=obj.box.y, w=obj.box.w, h=obj.box.h,
        contrast=obj.appearance.contrast,
        histogram=[float(v) for v in obj.appearance.color_histogram],
        covariance=_upper_triangular(obj.appearance.color_covariance),
        dominant=[[b, w] for b, w in obj.appearance.dominant_colors],
    )
    return rec


def save_sequence(seq: Sequence, path: str) -> None:
    """Write a sequence as ctxtrack-seq/1 JSON lines. Output is byte-deterministic."""
    header = {
        "schema": SEQ_SCHEMA,
        "frameWidth": seq.frame_width,
        "frameHeight": seq.frame_height,
        "bins": seq.hist_bins,
        "dominantK": seq.dominant_k,
        "frames": seq.n_frames,
        "annotated": seq.annotations is not None,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for i in range(seq.n_frames):
            if seq.annotations is not None:
                for obj in sorted(seq.annotations[i], key=lambda o: o.object_id):
                    fh.write(json.dumps(_record_for(obj)) + "\n")
            for det in sorted(seq.frames[i], key=lambda o: o.detection_id):
                fh.write(json.dumps(_record_for(det)) + "\n")


def _parse_record(rec: dict, lineno: int, seq: Sequence) -> None:
    def fail(msg: str):
        raise SequenceFormatError(f"line {lineno}: {msg} (record id={rec.get('id')!r})")

    for key in ("frame", "id", "x", "y", "w", "h", "contrast", "histogram", "covariance", "dominant"):
        if key not in rec:
            fail(f"missing field '{key}'")
    frame = rec["frame"]
    if not isinstance(frame, int) or frame < 0:
        fail(f"bad frame index {frame!r}")
    if frame >= seq.n_frames:
        fail(f"frame {frame} outside declared range of {seq.n_frames}")
    if len(rec["histogram"]) != seq.hist_bins:
        fail(f"histogram has {len(rec['histogram'])} bins, header declares {seq.hist_bins}")
    if len(rec["dominant"]) > seq.dominant_k:
        fail(f"more than {seq.dominant_k} dominant colors")
    try:
        box = clamp_box(BBox(rec["x"], rec["y"], rec["w"], rec["h"]), seq.frame_width, seq.frame_height)
        appearance = Appearance(
            color_histogram=np.array(rec["histogram"], dtype=np.float64),
            color_covariance=_cov_from_upper(rec["covariance"]),
            dominant_colors=tuple((b, w) for b, w in rec["dominant"]),
            contrast=rec["contrast"],
        )
    except ValueError as exc:
        fail(str(exc))
    if "objectId" in rec:
        obj = AnnotatedObject(frame, box, appearance, int(rec["id"]), object_id=int(rec["objectId"]))
        seq.annotations[frame].append(obj)
    else:
        seq.frames[frame].append(Detection(frame, box, appearance, int(rec["id"])))


def load_sequence(path: str) -> Sequence:
    """Parse and validate a ctxtrack-seq/1 file.

    Boxes are clamped to frame bounds here; malformed records are reported
    with their line number.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        return Sequence(frame_width=0.0, frame_height=0.0, frames=[], annotations=None)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SequenceFormatError(f"line 1: header is not valid JSON: {exc}") from exc
    if header.get("schema") != SEQ_SCHEMA:
        raise SequenceFormatError(f"unsupported schema {header.get('schema')!r}, expected {SEQ_SCHEMA!r}")
    n = int(header["frames"])
    seq = Sequence(
        frame_width=float(header["frameWidth"]),
        frame_height=float(header["frameHeight"]),
        frames=[[] for _ in range(n)],
        annotations=[[] for _ in range(n)] if header.get("annotated") else None,
        hist_bins=int(header.get("bins", 64)),
        dominant_k=int(header.get("dominantK", 3)),
    )
    seen_det_ids: set[int] = set()
    seen_gt_keys: set[tuple[int, int]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SequenceFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
        _parse_record(rec, lineno, seq)
        det_id = int(rec["id"])
        if det_id in seen_det_ids:
            raise SequenceFormatError(f"line {lineno}: duplicate detection id {det_id}")
        seen_det_ids.add(det_id)
        if "objectId" in rec:
            key = (rec["frame"], int(rec["objectId"]))
            if key in seen_gt_keys:
                raise SequenceFormatError(f"line {lineno}: duplicate (frame, objectId) pair {key}")
            seen_gt_keys.add(key)
    seq.validate()
    return seq


def annotation_trajectories(seq: Sequence) -> list[Trajectory]:
    """Group ground-truth annotations into per-object trajectories."""
    if seq.annotations is None:
        raise ValueError("sequence has no annotations")
    by_object: dict[int, list[AnnotatedObject]] = {}
    for objs in seq.annotations:
        for obj in objs:
            by_object.setdefault(obj.object_id, []).append(obj)
    trajectories = []
    for object_id in sorted(by_object):
        obs = sorted(by_object[object_id], key=lambda o: o.frame_index)
        trajectories.append(Trajectory(track_id=object_id, observations=tuple(obs)))
    return trajectories


def isfinite_box(box: BBox) -> bool:
    return all(math.isfinite(v) for v in (box.x, box.y, box.w, box.h))
