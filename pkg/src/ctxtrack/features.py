"""Per-frame contextual features measured on the tracked scene.

Six features characterize a frame: object density, occlusion level, contrast
mean and spread, and normalized object-area mean and spread. Area values are
normalized by frame area so the features are resolution independent. Contrast
and area statistics are undefined (absent) on empty frames rather than zero:
a zero would look like a real "tiny objects" context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence as Seq

import numpy as np

from .scene import Appearance, BBox, Sequence, intersection_area

FEATURE_NAMES = ("density", "occlusion", "contrastMean", "contrastStd", "areaMean", "areaStd")
N_FEATURES = 6


@dataclass(frozen=True)
class ContextSample:
    """The six feature values measured on one frame."""

    frame_index: int
    density: float
    occlusion: float
    contrast_mean: Optional[float]
    contrast_std: Optional[float]
    area_mean: Optional[float]
    area_std: Optional[float]
    object_count: int

    def __post_init__(self):
        present = (self.contrast_mean, self.contrast_std, self.area_mean, self.area_std)
        if self.object_count == 0:
            if any(v is not None for v in present):
                raise ValueError("contrast/area must be absent on empty frames")
            if self.density != 0.0 or self.occlusion != 0.0:
                raise ValueError("density and occlusion must be 0 on empty frames")
        elif any(v is None for v in present):
            raise ValueError("contrast/area must be present on non-empty frames")

    def feature(self, k: int) -> Optional[float]:
        """Value of feature k in the fixed order, None when absent."""
        return (self.density, self.occlusion, self.contrast_mean,
                self.contrast_std, self.area_mean, self.area_std)[k]


@dataclass(frozen=True)
class ContextChunk:
    """A run of consecutive frames treated as one context observation."""

    start_frame: int
    end_frame: int
    samples: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.end_frame - self.start_frame + 1 != len(self.samples):
            raise ValueError("chunk frame span does not match sample count")

    def __len__(self) -> int:
        return len(self.samples)

    def feature_values(self, k: int) -> np.ndarray:
        """Present values of feature k across the chunk, in frame order."""
        vals = [s.feature(k) for s in self.samples]
        return np.array([v for v in vals if v is not None], dtype=np.float64)

    def values_by_feature(self) -> list[np.ndarray]:
        return [self.feature_values(k) for k in range(N_FEATURES)]


def density(boxes: Seq[BBox], frame_area: float) -> float:
    """Summed object area over the camera view, clamped to 1."""
    if frame_area <= 0:
        raise ValueError("frame_area must be positive")
    total = sum(b.area() for b in boxes)
    return min(total / frame_area, 1.0)


def occlusion_level(boxes: Seq[BBox]) -> float:
    """Pairwise overlap area summed over unordered pairs, over total object area.

    Regions covered by three or more objects are counted once per overlapping
    pair. Clamped to 1; zero for fewer than two objects.
    """
    n = len(boxes)
    if n < 2:
        return 0.0
    overlap = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            overlap += intersection_area(boxes[i], boxes[j])
    total = sum(b.area() for b in boxes)
    return min(overlap / total, 1.0)


def contrast_stats(appearances: Seq[Appearance]) -> Optional[tuple[float, float]]:
    """Mean and population standard deviation of object contrasts; None when empty."""
    if not appearances:
        return None
    values = np.array([a.contrast for a in appearances], dtype=np.float64)
    return float(values.mean()), float(values.std())


def area_stats(boxes: Seq[BBox], frame_area: float) -> Optional[tuple[float, float]]:
    """Mean and population std of object areas normalized by frame area; None when empty."""
    if frame_area <= 0:
        raise ValueError("frame_area must be positive")
    if not boxes:
        return None
    values = np.array([b.area() / frame_area for b in boxes], dtype=np.float64)
    return float(values.mean()), float(values.std())


def frame_sample(frame_index: int, boxes: Seq[BBox], appearances: Seq[Appearance],
                 frame_area: float) -> ContextSample:
    """Measure all six features on one frame's objects."""
    if len(boxes) != len(appearances):
        raise ValueError("boxes and appearances must pair up")
    contrast = contrast_stats(appearances)
    areas = area_stats(boxes, frame_area)
    return ContextSample(
        frame_index=frame_index,
        density=density(boxes, frame_area),
        occlusion=occlusion_level(boxes),
        contrast_mean=None if contrast is None else contrast[0],
        contrast_std=None if contrast is None else contrast[1],
        area_mean=None if areas is None else areas[0],
        area_std=None if areas is None else areas[1],
        object_count=len(boxes),
    )


def extract_context(seq: Sequence, use_annotations: bool, start: int, length: int) -> ContextChunk:
    """Measure features over ``length`` frames beginning at ``start``.

    Offline learning reads annotations; the online path reads detections.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if start < 0 or start + length > seq.n_frames:
        raise ValueError(f"frame range [{start}, {start + length}) outside sequence of {seq.n_frames} frames")
    if use_annotations:
        if seq.annotations is None:
            raise ValueError("sequence has no annotations")
        source = seq.annotations
    else:
        source = seq.frames
    samples = []
    for i in range(start, start + length):
        objs = source[i]
        samples.append(frame_sample(i, [o.box for o in objs], [o.appearance for o in objs], seq.frame_area))
    return ContextChunk(start_frame=start, end_frame=start + length - 1, samples=tuple(samples))


def sample_to_record(s: ContextSample) -> dict:
    """JSON-friendly form used by the CLI and by the learned-database file."""
    return {
        "frame": s.frame_index,
        "density": s.density,
        "occlusion": s.occlusion,
        "contrastMean": s.contrast_mean,
        "contrastStd": s.contrast_std,
        "areaMean": s.area_mean,
        "areaStd": s.area_std,
        "objectCount": s.object_count,
    }


def sample_from_record(rec: dict) -> ContextSample:
    return ContextSample(
        frame_index=int(rec["frame"]),
        density=float(rec["density"]),
        occlusion=float(rec["occlusion"]),
        contrast_mean=None if rec["contrastMean"] is None else float(rec["contrastMean"]),
        contrast_std=None if rec["contrastStd"] is None else float(rec["contrastStd"]),
        area_mean=None if rec["areaMean"] is None else float(rec["areaMean"]),
        area_std=None if rec["areaStd"] is None else float(rec["areaStd"]),
        object_count=int(rec["objectCount"]),
    )


def chunk_to_record(chunk: ContextChunk) -> dict:
    return {
        "startFrame": chunk.start_frame,
        "endFrame": chunk.end_frame,
        "samples": [sample_to_record(s) for s in chunk.samples],
    }


def chunk_from_record(rec: dict) -> ContextChunk:
    return ContextChunk(
        start_frame=int(rec["startFrame"]),
        end_frame=int(rec["endFrame"]),
        samples=tuple(sample_from_record(s) for s in rec["samples"]),
    )
