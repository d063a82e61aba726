"""Appearance-based detection linker controlled by five descriptor weights.

Detections are linked frame to frame by a weighted combination of five
similarities: 2D area, 2D shape ratio, RGB color histogram, color covariance
and dominant color. Per frame, active tracks and new detections are matched
one-to-one by maximizing the total link score, links below the threshold are
rejected, and tracks unseen for longer than the temporal window are closed.

The weight vector is the hot-swap point used by the online controller: it can
be replaced between frames without disturbing existing track identities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .scene import Detection, Trajectory

DESCRIPTOR_NAMES = ("area", "shapeRatio", "colorHistogram", "colorCovariance", "dominantColor")
COV_REG = 1e-6


@dataclass(frozen=True)
class TrackerParams:
    """Descriptor weights plus linking threshold and temporal window."""

    weights: tuple
    link_threshold: float = 0.5
    temporal_window: int = 10

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != 5:
            raise ValueError(f"expected 5 descriptor weights, got {len(w)}")
        if any(v < 0 for v in w):
            raise ValueError("descriptor weights must be non-negative")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError(
                f"descriptor weights must sum to 1 (got {sum(w)!r}); normalize them first")
        if not 0.0 <= self.link_threshold <= 1.0:
            raise ValueError("link_threshold must be in [0, 1]")
        if self.temporal_window < 1:
            raise ValueError("temporal_window must be >= 1")

    @staticmethod
    def uniform(link_threshold: float = 0.5, temporal_window: int = 10) -> "TrackerParams":
        return TrackerParams((0.2,) * 5, link_threshold, temporal_window)

    def with_weights(self, weights) -> "TrackerParams":
        return TrackerParams(tuple(weights), self.link_threshold, self.temporal_window)


def _upper_tri_rows(detections: list[Detection]) -> np.ndarray:
    rows = np.empty((len(detections), 6), dtype=np.float64)
    for i, d in enumerate(detections):
        c = d.appearance.color_covariance
        rows[i] = (c[0, 0], c[0, 1], c[0, 2], c[1, 1], c[1, 2], c[2, 2])
    return rows


def _dominant_similarity(a: Detection, b: Detection) -> float:
    wa = dict(a.appearance.dominant_colors)
    wb = dict(b.appearance.dominant_colors)
    return sum(min(w, wb[bin_]) for bin_, w in wa.items() if bin_ in wb)


def similarity_matrix(rows: list[Detection], cols: list[Detection]) -> np.ndarray:
    """Five-descriptor similarity for every (row, col) pair, shape (n, m, 5)."""
    n, m = len(rows), len(cols)
    out = np.zeros((n, m, 5), dtype=np.float64)
    if n == 0 or m == 0:
        return out
    areas_r = np.array([d.box.area() for d in rows])
    areas_c = np.array([d.box.area() for d in cols])
    ratios_r = np.array([d.box.h / d.box.w for d in rows])
    ratios_c = np.array([d.box.h / d.box.w for d in cols])
    out[:, :, 0] = np.minimum.outer(areas_r, areas_c) / np.maximum.outer(areas_r, areas_c)
    out[:, :, 1] = np.minimum.outer(ratios_r, ratios_c) / np.maximum.outer(ratios_r, ratios_c)
    hists_r = np.stack([d.appearance.color_histogram for d in rows])
    hists_c = np.stack([d.appearance.color_histogram for d in cols])
    out[:, :, 2] = _kernels.hist_intersection(
        np.ascontiguousarray(hists_r), np.ascontiguousarray(hists_c))
    rho = _kernels.cov_log_distance(_upper_tri_rows(rows), _upper_tri_rows(cols), COV_REG)
    out[:, :, 3] = 1.0 / (1.0 + rho)
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            out[i, j, 4] = _dominant_similarity(a, b)
    return out


def paired_similarities(left: list[Detection], right: list[Detection]) -> np.ndarray:
    """Row-wise similarities for aligned detection lists, shape (n, 5)."""
    if len(left) != len(right):
        raise ValueError("paired lists must have equal length")
    n = len(left)
    out = np.zeros((n, 5), dtype=np.float64)
    if n == 0:
        return out
    areas_l = np.array([d.box.area() for d in left])
    areas_r = np.array([d.box.area() for d in right])
    ratios_l = np.array([d.box.h / d.box.w for d in left])
    ratios_r = np.array([d.box.h / d.box.w for d in right])
    out[:, 0] = np.minimum(areas_l, areas_r) / np.maximum(areas_l, areas_r)
    out[:, 1] = np.minimum(ratios_l, ratios_r) / np.maximum(ratios_l, ratios_r)
    hists_l = np.stack([d.appearance.color_histogram for d in left])
    hists_r = np.stack([d.appearance.color_histogram for d in right])
    out[:, 2] = np.minimum(hists_l, hists_r).sum(axis=1)
    rho = _kernels.cov_log_distance_paired(_upper_tri_rows(left), _upper_tri_rows(right), COV_REG)
    out[:, 3] = 1.0 / (1.0 + rho)
    out[:, 4] = [_dominant_similarity(a, b) for a, b in zip(left, right)]
    return out


def descriptor_similarities(a: Detection, b: Detection) -> np.ndarray:
    """The five similarities for one pair, each in [0, 1] and symmetric."""
    return similarity_matrix([a], [b])[0, 0]


def link_score(a: Detection, b: Detection, params: TrackerParams) -> float:
    """Weighted combination of the five descriptor similarities."""
    return float(np.dot(descriptor_similarities(a, b), params.weights))


@dataclass
class Track:
    track_id: int
    observations: list
    last_seen: int

    @property
    def last_observation(self) -> Detection:
        return self.observations[-1]


@dataclass
class TrackState:
    """Single-owner mutable tracking state; one instance per video stream."""

    params: TrackerParams
    active: list = field(default_factory=list)
    finished: list = field(default_factory=list)
    next_track_id: int = 1
    last_frame: int = -1


def set_params(state: TrackState, params: TrackerParams) -> TrackState:
    """Hot-swap tracker parameters; existing tracks are untouched."""
    if not isinstance(params, TrackerParams):
        raise TypeError("params must be a TrackerParams")
    state.params = params
    return state


def track_step(state: TrackState, detections: list[Detection], frame_index: int) -> TrackState:
    """Advance one frame: match, extend, open and retire tracks."""
    if frame_index <= state.last_frame:
        raise ValueError(f"frames must arrive in order: got {frame_index} after {state.last_frame}")
    state.last_frame = frame_index
    params = state.params

    # retire tracks that fell out of the temporal window
    still_active = []
    for tr in state.active:
        if frame_index - tr.last_seen > params.temporal_window:
            state.finished.append(tr)
        else:
            still_active.append(tr)
    state.active = still_active

    matched_det: set[int] = set()
    if state.active and detections:
        sims = similarity_matrix([t.last_observation for t in state.active], detections)
        scores = sims @ np.asarray(params.weights)
        rows, cols = linear_sum_assignment(scores, maximize=True)
        for r, c in zip(rows, cols):
            if scores[r, c] >= params.link_threshold:
                track = state.active[r]
                track.observations.append(detections[c])
                track.last_seen = frame_index
                matched_det.add(c)
    for c, det in enumerate(detections):
        if c not in matched_det:
            state.active.append(Track(state.next_track_id, [det], frame_index))
            state.next_track_id += 1
    return state


def finalize(state: TrackState) -> list[Trajectory]:
    """Close all tracks and return trajectories ordered by track id."""
    state.finished.extend(state.active)
    state.active = []
    tracks = sorted(state.finished, key=lambda t: t.track_id)
    return [Trajectory(t.track_id, tuple(t.observations)) for t in tracks]


def run_tracker(frames: list[list[Detection]], params: TrackerParams) -> list[Trajectory]:
    """Track a whole sequence of per-frame detection lists with fixed parameters."""
    state = TrackState(params=params)
    for frame_index, detections in enumerate(frames):
        track_step(state, detections, frame_index)
    return finalize(state)
