"""Tracking evaluation: trajectory-level MT/PT/ML and frame-level MOTA/MOTP.

Trajectory coverage demands a single output identity: a ground-truth track is
covered only on frames where one particular output trajectory overlaps it, so
identity switches cut coverage. Mostly-tracked is strict (> 0.8), partly-
tracked is the inclusive band [0.2, 0.8], mostly-lost is the rest.

The frame-level metrics follow the CLEAR protocol: correspondences persist
while the overlap holds, remaining pairs are matched by maximizing IoU, and a
ground truth re-matched to a different hypothesis than its last known one
counts as an identity switch. MOTP is reported in overlap form (mean IoU of
matches), so higher is better for both metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .scene import BBox, Trajectory, iou


@dataclass(frozen=True)
class ClearMotCounts:
    matches: int
    misses: int
    false_positives: int
    id_switches: int
    total_gt: int


@dataclass(frozen=True)
class TrackEvalReport:
    mt: float
    pt: float
    ml: float
    mota: float
    motp: float
    counts: ClearMotCounts

    @property
    def mbar(self) -> float:
        return 0.5 * (self.mota + self.motp)

    def to_record(self) -> dict:
        return {
            "MT": self.mt, "PT": self.pt, "ML": self.ml,
            "MOTA": self.mota, "MOTP": self.motp, "Mbar": self.mbar,
            "matches": self.counts.matches, "misses": self.counts.misses,
            "falsePositives": self.counts.false_positives,
            "idSwitches": self.counts.id_switches, "totalGt": self.counts.total_gt,
        }


def trajectory_coverage(gt: Trajectory, outputs: list[Trajectory], iou_thr: float) -> float:
    """Best single-trajectory coverage of a ground-truth track, in [0, 1]."""
    if not 0.0 < iou_thr < 1.0:
        raise ValueError("iou_thr must be in (0, 1)")
    if not outputs:
        return 0.0
    gt_boxes = {obs.frame_index: obs.box for obs in gt.observations}
    best = 0.0
    for out in outputs:
        covered = 0
        for obs in out.observations:
            box = gt_boxes.get(obs.frame_index)
            if box is not None and iou(box, obs.box) >= iou_thr:
                covered += 1
        best = max(best, covered / len(gt_boxes))
    return best


def mt_pt_ml(gt_trajectories: list[Trajectory], outputs: list[Trajectory],
             iou_thr: float) -> tuple[float, float, float]:
    """Percent of ground-truth tracks mostly tracked, partly tracked, mostly lost."""
    if not gt_trajectories:
        raise ValueError("ground truth must contain at least one trajectory")
    mt = pt = ml = 0
    for gt in gt_trajectories:
        coverage = trajectory_coverage(gt, outputs, iou_thr)
        if coverage > 0.8:
            mt += 1
        elif coverage >= 0.2:
            pt += 1
        else:
            ml += 1
    scale = 100.0 / len(gt_trajectories)
    return mt * scale, pt * scale, ml * scale


FramesById = list[dict[int, BBox]]


def clear_mot(gt_frames: FramesById, hyp_frames: FramesById,
              iou_thr: float) -> tuple[float, float, ClearMotCounts]:
    """CLEAR accuracy and precision over aligned per-frame {id: box} maps.

    MOTA = 1 - (misses + false positives + id switches) / total gt boxes.
    MOTP = mean IoU over matched pairs, 0 when nothing ever matched.
    """
    if len(gt_frames) != len(hyp_frames):
        raise ValueError("ground-truth and hypothesis frame counts differ")
    corr: dict[int, int] = {}        # gt id -> currently matched hyp id
    last_match: dict[int, int] = {}  # gt id -> last hyp id ever matched
    misses = fp = idsw = matches = 0
    total_gt = 0
    iou_sum = 0.0
    for gt_objs, hyp_objs in zip(gt_frames, hyp_frames):
        total_gt += len(gt_objs)
        frame_pairs: dict[int, int] = {}
        # keep surviving correspondences first
        for gid, hid in corr.items():
            if gid in gt_objs and hid in hyp_objs and iou(gt_objs[gid], hyp_objs[hid]) >= iou_thr:
                frame_pairs[gid] = hid
        free_g = [g for g in gt_objs if g not in frame_pairs]
        taken_h = set(frame_pairs.values())
        free_h = [h for h in hyp_objs if h not in taken_h]
        if free_g and free_h:
            overlap = np.zeros((len(free_g), len(free_h)))
            for i, g in enumerate(free_g):
                for j, h in enumerate(free_h):
                    overlap[i, j] = iou(gt_objs[g], hyp_objs[h])
            rows, cols = linear_sum_assignment(overlap, maximize=True)
            for r, c in zip(rows, cols):
                if overlap[r, c] >= iou_thr:
                    frame_pairs[free_g[r]] = free_h[c]
        for gid, hid in frame_pairs.items():
            prev = last_match.get(gid)
            if prev is not None and prev != hid:
                idsw += 1
            last_match[gid] = hid
            matches += 1
            iou_sum += iou(gt_objs[gid], hyp_objs[hid])
        misses += len(gt_objs) - len(frame_pairs)
        fp += len(hyp_objs) - len(frame_pairs)
        corr = frame_pairs
    counts = ClearMotCounts(matches, misses, fp, idsw, total_gt)
    mota = 1.0 - (misses + fp + idsw) / total_gt if total_gt else 0.0
    motp = iou_sum / matches if matches else 0.0
    return mota, motp, counts


def trajectories_to_frames(trajectories: list[Trajectory], n_frames: int) -> FramesById:
    """Per-frame {track id: box} maps from a trajectory list."""
    frames: FramesById = [{} for _ in range(n_frames)]
    for tr in trajectories:
        for obs in tr.observations:
            if obs.frame_index < n_frames:
                frames[obs.frame_index][tr.track_id] = obs.box
    return frames


def evaluate(gt_trajectories: list[Trajectory], outputs: list[Trajectory],
             n_frames: int, iou_thr: float = 0.5) -> TrackEvalReport:
    """Full report: both metric families on one pair of track sets."""
    mt, pt, ml = mt_pt_ml(gt_trajectories, outputs, iou_thr)
    mota, motp, counts = clear_mot(
        trajectories_to_frames(gt_trajectories, n_frames),
        trajectories_to_frames(outputs, n_frames),
        iou_thr,
    )
    return TrackEvalReport(mt=mt, pt=pt, ml=ml, mota=mota, motp=motp, counts=counts)
