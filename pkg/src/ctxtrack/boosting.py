"""Offline learning of descriptor weights for one context segment.

Every annotated pair of objects inside a temporal window becomes a training
sample: the five descriptor similarities plus a same-object / different-object
label. Each descriptor acts as a weak classifier (a decision stump on its
similarity), and boosting distributes weight over the descriptors that
actually separate the two classes in this segment. The final weight of a
descriptor is the normalized sum of the votes of the rounds that selected it.

A segment is "satisfactory" when the tracker, run on the segment's
annotations with the learned weights, reaches a mostly-tracked ratio of at
least the quality threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .metrics import mt_pt_ml
from .scene import AnnotatedObject, Sequence, Trajectory
from .segmentation import ContextSegment
from .tracker import TrackerParams, paired_similarities, run_tracker

ALPHA_MAX = 0.5 * math.log(1e6)  # vote cap when a stump is (nearly) perfect


class SegmentUnlearnableError(ValueError):
    """Raised when a segment offers no positive link pairs to learn from."""


@dataclass(frozen=True)
class LinkSample:
    """One candidate link: descriptor similarities, label, boosting weight."""

    similarities: np.ndarray   # shape (5,)
    label: int                 # +1 same object, -1 different objects
    weight: float = 1.0

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError("label must be +1 or -1")
        if not self.weight > 0:
            raise ValueError("weight must be positive")


@dataclass(frozen=True)
class StumpRound:
    descriptor: int
    threshold: float
    polarity: int
    error: float
    alpha: float


@dataclass(frozen=True)
class BoostResult:
    weights: tuple            # length 5, sums to 1
    rounds: tuple             # StumpRound per boosting round
    has_signal: bool          # False when no stump beat chance


@dataclass(frozen=True)
class SatisfactoryParams:
    weights: tuple
    achieved_quality: float
    satisfied: bool


def build_link_samples(seq: Sequence, segment: ContextSegment, temporal_window: int,
                       neg_ratio: float, seed: int = 0) -> list[LinkSample]:
    """Enumerate labeled link pairs over a segment's annotations.

    Positives are same-object pairs separated by 1..temporal_window frames;
    negatives are different-object pairs at the same separations, subsampled
    to neg_ratio times the positive count with a seeded generator.
    """
    if seq.annotations is None:
        raise ValueError("sequence has no annotations")
    frame_objs: list[list[AnnotatedObject]] = [
        seq.annotations[i] for i in range(segment.start_frame, segment.end_frame + 1)
    ]
    pos_pairs: list[tuple[AnnotatedObject, AnnotatedObject]] = []
    neg_pairs: list[tuple[AnnotatedObject, AnnotatedObject]] = []
    for i, early in enumerate(frame_objs):
        for gap in range(1, temporal_window + 1):
            if i + gap >= len(frame_objs):
                break
            for a in early:
                for b in frame_objs[i + gap]:
                    (pos_pairs if a.object_id == b.object_id else neg_pairs).append((a, b))
    if not pos_pairs:
        raise SegmentUnlearnableError(
            f"segment {segment.start_frame}..{segment.end_frame} has no positive link pairs")
    quota = int(round(neg_ratio * len(pos_pairs)))
    if len(neg_pairs) > quota:
        rng = np.random.default_rng(seed)
        keep = rng.choice(len(neg_pairs), size=quota, replace=False)
        neg_pairs = [neg_pairs[i] for i in sorted(keep)]
    samples = []
    for pairs, label in ((pos_pairs, 1), (neg_pairs, -1)):
        if not pairs:
            continue
        sims = paired_similarities([a for a, _ in pairs], [b for _, b in pairs])
        samples.extend(LinkSample(sims[i], label) for i in range(len(pairs)))
    return samples


def _stump_predictions(values: np.ndarray, threshold: float, polarity: int) -> np.ndarray:
    raw = np.where(values >= threshold, 1.0, -1.0)
    return raw if polarity == 1 else -raw


def adaboost_weights(samples: list[LinkSample], rounds: int = 20) -> BoostResult:
    """Learn descriptor weights by boosting decision stumps on the similarities.

    Requires both labels. When no stump separates anything (all similarities
    identical across labels) the result falls back to uniform weights with
    has_signal False. The exponential-loss bound on the ensemble training
    error is checked every round.
    """
    if not samples:
        raise ValueError("no samples")
    X = np.stack([s.similarities for s in samples]).astype(np.float64)
    y = np.array([s.label for s in samples], dtype=np.float64)
    w0 = np.array([s.weight for s in samples], dtype=np.float64)
    if len(set(int(v) for v in y)) < 2:
        raise ValueError("samples must contain both labels")
    w0 /= w0.sum()
    w = w0.copy()
    orders = [np.argsort(X[:, k], kind="stable") for k in range(5)]
    recorded: list[StumpRound] = []
    ensemble = np.zeros(len(samples), dtype=np.float64)
    z_product = 1.0
    for _ in range(rounds):
        best: tuple[float, int, float, int] | None = None  # err, k, thr, pol
        for k in range(5):
            o = orders[k]
            err, thr, pol = _kernels.best_stump(
                np.ascontiguousarray(X[o, k]), np.ascontiguousarray(y[o]),
                np.ascontiguousarray(w[o]))
            if pol == 0:
                continue
            if best is None or err < best[0]:
                best = (err, k, thr, pol)
        if best is None or best[0] >= 0.5:
            break
        err, k, thr, pol = best
        alpha = min(0.5 * math.log((1.0 - err) / max(err, 1e-300)), ALPHA_MAX)
        pred = _stump_predictions(X[:, k], thr, pol)
        z_product *= float(np.sum(w * np.exp(-alpha * y * pred)))
        w = w * np.exp(-alpha * y * pred)
        w /= w.sum()
        recorded.append(StumpRound(k, thr, pol, err, alpha))
        ensemble += alpha * pred
        train_err = float(np.sum(w0[(ensemble * y) <= 0.0]))
        if train_err > z_product + 1e-9:
            raise AssertionError(
                f"boosting bound violated: training error {train_err} > bound {z_product}")
        if err < 1e-12:
            break
    if not recorded:
        return BoostResult(weights=(0.2,) * 5, rounds=(), has_signal=False)
    votes = np.zeros(5)
    for r in recorded:
        votes[r.descriptor] += r.alpha
    votes /= votes.sum()
    return BoostResult(weights=tuple(votes), rounds=tuple(recorded), has_signal=True)


def error_bound(rounds) -> float:
    """Product bound 2*sqrt(err*(1-err)) over recorded boosting rounds."""
    bound = 1.0
    for r in rounds:
        bound *= 2.0 * math.sqrt(r.error * (1.0 - r.error))
    return bound


def optimize_segment(seq: Sequence, segment: ContextSegment, base_params: TrackerParams,
                     quality_threshold: float, rounds: int = 20, neg_ratio: float = 3.0,
                     iou_thr: float = 0.5, seed: int = 0) -> SatisfactoryParams:
    """Learn weights for one segment and grade them by tracking its annotations.

    The annotations stand in for detections, so the grade isolates the
    linking quality of the weights from detector noise.
    """
    samples = build_link_samples(seq, segment, base_params.temporal_window, neg_ratio, seed)
    labels = {s.label for s in samples}
    if len(labels) < 2:
        # single object in the segment: nothing to separate, any weights do
        weights = (0.2,) * 5
    else:
        weights = adaboost_weights(samples, rounds).weights
    params = base_params.with_weights(weights)
    frames = [
        list(seq.annotations[i]) for i in range(segment.start_frame, segment.end_frame + 1)
    ]
    outputs = run_tracker(frames, params)
    gt = [t for t in annotation_trajectories_slice(seq, segment)]
    mt, _, _ = mt_pt_ml(gt, outputs, iou_thr)
    quality = mt / 100.0
    return SatisfactoryParams(weights=weights, achieved_quality=quality,
                              satisfied=quality >= quality_threshold)


def annotation_trajectories_slice(seq: Sequence, segment: ContextSegment):
    """Ground-truth trajectories restricted to a segment's frame range."""
    by_object: dict[int, list[AnnotatedObject]] = {}
    for i in range(segment.start_frame, segment.end_frame + 1):
        for obj in seq.annotations[i]:
            by_object.setdefault(obj.object_id, []).append(obj)
    from .scene import Trajectory
    return [
        Trajectory(oid, tuple(sorted(objs, key=lambda o: o.frame_index)))
        for oid, objs in sorted(by_object.items())
    ]
