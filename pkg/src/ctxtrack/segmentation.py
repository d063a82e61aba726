"""Split an annotated video into consecutive stable-context segments.

The sequence is cut into parts of ``chunk_len`` frames (the final part may be
shorter). The first part seeds a code-book model; each following part either
merges into the running model when its context distance stays below the
threshold, or starts a new segment seeded from itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codebook import ContextCodeBookModel, build_model, context_distance, update_model
from .features import ContextChunk, extract_context
from .scene import Sequence


@dataclass
class ContextSegment:
    """A maximal run of parts sharing one stable context."""

    start_frame: int
    end_frame: int
    model: ContextCodeBookModel
    merge_distances: list = field(default_factory=list)  # distance recorded at each merge


def segment_context(seq: Sequence, chunk_len: int, context_threshold: float,
                    eps: float, use_annotations: bool = True) -> list[ContextSegment]:
    """Partition [0, n_frames) into stable-context segments.

    Parts are processed in order; boundaries fall on multiples of chunk_len
    except the final one. Deterministic for identical input.
    """
    if chunk_len < 1:
        raise ValueError("chunk_len must be >= 1")
    if seq.n_frames < 1:
        raise ValueError("sequence has no frames")
    segments: list[ContextSegment] = []
    current: ContextSegment | None = None
    for start in range(0, seq.n_frames, chunk_len):
        length = min(chunk_len, seq.n_frames - start)
        chunk = extract_context(seq, use_annotations, start, length)
        if current is None:
            current = ContextSegment(start, start + length - 1, build_model(chunk, eps))
            continue
        dist = context_distance(chunk, current.model, eps)
        if dist < context_threshold:
            current.model = update_model(current.model, chunk, eps)
            current.end_frame = start + length - 1
            current.merge_distances.append(dist)
        else:
            segments.append(current)
            current = ContextSegment(start, start + length - 1, build_model(chunk, eps))
    segments.append(current)
    return segments


def extract_segment_chunk(seq: Sequence, segment: ContextSegment,
                          use_annotations: bool = True) -> ContextChunk:
    """All frames of a segment as one chunk."""
    return extract_context(seq, use_annotations, segment.start_frame,
                           segment.end_frame - segment.start_frame + 1)
