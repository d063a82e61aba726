"""Pipeline configuration: one place for every tunable default.

Precedence when running from the CLI is flags > config file > defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class PipelineConfig:
    # context model
    context_threshold: float = 0.5   # Th1: max distance for two contexts to count as the same
    word_match_eps: float = 0.5      # eps: codeword match tolerance on the ratio distance
    chunk_len: int = 50              # l: frames per context chunk
    # controlled tracker
    link_threshold: float = 0.5      # minimum link score to extend a track
    temporal_window: int = 10        # frames a track survives unseen
    # weight optimization
    boost_rounds: int = 20
    quality_threshold: float = 0.7   # Q: mostly-tracked ratio a segment must reach to be satisfactory
    neg_ratio: float = 3.0           # negatives kept per positive link sample
    # evaluation
    iou_threshold: float = 0.5
    # descriptor dimensions
    hist_bins: int = 64              # B
    dominant_k: int = 3              # K

    def validate(self) -> None:
        if not 0.0 < self.word_match_eps < 1.0:
            raise ValueError(f"word_match_eps must be in (0,1), got {self.word_match_eps}")
        if not 0.0 < self.context_threshold <= 1.0:
            raise ValueError(f"context_threshold must be in (0,1], got {self.context_threshold}")
        if self.chunk_len < 1:
            raise ValueError(f"chunk_len must be >= 1, got {self.chunk_len}")
        if self.temporal_window < 1:
            raise ValueError(f"temporal_window must be >= 1, got {self.temporal_window}")
        if self.hist_bins < 1 or self.dominant_k < 1:
            raise ValueError("hist_bins and dominant_k must be >= 1")

    def hash(self) -> str:
        """Short stable digest embedded in reports so runs are traceable."""
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        cfg = replace(self, **kwargs)
        cfg.validate()
        return cfg


def load_config(path: str) -> PipelineConfig:
    """Read a JSON config file; unknown keys are rejected."""
    with open(path) as fh:
        data = json.load(fh)
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = PipelineConfig(**data)
    cfg.validate()
    return cfg


DEFAULT_CONFIG = PipelineConfig()
