"""Code-book representation of a context and the context distance.

Each contextual feature gets its own code-book: a flat list of code-words,
each holding the running mean, min, max and frame count of the values it
absorbed. Code-books grow one word at a time whenever a value lands farther
than ``eps`` (ratio distance) from every existing word, so rare feature
values keep their own words instead of being averaged away.

The distance between a chunk of frames and a model counts, per feature, how
many of the chunk's values sit within ``eps`` of some word. A feature whose
match ratio drops below one half makes the contexts incompatible outright
(distance 1); otherwise the distance is one minus the pooled match ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .features import N_FEATURES, ContextChunk


@dataclass(frozen=True)
class CodeWord:
    """Quantized cell of one feature's distribution: mean, bounds, frame count."""

    mean: float
    vmin: float
    vmax: float
    freq: int

    def __post_init__(self):
        if not self.vmin <= self.mean <= self.vmax:
            raise ValueError(f"codeword requires min <= mean <= max, got {self}")
        if self.freq < 1:
            raise ValueError("codeword frequency must be >= 1")

    def absorb(self, value: float) -> "CodeWord":
        return CodeWord(
            mean=(self.mean * self.freq + value) / (self.freq + 1),
            vmin=min(self.vmin, value),
            vmax=max(self.vmax, value),
            freq=self.freq + 1,
        )


def word_distance(value: float, word: CodeWord) -> float:
    """Ratio distance between a feature value and a word's mean, in [0, 1].

    1 - min/max of the pair; 0 when both are 0. Values are non-negative.
    """
    mean = word.mean
    if value == mean:
        return 0.0
    hi = value if value > mean else mean
    lo = value + mean - hi
    return 1.0 - lo / hi


@dataclass(frozen=True)
class FeatureCodeBook:
    """All code-words for one contextual feature."""

    feature_index: int
    words: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))

    def means(self) -> np.ndarray:
        return np.array([w.mean for w in self.words], dtype=np.float64)

    def total_freq(self) -> int:
        return sum(w.freq for w in self.words)

    def update(self, value: float, eps: float) -> "FeatureCodeBook":
        """Absorb one value: the closest word within eps takes it, else a new word."""
        best_i = -1
        best_d = eps
        for i, w in enumerate(self.words):
            d = word_distance(value, w)
            if d < best_d:
                best_d = d
                best_i = i
        if best_i < 0:
            new_words = self.words + (CodeWord(value, value, value, 1),)
        else:
            new_words = tuple(
                w.absorb(value) if i == best_i else w for i, w in enumerate(self.words)
            )
        return FeatureCodeBook(self.feature_index, new_words)


@dataclass(frozen=True)
class ContextCodeBookModel:
    """Six feature code-books jointly describing one context."""

    books: tuple
    support_frames: int

    def __post_init__(self):
        object.__setattr__(self, "books", tuple(self.books))
        if len(self.books) != N_FEATURES:
            raise ValueError(f"model needs {N_FEATURES} books, got {len(self.books)}")

    def word_counts(self) -> list[int]:
        return [len(b.words) for b in self.books]


def empty_model() -> ContextCodeBookModel:
    return ContextCodeBookModel(tuple(FeatureCodeBook(k) for k in range(N_FEATURES)), 0)


def update_model(model: ContextCodeBookModel, chunk: ContextChunk, eps: float) -> ContextCodeBookModel:
    """Fold a chunk's present feature values into the model, frame by frame."""
    books = list(model.books)
    for k in range(N_FEATURES):
        book = books[k]
        for value in chunk.feature_values(k):
            book = book.update(float(value), eps)
        books[k] = book
    return ContextCodeBookModel(tuple(books), model.support_frames + len(chunk))


def build_model(chunk: ContextChunk, eps: float) -> ContextCodeBookModel:
    """Quantize one chunk into a fresh code-book model."""
    if len(chunk) == 0:
        raise ValueError("cannot build a model from an empty chunk")
    return update_model(empty_model(), chunk, eps)


def distance_from_values(values_by_feature: list[np.ndarray],
                         model: ContextCodeBookModel, eps: float) -> float:
    """Context distance over per-feature value arrays (absent values omitted).

    Features absent on both sides are skipped; a feature present on exactly
    one side is a full mismatch and forces distance 1. A feature matching
    fewer than half its values also forces distance 1.
    """
    count_total = 0
    present_total = 0
    for k in range(N_FEATURES):
        values = values_by_feature[k]
        means = model.books[k].means()
        chunk_has = values.size > 0
        model_has = means.size > 0
        if not chunk_has and not model_has:
            continue
        if chunk_has != model_has:
            return 1.0
        count = _kernels.match_count(np.ascontiguousarray(values, dtype=np.float64), means, eps)
        if count / values.size < 0.5:
            return 1.0
        count_total += count
        present_total += values.size
    if present_total == 0:
        return 0.0
    return 1.0 - count_total / present_total


def context_distance(chunk: ContextChunk, model: ContextCodeBookModel, eps: float) -> float:
    """Distance in [0, 1] between a chunk of frames and a code-book model."""
    if len(chunk) == 0:
        raise ValueError("cannot measure an empty chunk")
    return distance_from_values(chunk.values_by_feature(), model, eps)


# serialization used by the learned-database file

def book_to_record(book: FeatureCodeBook) -> list[dict]:
    return [{"mean": w.mean, "min": w.vmin, "max": w.vmax, "freq": w.freq} for w in book.words]


def model_to_record(model: ContextCodeBookModel) -> dict:
    return {
        "supportFrames": model.support_frames,
        "books": [book_to_record(b) for b in model.books],
    }


def model_from_record(rec: dict) -> ContextCodeBookModel:
    books = []
    for k, words in enumerate(rec["books"]):
        books.append(FeatureCodeBook(
            feature_index=k,
            words=tuple(CodeWord(w["mean"], w["min"], w["max"], int(w["freq"])) for w in words),
        ))
    return ContextCodeBookModel(tuple(books), int(rec["supportFrames"]))
