"""Core domain types shared by every stage of the pipeline.

All types are immutable after construction (arrays are frozen with
``setflags(write=False)``), so instances can be shared freely across
threads and episodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

# Per-pixel probability sums must match 1 within this absolute tolerance;
# anything looser is rejected rather than renormalized so exporter bugs
# surface early.
PROB_SUM_TOL = 1e-4

POLARITIES = ("positive", "negative")
CLICK_ORIGINS = ("init", "pseudo", "user")


class ValidationError(ValueError):
    """An in-memory value violates a structural invariant."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-pixel categorical distribution over classes (class 0 = background).

    ``values`` has shape (H, W, C), float32, each pixel summing to 1.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 3:
            raise ValidationError(f"probability map must be (H, W, C), got shape {v.shape}")
        if v.shape[2] < 1:
            raise ValidationError("probability map needs at least one class")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValidationError("probability values outside [0, 1]")
        sums = v.sum(axis=2, dtype=np.float64)
        if v.size and np.abs(sums - 1.0).max() > PROB_SUM_TOL:
            worst = float(np.abs(sums - 1.0).max())
            raise ValidationError(f"per-pixel probabilities do not sum to 1 (max deviation {worst:.2e})")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def num_classes(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class LabelMask:
    """Integer class id per pixel."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValidationError(f"label mask must be 2-D, got shape {lab.shape}")
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValidationError("labels must be integers")
        if lab.size and lab.min() < 0:
            raise ValidationError("negative class id")
        object.__setattr__(self, "labels", _freeze(lab.astype(np.int32)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """Boolean object mask (True = object)."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2:
            raise ValidationError(f"binary mask must be 2-D, got shape {b.shape}")
        object.__setattr__(self, "bits", _freeze(b.astype(bool)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()


@dataclass(frozen=True)
class Click:
    """A single point interaction on one frame of one object."""

    frame: int
    object: int
    row: int
    col: int
    polarity: str
    origin: str

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValidationError(f"polarity must be one of {POLARITIES}")
        if self.origin not in CLICK_ORIGINS:
            raise ValidationError(f"origin must be one of {CLICK_ORIGINS}")
        if self.row < 0 or self.col < 0:
            raise ValidationError("click coordinates must be non-negative")

    def in_bounds(self, height: int, width: int) -> bool:
        return 0 <= self.row < height and 0 <= self.col < width

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "object": self.object,
            "row": self.row,
            "col": self.col,
            "polarity": self.polarity,
            "origin": self.origin,
        }


@dataclass(frozen=True)
class FrameEntry:
    """Paths of the artifacts for one frame, resolved against the manifest."""

    prob: Path
    gt: Path
    image: Optional[Path] = None


@dataclass(frozen=True)
class SequenceManifest:
    """Describes one sequence: ordered frame artifacts plus the tracked objects."""

    name: str
    object_ids: tuple
    frame_entries: tuple
    fps: Optional[float] = None

    def __post_init__(self):
        if not self.frame_entries:
            raise ValidationError("manifest has no frames")
        if not self.object_ids:
            raise ValidationError("manifest has no objects")
        ids = list(self.object_ids)
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate object ids")
        if any(int(o) <= 0 for o in ids):
            raise ValidationError("object ids must be positive")
        if self.fps is not None and not self.fps > 0:
            raise ValidationError("fps must be > 0")
        object.__setattr__(self, "object_ids", tuple(int(o) for o in ids))
        object.__setattr__(self, "frame_entries", tuple(self.frame_entries))

    @property
    def num_frames(self) -> int:
        return len(self.frame_entries)


def argmax_labels(prob: ProbabilityMap) -> LabelMask:
    """Predicted class per pixel; ties break toward the lowest class id."""
    # np.argmax returns the first maximum, which is the lowest class id.
    return LabelMask(np.argmax(prob.values, axis=2).astype(np.int32))


def extract_object_mask(labels: LabelMask, object_id: int) -> BinaryMask:
    """Binary mask of one object; all-False when the object is absent."""
    if object_id < 1:
        raise ValidationError("object ids start at 1 (0 is background)")
    return BinaryMask(labels.labels == object_id)
