"""Tracking-state proxy: normalized entropy maps and masked region entropy.

Per-pixel entropy is Shannon entropy of the class distribution divided by
log(num_classes), so values live in [0, 1] whatever the class count. The
per-object summary is the mean entropy over the object mask dilated by a
small disk: the dilation keeps the uncertain band just outside the
predicted edge inside the region instead of truncating it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import xlogy

from .core import BinaryMask, ProbabilityMap, ValidationError

DEFAULT_DILATION_RADIUS = 2


@dataclass(frozen=True)
class EntropyMap:
    """Per-pixel normalized entropy in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError(f"entropy map must be 2-D, got shape {v.shape}")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValidationError("entropy values outside [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RegionEntropy:
    """Size-normalized entropy of one object region.

    ``absent`` marks an empty region (object not predicted at all), which is
    distinct from a confident (low-entropy) prediction.
    """

    value: float
    region_size: int
    absent: bool = False

    def __post_init__(self):
        if self.absent and (self.value != 0.0 or self.region_size != 0):
            raise ValidationError("absent region must have value 0 and size 0")
        if self.value < 0.0:
            raise ValidationError("region entropy must be >= 0")


def entropy_map(prob: ProbabilityMap) -> EntropyMap:
    """Normalized per-pixel entropy of a probability map.

    0*log(0) counts as 0; a single-class map is deterministic, so the
    degenerate log(1) normalization is defined as all-zero.
    """
    c = prob.num_classes
    if c == 1:
        return EntropyMap(np.zeros((prob.height, prob.width), dtype=np.float64))
    p = prob.values.astype(np.float64)
    raw = -xlogy(p, p).sum(axis=2)
    values = raw / math.log(c)
    # Guard against last-ulp drift; exact zeros/ones pass through unchanged.
    np.clip(values, 0.0, 1.0, out=values)
    return EntropyMap(values)


def disk_offsets(radius: int) -> np.ndarray:
    """Boolean (2r+1)^2 footprint of offsets with i^2 + j^2 <= r^2."""
    if radius < 0:
        raise ValidationError("radius must be >= 0")
    span = np.arange(-radius, radius + 1)
    ii, jj = np.meshgrid(span, span, indexing="ij")
    return (ii * ii + jj * jj) <= radius * radius


def dilate_mask(mask: BinaryMask, radius: int) -> BinaryMask:
    """Binary dilation with a disk; out-of-bounds neighbors count as False."""
    if radius == 0 or mask.is_empty():
        return mask
    dilated = ndimage.binary_dilation(mask.bits, structure=disk_offsets(radius))
    return BinaryMask(dilated)


def region_entropy(entropy: EntropyMap, region: BinaryMask) -> RegionEntropy:
    """Mean entropy over the region; flagged absent when the region is empty.

    The sum is exact (fsum), so the value is independent of pixel chunking.
    """
    if (entropy.height, entropy.width) != (region.height, region.width):
        raise ValidationError(
            f"shape mismatch: entropy {entropy.values.shape} vs region {region.bits.shape}"
        )
    size = region.area
    if size == 0:
        return RegionEntropy(0.0, 0, absent=True)
    total = math.fsum(entropy.values[region.bits].tolist())
    return RegionEntropy(total / size, size)


def entropy_to_grid(entropy: EntropyMap) -> np.ndarray:
    """Single-channel (H, W, 1) float grid, for ZIVP export."""
    return entropy.values.astype(np.float32)[:, :, None]
