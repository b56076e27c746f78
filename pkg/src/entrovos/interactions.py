"""Click generation: automatic pseudo-corrections and the simulated user.

A pseudo-correction picks the pixel inside the dilated predicted mask that
maximizes distance-to-boundary times confidence (1 - entropy): deep inside
the prediction and away from ambiguous areas. The simulated user instead
compares against ground truth and clicks the snapped centroid of the
largest misclassified connected component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

import numpy as np
from scipy import ndimage

from .core import BinaryMask, Click, ValidationError
from .uncertainty import EntropyMap

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class NoValidSiteError(ValueError):
    """No pixel qualifies for a pseudo-correction."""


class NoMisclassificationError(ValueError):
    """Prediction and ground truth agree; there is nothing to correct."""


@dataclass(frozen=True)
class DistanceField:
    """Euclidean distance of every pixel to the nearest mask-boundary pixel."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MisclassifiedRegion:
    pixels: Tuple[Tuple[int, int], ...]
    kind: str  # "false_negative" | "false_positive"
    size: int


def boundary_mask(mask: BinaryMask) -> np.ndarray:
    """Mask pixels with at least one False or out-of-bounds 4-neighbor."""
    bits = mask.bits
    if not bits.any():
        return np.zeros_like(bits)
    interior = ndimage.binary_erosion(bits, structure=FOUR_CONNECTED, border_value=0)
    return bits & ~interior


def boundary_set(mask: BinaryMask) -> Set[Tuple[int, int]]:
    rows, cols = np.nonzero(boundary_mask(mask))
    return {(int(r), int(c)) for r, c in zip(rows, cols)}


def distance_field(mask: BinaryMask) -> DistanceField:
    """Exact Euclidean distance transform to the mask boundary, full frame."""
    if mask.is_empty():
        raise ValidationError("distance field of an empty mask: no boundary exists")
    boundary = boundary_mask(mask)
    distances = ndimage.distance_transform_edt(~boundary)
    return DistanceField(np.asarray(distances, dtype=np.float64))


def pseudo_click(
    dilated: BinaryMask,
    field: DistanceField,
    entropy: EntropyMap,
    frame: int,
    object_id: int,
) -> Click:
    """Positive click maximizing dilated * distance * (1 - entropy).

    Ties break toward the lowest row-major index. Raises
    :class:`NoValidSiteError` when the product vanishes everywhere.
    """
    if dilated.is_empty():
        raise NoValidSiteError("dilated mask is empty")
    if dilated.bits.shape != field.values.shape or dilated.bits.shape != entropy.values.shape:
        raise ValidationError("pseudo_click inputs must share one shape")
    product = dilated.bits * field.values * (1.0 - entropy.values)
    flat = int(np.argmax(product))
    if product.flat[flat] <= 0.0:
        raise NoValidSiteError("all candidate sites scored zero")
    row, col = divmod(flat, dilated.width)
    return Click(frame=frame, object=object_id, row=row, col=col, polarity="positive", origin="pseudo")


def _components(bits: np.ndarray, kind: str) -> List[MisclassifiedRegion]:
    labeled, count = ndimage.label(bits, structure=FOUR_CONNECTED)
    regions = []
    for k in range(1, count + 1):
        rows, cols = np.nonzero(labeled == k)
        pixels = tuple((int(r), int(c)) for r, c in zip(rows, cols))
        regions.append(MisclassifiedRegion(pixels=pixels, kind=kind, size=len(pixels)))
    return regions


def largest_misclassified_component(pred: BinaryMask, gt: BinaryMask) -> MisclassifiedRegion:
    """Largest 4-connected component of the prediction error.

    False negatives and false positives are labeled separately so each
    component has a single kind. Ties prefer false negatives, then the
    lowest row-major anchor pixel.
    """
    if pred.bits.shape != gt.bits.shape:
        raise ValidationError("pred/gt shape mismatch")
    fn = gt.bits & ~pred.bits
    fp = pred.bits & ~gt.bits
    regions = _components(fn, "false_negative") + _components(fp, "false_positive")
    if not regions:
        raise NoMisclassificationError("prediction matches ground truth")

    def rank(region: MisclassifiedRegion):
        anchor = min(region.pixels)
        return (-region.size, 0 if region.kind == "false_negative" else 1, anchor)

    return min(regions, key=rank)


def snap_centroid(pixels: np.ndarray) -> Tuple[int, int]:
    """Pixel of the set nearest its exact centroid; ties take the lowest
    row-major coordinate. ``pixels`` is an (N, 2) row/col array in
    row-major order."""
    centroid = pixels.mean(axis=0)
    d2 = ((pixels - centroid) ** 2).sum(axis=1)
    return tuple(int(v) for v in pixels[int(np.argmin(d2))])


def mask_snap_centroid(mask: BinaryMask) -> Tuple[int, int]:
    rows, cols = np.nonzero(mask.bits)
    if rows.size == 0:
        raise ValidationError("centroid of an empty mask")
    return snap_centroid(np.stack([rows, cols], axis=1))


def simulated_user_click(
    pred: BinaryMask, gt: BinaryMask, frame: int, object_id: int
) -> Optional[Click]:
    """Click the snapped centroid of the largest misclassified component.

    Positive for a missed region, negative for a spurious one. Returns None
    when prediction and ground truth already agree (a satisfied user).
    """
    try:
        region = largest_misclassified_component(pred, gt)
    except NoMisclassificationError:
        return None
    row, col = snap_centroid(np.asarray(region.pixels))
    polarity = "positive" if region.kind == "false_negative" else "negative"
    return Click(frame=frame, object=object_id, row=row, col=col, polarity=polarity, origin="user")


def gt_centroid_click(gt: BinaryMask, frame: int, object_id: int) -> Optional[Click]:
    """Positive click at the ground-truth snapped centroid; None when absent."""
    if gt.is_empty():
        return None
    row, col = mask_snap_centroid(gt)
    return Click(frame=frame, object=object_id, row=row, col=col, polarity="positive", origin="user")
