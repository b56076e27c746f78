"""Accuracy, robustness, and user-workload metrics.

Accuracy is the usual pairing of region similarity (IoU) and a boundary
F-measure. Robustness R@tau is the fraction of frames segmented at or
above an IoU threshold, where correctly predicting that the object is gone
also counts as a success. Workload is measured three ways: the raw number
of user corrections (NoC), the mean time between interactions in seconds
(IDI, counting sequence start and end as interactions), and a cumulative
interaction score (ACI) that grows when corrections cluster close
together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy import stats

from .core import BinaryMask, ValidationError
from .interactions import boundary_mask

DEFAULT_R_AT_TAUS = (0.1, 0.25, 0.5)


class ConstantSeriesError(ValueError):
    """Rank correlation is undefined for a constant series."""


@dataclass(frozen=True)
class ObjectFrameRecord:
    frame: int
    pred: BinaryMask
    gt: BinaryMask
    gt_present: bool
    iou: float
    s_r: float
    user_prompted: bool = False
    pseudo_issued: bool = False


def make_record(
    frame: int,
    pred: BinaryMask,
    gt: BinaryMask,
    s_r: float,
    user_prompted: bool = False,
    pseudo_issued: bool = False,
) -> ObjectFrameRecord:
    return ObjectFrameRecord(
        frame=frame,
        pred=pred,
        gt=gt,
        gt_present=not gt.is_empty(),
        iou=iou(pred, gt),
        s_r=s_r,
        user_prompted=user_prompted,
        pseudo_issued=pseudo_issued,
    )


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    if pred.bits.shape != gt.bits.shape:
        raise ValidationError("iou: shape mismatch")
    union = int(np.count_nonzero(pred.bits | gt.bits))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(pred.bits & gt.bits))
    return inter / union


def default_boundary_tolerance(height: int, width: int) -> int:
    return int(math.ceil(0.008 * math.hypot(height, width)))


def boundary_f(pred: BinaryMask, gt: BinaryMask, tolerance: Optional[int] = None) -> float:
    """Boundary F-measure with a pixel tolerance.

    Precision: fraction of predicted boundary pixels within ``tolerance``
    of some ground-truth boundary pixel; recall symmetric.
    """
    if pred.bits.shape != gt.bits.shape:
        raise ValidationError("boundary_f: shape mismatch")
    if tolerance is None:
        tolerance = default_boundary_tolerance(pred.height, pred.width)
    pb = boundary_mask(pred)
    gb = boundary_mask(gt)
    pb_any = bool(pb.any())
    gb_any = bool(gb.any())
    if not pb_any and not gb_any:
        return 1.0
    if not pb_any or not gb_any:
        return 0.0
    dist_to_g = ndimage.distance_transform_edt(~gb)
    dist_to_p = ndimage.distance_transform_edt(~pb)
    precision = float(np.mean(dist_to_g[pb] <= tolerance))
    recall = float(np.mean(dist_to_p[gb] <= tolerance))
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _frame_success(rec: ObjectFrameRecord, tau: float) -> int:
    if rec.gt_present:
        return 1 if rec.iou >= tau else 0
    return 1 if rec.pred.is_empty() else 0


def robustness_at(records_per_object: Dict[int, List[ObjectFrameRecord]], tau: float) -> float:
    """Mean over objects of the per-object success-frame ratio at ``tau``."""
    if not records_per_object:
        raise ValidationError("robustness_at: no records")
    ratios = []
    for records in records_per_object.values():
        if not records:
            raise ValidationError("robustness_at: object with no frames")
        ratios.append(sum(_frame_success(r, tau) for r in records) / len(records))
    return float(np.mean(ratios))


def noc(records_per_object: Dict[int, List[ObjectFrameRecord]]) -> int:
    """Total user corrections issued; the initialization does not count."""
    return sum(
        sum(1 for r in records if r.user_prompted) for records in records_per_object.values()
    )


def _prompt_frames(records: List[ObjectFrameRecord]) -> List[int]:
    return [r.frame for r in records if r.user_prompted]


def idi(records_per_object: Dict[int, List[ObjectFrameRecord]], fps: float) -> float:
    """Mean seconds between interactions, counting start and end of the
    sequence as interactions so prompt-free sequences still score."""
    if not fps > 0:
        raise ValidationError("idi needs fps > 0")
    per_object = []
    for records in records_per_object.values():
        if len(records) < 2:
            raise ValidationError("idi needs at least two frames")
        last = max(r.frame for r in records)
        points = sorted({0, last, *_prompt_frames(records)})
        gaps = np.diff(points)
        per_object.append(float(np.mean(gaps)) / fps)
    return float(np.mean(per_object))


def _aci_for_gaps(gaps: Sequence[int], num_frames: int) -> float:
    # Integer numerator first, single division: each gap g <= F adds F - g + 1.
    total = sum(num_frames - g + 1 for g in gaps if g <= num_frames)
    return total / num_frames


def aci(
    records_per_object: Dict[int, List[ObjectFrameRecord]],
    include_boundaries: bool = False,
) -> float:
    """Cumulative interaction score; summed over objects.

    Close-together corrections contribute for more of the sequence, so
    bursts raise the score while spread-out prompts barely move it.
    """
    total = 0.0
    for records in records_per_object.values():
        num_frames = len(records)
        prompts = _prompt_frames(records)
        if include_boundaries:
            last = max(r.frame for r in records)
            prompts = sorted({0, last, *prompts})
        gaps = [b - a for a, b in zip(prompts, prompts[1:])]
        total += _aci_for_gaps(gaps, num_frames)
    return total


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation with average ranks for ties."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError("spearman needs two equal-length 1-D series")
    if xs.size < 2:
        raise ValidationError("spearman needs at least two samples")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise ConstantSeriesError("correlation undefined for a constant series")
    rho = stats.spearmanr(xs, ys).statistic
    return float(rho)


def tracking_proxy_rho(s_r_series: Sequence[float], iou_series: Sequence[float]) -> float:
    """Sign-flipped rank correlation between uncertainty and IoU, so that
    values near +1 mean the uncertainty tracks segmentation quality."""
    return -spearman(s_r_series, iou_series)


# --- per-object / aggregate report -------------------------------------------


def object_metrics(
    records: List[ObjectFrameRecord],
    r_at_taus: Sequence[float] = DEFAULT_R_AT_TAUS,
    fps: Optional[float] = None,
    boundary_tolerance: Optional[int] = None,
    aci_include_boundaries: bool = False,
) -> dict:
    """All per-object numbers used in reports. J and F average over frames
    where the object is actually present."""
    present = [r for r in records if r.gt_present]
    if present:
        j_mean = float(np.mean([r.iou for r in present]))
        f_mean = float(
            np.mean([boundary_f(r.pred, r.gt, tolerance=boundary_tolerance) for r in present])
        )
        jf = (j_mean + f_mean) / 2.0
    else:
        j_mean = f_mean = jf = None
    one = {1: records}
    out = {
        "jf": jf,
        "j": j_mean,
        "f": f_mean,
        "r_at": {f"{tau:g}": robustness_at(one, tau) for tau in r_at_taus},
        "noc": noc(one),
        "aci": aci(one, include_boundaries=aci_include_boundaries),
    }
    if fps is not None and len(records) >= 2:
        out["idi_seconds"] = idi(one, fps)
    try:
        out["spearman_rho"] = tracking_proxy_rho(
            [r.s_r for r in records], [r.iou for r in records]
        )
    except (ConstantSeriesError, ValidationError):
        out["spearman_rho"] = None
    return out


def _mean_defined(values: List[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


def aggregate_metrics(per_object: List[dict], r_at_taus: Sequence[float]) -> dict:
    """Dataset-level summary: rates average over objects, counts add up."""
    return {
        "jf": _mean_defined([o.get("jf") for o in per_object]),
        "j": _mean_defined([o.get("j") for o in per_object]),
        "f": _mean_defined([o.get("f") for o in per_object]),
        "r_at": {
            f"{tau:g}": _mean_defined([o["r_at"][f"{tau:g}"] for o in per_object])
            for tau in r_at_taus
        },
        "noc": sum(o["noc"] for o in per_object),
        "aci": float(sum(o["aci"] for o in per_object)),
        "idi_seconds": _mean_defined([o.get("idi_seconds") for o in per_object]),
        "spearman_rho": _mean_defined([o.get("spearman_rho") for o in per_object]),
    }
