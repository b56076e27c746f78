"""Mask refiners: oracle, probability flood fill, and an external adapter.

Refiners see only the clicks and the probability map, never the predicted
mask. The external adapter shells out over a file-exchange protocol so
heavyweight refiners stay out of process.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
from scipy import ndimage

from .core import BinaryMask, Click, ProbabilityMap, ValidationError
from .formats import load_binary_mask_pgm, save_probability_map
from .interactions import FOUR_CONNECTED

log = logging.getLogger(__name__)


class RefinerError(RuntimeError):
    pass


class ExternalRefinerError(RefinerError):
    """The external process failed, timed out, or answered garbage."""


@dataclass(frozen=True)
class RefinerRequest:
    frame: int
    object: int
    clicks: List[Click]
    probability: ProbabilityMap
    ground_truth: Optional[BinaryMask] = None

    def __post_init__(self):
        if not self.clicks:
            raise ValidationError("refiner request needs at least one click")
        h, w = self.probability.height, self.probability.width
        for c in self.clicks:
            if not c.in_bounds(h, w):
                raise ValidationError(f"click ({c.row}, {c.col}) outside {h}x{w} frame")


class OracleRefiner:
    """Upper-bound stand-in: returns the ground-truth mask verbatim."""

    name = "oracle"

    def refine(self, req: RefinerRequest) -> BinaryMask:
        if req.ground_truth is None:
            raise RefinerError("oracle refiner needs a ground-truth mask")
        return req.ground_truth


class FloodRefiner:
    """Desk-scale refiner: flood fill over the clicked object's probability.

    Positive clicks grow 4-connected regions where the object probability
    clears the threshold; negative clicks delete the component of the mask
    built so far that contains them. A positive click on a sub-threshold
    pixel contributes nothing (logged, not fatal).
    """

    name = "flood"

    def __init__(self, threshold: float = 0.5):
        if not 0.0 < threshold < 1.0:
            raise ValidationError("flood threshold must be in (0, 1)")
        self.threshold = threshold

    def refine(self, req: RefinerRequest) -> BinaryMask:
        prob = req.probability
        if req.object >= prob.num_classes:
            raise RefinerError(f"object {req.object} not in probability map (C={prob.num_classes})")
        support = prob.values[:, :, req.object] >= self.threshold
        labeled, _ = ndimage.label(support, structure=FOUR_CONNECTED)
        mask = np.zeros(support.shape, dtype=bool)
        for click in req.clicks:
            if click.polarity != "positive":
                continue
            comp = labeled[click.row, click.col]
            if comp == 0:
                log.info(
                    "positive click at (%d, %d) below threshold %.3g; skipped",
                    click.row, click.col, self.threshold,
                )
                continue
            mask |= labeled == comp
        for click in req.clicks:
            if click.polarity != "negative":
                continue
            current, _ = ndimage.label(mask, structure=FOUR_CONNECTED)
            comp = current[click.row, click.col]
            if comp != 0:
                mask &= current != comp
        return BinaryMask(mask)


class ExternalRefiner:
    """Adapter for an out-of-process refiner.

    Per request it writes ``req_<frame>_<object>.json`` (clicks plus the
    path of a ZIVP probability dump) into the exchange directory, runs the
    configured command with ``{req}``/``{resp}`` substituted, and reads the
    answer from ``resp_<frame>_<object>.pgm``.
    """

    name = "external"

    def __init__(self, command_template: str, exchange_dir, timeout: float = 30.0):
        if "{req}" not in command_template or "{resp}" not in command_template:
            raise ValidationError("command template needs {req} and {resp} placeholders")
        self.command_template = command_template
        self.exchange_dir = Path(exchange_dir)
        self.timeout = timeout

    def refine(self, req: RefinerRequest) -> BinaryMask:
        self.exchange_dir.mkdir(parents=True, exist_ok=True)
        stem = f"{req.frame}_{req.object}"
        prob_path = self.exchange_dir / f"prob_{stem}.zivp"
        req_path = self.exchange_dir / f"req_{stem}.json"
        resp_path = self.exchange_dir / f"resp_{stem}.pgm"
        save_probability_map(req.probability, prob_path)
        req_path.write_text(
            json.dumps(
                {
                    "frame": req.frame,
                    "object": req.object,
                    "clicks": [
                        {"row": c.row, "col": c.col, "polarity": c.polarity} for c in req.clicks
                    ],
                    "prob": str(prob_path),
                }
            )
        )
        command = [
            part.replace("{req}", str(req_path)).replace("{resp}", str(resp_path))
            for part in shlex.split(self.command_template)
        ]
        try:
            result = subprocess.run(
                command, capture_output=True, timeout=self.timeout, check=False
            )
        except subprocess.TimeoutExpired as exc:
            raise ExternalRefinerError(f"refiner timed out after {self.timeout}s") from exc
        if result.returncode != 0:
            raise ExternalRefinerError(
                f"refiner exited {result.returncode}: {result.stderr.decode(errors='replace')[:500]}"
            )
        if not resp_path.exists():
            raise ExternalRefinerError(f"refiner produced no response at {resp_path}")
        try:
            mask = load_binary_mask_pgm(resp_path)
        except ValueError as exc:
            raise ExternalRefinerError(f"malformed response: {exc}") from exc
        expected = (req.probability.height, req.probability.width)
        if (mask.height, mask.width) != expected:
            raise ExternalRefinerError(
                f"response is {mask.height}x{mask.width}, expected {expected[0]}x{expected[1]}"
            )
        return mask


def build_refiner(name: str, params: Optional[dict] = None):
    params = dict(params or {})
    if name == "oracle":
        return OracleRefiner()
    if name == "flood":
        return FloodRefiner(threshold=float(params.get("threshold", 0.5)))
    if name == "external":
        return ExternalRefiner(
            command_template=params["command"],
            exchange_dir=params.get("exchange_dir", "refiner_exchange"),
            timeout=float(params.get("timeout", 30.0)),
        )
    raise ValidationError(f"unknown refiner '{name}'")
