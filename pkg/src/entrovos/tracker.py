"""Trackers: replayed probability maps and a controllable synthetic scene.

The synthetic tracker keeps a parametric belief (a disk or rectangle that
follows the true object plus an accumulated drift offset) and renders a
two-class probability map from it each frame:

    p_object(x) = logistic(slope * sd_belief(x) * support(x) / temperature)

where ``sd_belief`` is the signed distance to the belief boundary
(positive inside) and ``support`` in (0, 1] measures how strongly the
scene appearance agrees with the belief's labeling at that pixel. Where
both cues concur the transition is sharp and confident; where the belief
has drifted off the object (or covers something the appearance disowns)
probabilities hover near 0.5 and the entropy rises. The argmax mask is
always exactly the belief region (support only rescales the slope, never
flips the sign), so geometric overlap with the ground truth stays
analytically checkable.

Scenario kinds:

* ``drift`` — the belief slides off the object at ``drift_rate`` px/frame;
* ``distractor`` — a second identical object crosses the scene; around
  ``event_frame`` the tracker's support collapses (a mild dip first, then a
  deep one) and, unless a refined mask was stored during that window, the
  belief locks onto the distractor afterwards;
* ``occlusion`` — the object's probability mass is zeroed for a span of
  frames while the drift keeps accumulating, so reappearance is both
  abrupt and misaligned.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from .core import BinaryMask, ProbabilityMap, SequenceManifest, FrameEntry, ValidationError
from .formats import load_probability_map, save_image_pgm, save_manifest, save_mask_pgm, write_zivp
from .core import LabelMask
from .policy import MemoryDirective

SCENARIO_KINDS = ("drift", "distractor", "occlusion")


class TrackerError(RuntimeError):
    pass


class OutOfOrderError(TrackerError):
    pass


class EndOfSequenceError(TrackerError):
    pass


@dataclass(frozen=True)
class TrackerStepResult:
    probability: ProbabilityMap
    frame: int


class ReplayTracker:
    """Serves pre-exported probability maps; memory directives only log."""

    def __init__(self, manifest: SequenceManifest):
        self.manifest = manifest
        self._last_frame = -1
        self.directives: List[Tuple[int, MemoryDirective]] = []

    def step(self, frame: int) -> TrackerStepResult:
        if frame <= self._last_frame:
            raise OutOfOrderError(f"frame {frame} after frame {self._last_frame}")
        if frame >= self.manifest.num_frames:
            raise EndOfSequenceError(f"frame {frame} beyond {self.manifest.num_frames} frames")
        self._last_frame = frame
        prob = load_probability_map(self.manifest.frame_entries[frame].prob)
        return TrackerStepResult(probability=prob, frame=frame)

    def apply(self, directive: MemoryDirective, refined: Optional[BinaryMask], frame: int) -> None:
        if directive is MemoryDirective.STORE_REFINED and refined is None:
            raise TrackerError("StoreRefined without a refined mask")
        self.directives.append((frame, directive))


@dataclass(frozen=True)
class SyntheticScenario:
    kind: str
    frames: int = 80
    height: int = 64
    width: int = 64
    shape: str = "disk"  # "disk" | "rect"
    size: float = 9.5  # disk radius, or rect half-extent
    start: Tuple[float, float] = (32.0, 32.0)
    velocity: Tuple[float, float] = (0.04, 0.06)
    drift_rate: float = 0.2
    drift_direction: Optional[Tuple[float, float]] = None  # unit vector; seeded if None
    event_frame: int = 40
    occlusion_span: int = 12
    temperature: float = 1.5
    seed: int = 42
    # Field-shape constants: base boundary sharpness, the residual support
    # where appearance gives no evidence, and the support collapse factors
    # for the distractor's approach and capture frames.
    slope: float = 3.0
    support_floor: float = 0.15
    approach_support: float = 0.25
    event_support: float = 0.05
    distractor_offset: Tuple[float, float] = (20.0, 20.0)

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValidationError(f"kind must be one of {SCENARIO_KINDS}")
        if self.frames < 2:
            raise ValidationError("need at least 2 frames")
        if not 0 <= self.event_frame < self.frames:
            raise ValidationError("event_frame must fall inside the sequence")
        if self.shape not in ("disk", "rect"):
            raise ValidationError("shape must be 'disk' or 'rect'")
        if not self.temperature > 0:
            raise ValidationError("temperature must be > 0")

    @property
    def approach_frame(self) -> int:
        return self.event_frame // 2

    def drift_unit(self) -> np.ndarray:
        if self.drift_direction is not None:
            v = np.asarray(self.drift_direction, dtype=np.float64)
            n = float(np.hypot(*v))
            if n == 0:
                raise ValidationError("drift_direction must be nonzero")
            return v / n
        angle = np.random.default_rng(self.seed).uniform(0.0, 2.0 * math.pi)
        return np.array([math.sin(angle), math.cos(angle)])

    def target_center(self, frame: int) -> np.ndarray:
        return np.asarray(self.start, dtype=np.float64) + frame * np.asarray(
            self.velocity, dtype=np.float64
        )

    def distractor_center(self, frame: int) -> np.ndarray:
        return self.target_center(frame) + np.asarray(self.distractor_offset, dtype=np.float64)

    def occluded(self, frame: int) -> bool:
        return self.kind == "occlusion" and (
            self.event_frame <= frame < self.event_frame + self.occlusion_span
        )

    def signed_distance(self, center: np.ndarray) -> np.ndarray:
        """Signed distance to the shape boundary at ``center``; + inside."""
        rows = np.arange(self.height, dtype=np.float64)[:, None]
        cols = np.arange(self.width, dtype=np.float64)[None, :]
        dr = rows - center[0]
        dc = cols - center[1]
        if self.shape == "disk":
            return self.size - np.hypot(dr, dc)
        qr = np.abs(dr) - self.size
        qc = np.abs(dc) - self.size
        outside = np.hypot(np.maximum(qr, 0.0), np.maximum(qc, 0.0))
        inside = np.minimum(np.maximum(qr, qc), 0.0)
        return -(outside + inside)

    def gt_mask(self, frame: int) -> BinaryMask:
        if self.occluded(frame):
            return BinaryMask(np.zeros((self.height, self.width), dtype=bool))
        return BinaryMask(self.signed_distance(self.target_center(frame)) > 0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticScenario":
        doc = dict(doc)
        for key in ("start", "velocity", "distractor_offset"):
            if key in doc and doc[key] is not None:
                doc[key] = tuple(doc[key])
        if doc.get("drift_direction") is not None:
            doc["drift_direction"] = tuple(doc["drift_direction"])
        return cls(**doc)


class SyntheticTracker:
    """Closed-loop tracker over a synthetic scenario.

    Memory directives have real consequences: storing a refined mask
    re-anchors the belief to it (drift accumulator resets), skipping an
    update compounds the drift rate by 1.5x until the next store, and
    storing the original resets that staleness.
    """

    def __init__(self, scenario: SyntheticScenario):
        self.scenario = scenario
        self._drift_unit = scenario.drift_unit()
        self._offset = np.zeros(2, dtype=np.float64)
        self._staleness = 1.0
        self._lock = "target"
        self._last_frame = -1
        self._last_refined_frame = -10**9
        self._capture_resolved = scenario.kind != "distractor"
        self._belief_override: Optional[BinaryMask] = None

    @property
    def staleness(self) -> float:
        return self._staleness

    @property
    def lock(self) -> str:
        return self._lock

    @property
    def drift_offset(self) -> np.ndarray:
        return self._offset.copy()

    def _lock_center(self, frame: int) -> np.ndarray:
        if self._lock == "distractor":
            return self.scenario.distractor_center(frame)
        return self.scenario.target_center(frame)

    def belief_center(self, frame: int) -> np.ndarray:
        return self._lock_center(frame) + self._offset

    def current_belief_mask(self) -> BinaryMask:
        if self._belief_override is not None:
            return self._belief_override
        frame = max(self._last_frame, 0)
        return BinaryMask(self.scenario.signed_distance(self.belief_center(frame)) > 0.0)

    def _support(self, frame: int, belief_sd: np.ndarray) -> np.ndarray:
        """Per-pixel slope scale: how strongly the scene appearance agrees
        with the belief's labeling there. Confident only where both cues
        say object or both say background; conflicts and unsupported belief
        drop toward the floor, which is what pushes probabilities to 0.5
        and entropy up exactly where tracking has gone wrong."""
        sc = self.scenario
        appearance = expit(sc.slope * sc.signed_distance(sc.target_center(frame)) / sc.temperature)
        if sc.kind == "distractor":
            distractor = expit(
                sc.slope * sc.signed_distance(sc.distractor_center(frame)) / sc.temperature
            )
            appearance = np.maximum(appearance, distractor)
        agreement = np.where(belief_sd >= 0.0, appearance, 1.0 - appearance)
        support = sc.support_floor + (1.0 - sc.support_floor) * agreement
        if sc.kind == "distractor":
            # Matching ambiguity between the two identical objects collapses
            # the whole support, floor included: mildly on approach, almost
            # completely at the capture attempt.
            if frame == sc.approach_frame:
                support = support * sc.approach_support
            elif frame == sc.event_frame:
                support = support * sc.event_support
        return support

    def step(self, frame: int) -> TrackerStepResult:
        sc = self.scenario
        if frame <= self._last_frame:
            raise OutOfOrderError(f"frame {frame} after frame {self._last_frame}")
        if self._last_frame < 0 and frame != 0:
            raise OutOfOrderError("first step must be frame 0")
        if frame >= sc.frames:
            raise EndOfSequenceError(f"frame {frame} beyond {sc.frames} frames")
        advanced = frame - max(self._last_frame, 0)
        self._offset = self._offset + advanced * sc.drift_rate * self._staleness * self._drift_unit
        self._last_frame = frame
        self._belief_override = None

        if not self._capture_resolved and frame > sc.event_frame:
            if self._last_refined_frame < sc.event_frame - 1:
                self._lock = "distractor"
                self._offset = np.zeros(2, dtype=np.float64)
            self._capture_resolved = True

        if sc.occluded(frame):
            p_obj = np.zeros((sc.height, sc.width), dtype=np.float64)
        else:
            sd = sc.signed_distance(self.belief_center(frame))
            p_obj = expit(sc.slope * sd * self._support(frame, sd) / sc.temperature)
        values = np.stack([1.0 - p_obj, p_obj], axis=2).astype(np.float32)
        return TrackerStepResult(probability=ProbabilityMap(values), frame=frame)

    def apply(self, directive: MemoryDirective, refined: Optional[BinaryMask], frame: int) -> None:
        if directive is MemoryDirective.STORE_ORIGINAL:
            self._staleness = 1.0
        elif directive is MemoryDirective.SKIP:
            self._staleness *= 1.5
        elif directive is MemoryDirective.STORE_REFINED:
            if refined is None:
                raise TrackerError("StoreRefined without a refined mask")
            self._staleness = 1.0
            self._last_refined_frame = frame
            if refined.is_empty():
                return
            rows, cols = np.nonzero(refined.bits)
            centroid = np.array([rows.mean(), cols.mean()])
            target_d = float(np.hypot(*(centroid - self.scenario.target_center(frame))))
            if self.scenario.kind == "distractor":
                distractor_d = float(np.hypot(*(centroid - self.scenario.distractor_center(frame))))
                self._lock = "target" if target_d <= distractor_d else "distractor"
            else:
                self._lock = "target"
            offset = centroid - self._lock_center(frame)
            # Sub-pixel residue from mask discretization is noise, not drift.
            self._offset = offset if float(np.hypot(*offset)) >= 1.0 else np.zeros(2)
            self._belief_override = refined


def reference_scenario(kind: str, frames: int = 80, seed: int = 42, **overrides) -> SyntheticScenario:
    """Tuned 64x64 scenarios used by the benchmarks and tests."""
    base = dict(frames=frames, seed=seed)
    if kind == "drift":
        base.update(size=9.5, drift_rate=0.22, event_frame=min(40, frames - 1))
    elif kind == "distractor":
        base.update(
            size=14.0,
            start=(24.0, 24.0),
            velocity=(0.03, 0.05),
            drift_rate=0.05,
            event_frame=min(40, frames - 2),
            distractor_offset=(20.0, 20.0),
        )
    elif kind == "occlusion":
        base.update(size=9.5, drift_rate=0.25, event_frame=min(30, frames - 2), occlusion_span=12)
    else:
        raise ValidationError(f"kind must be one of {SCENARIO_KINDS}")
    base.update(overrides)
    return SyntheticScenario(kind=kind, **base)


def synth_generate(scenario: SyntheticScenario, out_dir) -> SequenceManifest:
    """Write the open-loop sequence (no corrections) plus its manifest.

    Emits per frame: the ZIVP probability map, the PGM ground truth, and a
    grayscale preview image; plus ``manifest.json`` and a ``scenario.json``
    sidecar so closed-loop runs can rebuild the tracker.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tracker = SyntheticTracker(scenario)
    entries = []
    for f in range(scenario.frames):
        result = tracker.step(f)
        tracker.apply(MemoryDirective.STORE_ORIGINAL, None, f)
        prob_path = out / f"prob_{f:05d}.zivp"
        gt_path = out / f"gt_{f:05d}.pgm"
        img_path = out / f"image_{f:05d}.pgm"
        write_zivp(prob_path, result.probability.values)
        gt = scenario.gt_mask(f)
        save_mask_pgm(LabelMask(gt.bits.astype(np.int32)), gt_path)
        save_image_pgm(np.round(result.probability.values[:, :, 1] * 255.0), img_path)
        entries.append(FrameEntry(prob=prob_path, gt=gt_path, image=img_path))
    manifest = SequenceManifest(
        name=f"{scenario.kind}_{scenario.seed}",
        object_ids=(1,),
        frame_entries=tuple(entries),
        fps=5.0,
    )
    save_manifest(manifest, out / "manifest.json")
    (out / "scenario.json").write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")
    return manifest


def load_scenario(path) -> SyntheticScenario:
    return SyntheticScenario.from_dict(json.loads(Path(path).read_text()))
