"""Episode loop, batch benchmarking, and the tracking-proxy evaluation.

One episode walks a sequence frame by frame: the tracker emits a
probability map, the entropy of the dilated predicted region is pushed
into the per-object series, the policy turns the entropy jump into an
interaction decision, any resulting click goes to the refiner, and the
memory gate tells the tracker what to keep. Everything is logged per
(object, frame) so the metrics layer can score accuracy, robustness, and
user workload afterwards.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BinaryMask,
    Click,
    ProbabilityMap,
    SequenceManifest,
    ValidationError,
    argmax_labels,
    extract_object_mask,
)
from .formats import FormatError, load_manifest, load_mask_pgm
from .interactions import (
    NoValidSiteError,
    distance_field,
    gt_centroid_click,
    mask_snap_centroid,
    pseudo_click,
    simulated_user_click,
)
from .metrics import (
    DEFAULT_R_AT_TAUS,
    ConstantSeriesError,
    ObjectFrameRecord,
    aggregate_metrics,
    iou as metric_iou,
    make_record,
    object_metrics,
    tracking_proxy_rho,
)
from .policy import (
    InteractionDecision,
    MemoryDirective,
    PolicyConfig,
    UncertaintySeries,
    decide_interaction,
    memory_gate,
    policy_config_from_dict,
)
from .refiner import RefinerError, RefinerRequest, build_refiner
from .tracker import ReplayTracker, SyntheticTracker, TrackerError, load_scenario
from .uncertainty import EntropyMap, dilate_mask, entropy_map, region_entropy

log = logging.getLogger(__name__)

AGENT_MODES = ("simulated_misclassified", "simulated_gt_centroid", "live", "none")
INIT_MODES = ("gt_mask", "init_click")
SERIES_SOURCES = ("original", "final")


@dataclass(frozen=True)
class EpisodeConfig:
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    refiner: str = "oracle"
    refiner_params: dict = field(default_factory=dict)
    agent: str = "simulated_misclassified"
    init: str = "gt_mask"
    r_at_taus: Tuple[float, ...] = DEFAULT_R_AT_TAUS
    series_source: str = "original"
    aci_include_boundaries: bool = False
    boundary_tolerance: Optional[int] = None

    def __post_init__(self):
        if self.agent not in AGENT_MODES:
            raise ValidationError(f"agent must be one of {AGENT_MODES}")
        if self.init not in INIT_MODES:
            raise ValidationError(f"init must be one of {INIT_MODES}")
        if self.series_source not in SERIES_SOURCES:
            raise ValidationError(f"series_source must be one of {SERIES_SOURCES}")
        if self.agent == "none" and self.policy.enable_user:
            # Without anyone to answer, user requests cannot exist.
            object.__setattr__(self, "policy", replace(self.policy, enable_user=False))


def episode_config_from_dict(doc: dict) -> EpisodeConfig:
    """Policy keys sit flat in the JSON document; harness keys are optional."""
    kwargs = {"policy": policy_config_from_dict(doc)}
    for key in (
        "refiner",
        "refiner_params",
        "agent",
        "init",
        "series_source",
        "aci_include_boundaries",
        "boundary_tolerance",
    ):
        if key in doc:
            kwargs[key] = doc[key]
    if "r_at_taus" in doc:
        kwargs["r_at_taus"] = tuple(doc["r_at_taus"])
    return EpisodeConfig(**kwargs)


def load_episode_config(path) -> EpisodeConfig:
    return episode_config_from_dict(json.loads(Path(path).read_text()))


class SimulatedAgent:
    """Stands in for the human: answers user-correction requests from gt."""

    def __init__(self, mode: str = "misclassified"):
        if mode not in ("misclassified", "gt_centroid"):
            raise ValidationError(f"unknown simulated agent mode '{mode}'")
        self.mode = mode

    def request_click(
        self, pred: BinaryMask, gt: BinaryMask, frame: int, object_id: int
    ) -> Optional[Click]:
        if self.mode == "gt_centroid":
            return gt_centroid_click(gt, frame, object_id)
        return simulated_user_click(pred, gt, frame, object_id)


@dataclass
class EpisodeLog:
    sequence: str
    object_ids: Tuple[int, ...]
    records: Dict[int, List[ObjectFrameRecord]] = field(default_factory=dict)
    events: List[dict] = field(default_factory=list)
    clicks: List[Click] = field(default_factory=list)
    error: Optional[str] = None

    def clicks_for(self, object_id: int) -> List[Click]:
        return [c for c in self.clicks if c.object == object_id]

    def max_clicks_per_object_frame(self) -> int:
        counts: Dict[Tuple[int, int], int] = {}
        for c in self.clicks:
            key = (c.object, c.frame)
            counts[key] = counts.get(key, 0) + 1
        return max(counts.values(), default=0)

    def to_json_dict(self) -> dict:
        frames: Dict[int, List[dict]] = {}
        for ev in self.events:
            frames.setdefault(ev["frame"], []).append(ev)
        return {
            "sequence": self.sequence,
            "objects": list(self.object_ids),
            "error": self.error,
            "frames": [
                {"frame": f, "events": frames[f]} for f in sorted(frames)
            ],
        }


def _gt_masks(manifest: SequenceManifest, frame: int) -> Dict[int, BinaryMask]:
    labels = load_mask_pgm(manifest.frame_entries[frame].gt)
    return {o: extract_object_mask(labels, o) for o in manifest.object_ids}


def _resolve_refined_conflicts(
    refined: Dict[int, BinaryMask], prob: ProbabilityMap
) -> Dict[int, BinaryMask]:
    """Pixels claimed by several refined masks go to the object with the
    higher original probability there; ties to the lower id."""
    if len(refined) < 2:
        return refined
    ids = sorted(refined)
    stack = np.stack([refined[o].bits for o in ids])
    contested = stack.sum(axis=0) > 1
    if not contested.any():
        return refined
    out = {o: refined[o].bits.copy() for o in ids}
    rows, cols = np.nonzero(contested)
    for r, c in zip(rows, cols):
        claimants = [o for o in ids if out[o][r, c]]
        best = max(claimants, key=lambda o: (prob.values[r, c, o], -o))
        for o in claimants:
            if o != best:
                out[o][r, c] = False
    return {o: BinaryMask(bits) for o, bits in out.items()}


def run_episode(
    manifest: SequenceManifest,
    tracker,
    refiner,
    config: EpisodeConfig,
    agent=None,
    observer=None,
) -> EpisodeLog:
    """Run one sequence end to end; on tracker/refiner failure the partial
    log is returned with ``error`` set rather than raised away."""
    if agent is None:
        if config.agent == "simulated_misclassified":
            agent = SimulatedAgent("misclassified")
        elif config.agent == "simulated_gt_centroid":
            agent = SimulatedAgent("gt_centroid")
        elif config.agent == "live":
            raise ValidationError("live agent must be supplied by the session runner")

    policy = config.policy
    radius = policy.dilation_radius
    logbook = EpisodeLog(sequence=manifest.name, object_ids=tuple(manifest.object_ids))
    for o in manifest.object_ids:
        logbook.records[o] = []
    series = {o: UncertaintySeries(o) for o in manifest.object_ids}

    try:
        for frame in range(manifest.num_frames):
            step = tracker.step(frame)
            prob = step.probability
            entropy = entropy_map(prob)
            gts = _gt_masks(manifest, frame)
            labels = argmax_labels(prob)
            originals = {o: extract_object_mask(labels, o) for o in manifest.object_ids}
            if observer is not None and hasattr(observer, "on_step"):
                observer.on_step(frame, prob, entropy, originals)

            if frame == 0:
                for o in manifest.object_ids:
                    _init_object(
                        logbook, series, tracker, refiner, config, agent, o, prob, entropy, gts[o]
                    )
                if observer is not None and hasattr(observer, "on_frame_done"):
                    observer.on_frame_done(
                        frame, {o: logbook.records[o][-1].pred for o in manifest.object_ids}
                    )
                continue

            refined: Dict[int, BinaryMask] = {}
            frame_events: Dict[int, dict] = {}
            for o in manifest.object_ids:
                pred = originals[o]
                dilated = dilate_mask(pred, radius)
                s_r = region_entropy(entropy, dilated)
                delta = series[o].push_and_delta(frame, s_r)
                signal = delta if policy.trigger_on == "delta" else s_r.value
                decision = (
                    InteractionDecision.NONE
                    if s_r.absent
                    else decide_interaction(signal, policy)
                )
                event = {
                    "frame": frame,
                    "object": o,
                    "s_r": s_r.value,
                    "absent": s_r.absent,
                    "delta": delta,
                    "decision": decision.value,
                }
                click: Optional[Click] = None
                if decision is InteractionDecision.REQUEST_USER:
                    if observer is not None and hasattr(observer, "on_prompt"):
                        observer.on_prompt(frame, o, s_r.value, delta)
                    click = agent.request_click(pred, gts[o], frame, o)
                    if click is None:
                        event["satisfied_user"] = True
                elif decision is InteractionDecision.PSEUDO:
                    try:
                        click = pseudo_click(dilated, distance_field(pred), entropy, frame, o)
                    except NoValidSiteError:
                        event["no_valid_site"] = True

                if click is not None:
                    logbook.clicks.append(click)
                    event["click"] = click.to_dict()
                    req = RefinerRequest(
                        frame=frame,
                        object=o,
                        clicks=[click],
                        probability=prob,
                        ground_truth=gts[o],
                    )
                    refined[o] = refiner.refine(req)

                user_corrected = click is not None and click.origin == "user"
                pseudo_corrected = click is not None and click.origin == "pseudo"
                directive = memory_gate(s_r, user_corrected, policy, pseudo_corrected)
                event["directive"] = directive.value
                tracker.apply(
                    directive,
                    refined.get(o) if directive is MemoryDirective.STORE_REFINED else None,
                    frame,
                )
                event["user_corrected"] = user_corrected
                event["pseudo_corrected"] = pseudo_corrected
                frame_events[o] = event

            refined = _resolve_refined_conflicts(refined, prob)
            finals = {o: refined.get(o, originals[o]) for o in manifest.object_ids}
            for o in manifest.object_ids:
                ev = frame_events[o]
                if config.series_source == "final" and o in refined:
                    final_sr = region_entropy(entropy, dilate_mask(finals[o], radius))
                    series[o].values[-1] = final_sr.value
                    series[o].absent[-1] = final_sr.absent
                rec = make_record(
                    frame,
                    finals[o],
                    gts[o],
                    s_r=ev["s_r"],
                    user_prompted=ev["user_corrected"],
                    pseudo_issued=ev["pseudo_corrected"],
                )
                ev["iou"] = rec.iou
                logbook.records[o].append(rec)
                logbook.events.append(ev)
            if observer is not None and hasattr(observer, "on_frame_done"):
                observer.on_frame_done(frame, finals)
    except (TrackerError, RefinerError, FormatError, OSError, ValidationError) as exc:
        logbook.error = f"{type(exc).__name__}: {exc}"
        log.warning("episode '%s' aborted: %s", manifest.name, logbook.error)
    return logbook


def _init_object(
    logbook: EpisodeLog,
    series: Dict[int, UncertaintySeries],
    tracker,
    refiner,
    config: EpisodeConfig,
    agent,
    object_id: int,
    prob: ProbabilityMap,
    entropy: EntropyMap,
    gt: BinaryMask,
) -> None:
    click: Optional[Click] = None
    if config.init == "init_click" and not gt.is_empty():
        if agent is not None and hasattr(agent, "request_init_click"):
            click = agent.request_init_click(gt, object_id)
        else:
            row, col = mask_snap_centroid(gt)
            click = Click(
                frame=0, object=object_id, row=row, col=col, polarity="positive", origin="init"
            )
    if click is not None:
        req = RefinerRequest(
            frame=0, object=object_id, clicks=[click], probability=prob, ground_truth=gt
        )
        init_mask = refiner.refine(req)
    else:
        init_mask = gt
    s_r = region_entropy(entropy, dilate_mask(init_mask, config.policy.dilation_radius))
    series[object_id].push_and_delta(0, s_r)
    tracker.apply(MemoryDirective.STORE_REFINED, init_mask, 0)
    rec = make_record(0, init_mask, gt, s_r=s_r.value)
    logbook.records[object_id].append(rec)
    if click is not None:
        logbook.clicks.append(click)
    logbook.events.append(
        {
            "frame": 0,
            "object": object_id,
            "s_r": s_r.value,
            "absent": s_r.absent,
            "delta": 0.0,
            "decision": InteractionDecision.NONE.value,
            "directive": MemoryDirective.STORE_REFINED.value,
            "click": click.to_dict() if click else None,
            "user_corrected": False,
            "pseudo_corrected": False,
            "iou": rec.iou,
        }
    )


def build_tracker(manifest: SequenceManifest, manifest_path=None):
    """Replay by default; a ``scenario.json`` next to the manifest switches
    to the closed-loop synthetic tracker rebuilt from that scenario."""
    if manifest_path is not None:
        sidecar = Path(manifest_path).parent / "scenario.json"
        if sidecar.exists():
            return SyntheticTracker(load_scenario(sidecar))
    return ReplayTracker(manifest)


def episode_report(log_: EpisodeLog, manifest: SequenceManifest, config: EpisodeConfig) -> dict:
    objects = []
    for o in manifest.object_ids:
        m = object_metrics(
            log_.records[o],
            r_at_taus=config.r_at_taus,
            fps=manifest.fps,
            boundary_tolerance=config.boundary_tolerance,
            aci_include_boundaries=config.aci_include_boundaries,
        )
        entry = {"id": o, **m}
        if manifest.fps is None:
            entry["idi_flag"] = "fps missing"
        objects.append(entry)
    return {"name": manifest.name, "objects": objects}


def run_benchmark(
    manifest_paths: Sequence, config: EpisodeConfig, jobs: int = 1
) -> dict:
    """Evaluate every manifest; failures become error entries, the rest are
    aggregated into the summary."""
    paths = [Path(p) for p in manifest_paths]
    if not paths:
        raise ValidationError("benchmark needs at least one manifest")

    def one(path: Path):
        manifest = load_manifest(path)
        tracker = build_tracker(manifest, path)
        refiner = build_refiner(config.refiner, config.refiner_params)
        log_ = run_episode(manifest, tracker, refiner, config)
        if log_.error:
            raise RuntimeError(log_.error)
        return episode_report(log_, manifest, config)

    sequences: List[Optional[dict]] = [None] * len(paths)
    errors: List[dict] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(one, p) for p in paths]
        outcomes = [(f.result, None) for f in futures]
    else:
        outcomes = [(one, p) for p in paths]
    for i, (call, arg) in enumerate(outcomes):
        try:
            sequences[i] = call() if arg is None else call(arg)
        except Exception as exc:  # per-sequence isolation
            errors.append({"manifest": str(paths[i]), "error": f"{type(exc).__name__}: {exc}"})

    done = [s for s in sequences if s is not None]
    all_objects = [obj for s in done for obj in s["objects"]]
    report = {
        "sequences": done,
        "errors": errors,
        "summary": aggregate_metrics(all_objects, config.r_at_taus) if all_objects else {},
    }
    return report


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


# --- proxy evaluation ---------------------------------------------------------


def proxy_eval(
    manifest_paths: Sequence, radii: Sequence[int], config: Optional[EpisodeConfig] = None
) -> List[dict]:
    """Correlate the region-entropy series against IoU with no interactions.

    Returns one row per (sequence, object, radius); ``rho`` is None when
    either series is constant (flagged undefined).
    """
    if config is None:
        config = EpisodeConfig()
    rows: List[dict] = []
    for path in manifest_paths:
        manifest = load_manifest(path)
        tracker = build_tracker(manifest, path)
        entropies: List[EntropyMap] = []
        preds: Dict[int, List[BinaryMask]] = {o: [] for o in manifest.object_ids}
        ious: Dict[int, List[float]] = {o: [] for o in manifest.object_ids}
        for frame in range(manifest.num_frames):
            prob = tracker.step(frame).probability
            tracker.apply(MemoryDirective.STORE_ORIGINAL, None, frame)
            entropy = entropy_map(prob)
            entropies.append(entropy)
            labels = argmax_labels(prob)
            gts = _gt_masks(manifest, frame)
            for o in manifest.object_ids:
                pred = extract_object_mask(labels, o)
                preds[o].append(pred)
                ious[o].append(metric_iou(pred, gts[o]))
        for o in manifest.object_ids:
            for radius in radii:
                s_series = [
                    region_entropy(entropies[f], dilate_mask(preds[o][f], radius)).value
                    for f in range(manifest.num_frames)
                ]
                row = {"sequence": manifest.name, "object": o, "radius": int(radius)}
                try:
                    row["rho"] = tracking_proxy_rho(s_series, ious[o])
                except (ConstantSeriesError, ValidationError):
                    row["rho"] = None
                rows.append(row)
    return rows


def write_proxy_csv(rows: List[dict], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sequence", "object", "radius", "rho"])
        for row in rows:
            rho = "undefined" if row["rho"] is None else repr(row["rho"])
            writer.writerow([row["sequence"], row["object"], row["radius"], rho])
