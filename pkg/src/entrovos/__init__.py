"""Entropy-gated human-in-the-loop video object segmentation evaluation.

The package turns per-frame class-probability maps from any tracker into a
tracking-state estimate (normalized entropy over the dilated predicted
region), decides on the fly whether a correction is worth asking for, and
scores the result with robustness and user-workload metrics. Trackers and
mask refiners are pluggable, so the whole loop runs at desk scale without
any neural network.
"""

from .core import (
    BinaryMask,
    Click,
    LabelMask,
    ProbabilityMap,
    SequenceManifest,
    ValidationError,
    argmax_labels,
    extract_object_mask,
)
from .uncertainty import EntropyMap, RegionEntropy, dilate_mask, entropy_map, region_entropy
from .policy import (
    InteractionDecision,
    MemoryDirective,
    PolicyConfig,
    UncertaintySeries,
    decide_interaction,
    memory_gate,
)
from .interactions import (
    boundary_set,
    distance_field,
    largest_misclassified_component,
    pseudo_click,
    simulated_user_click,
)
from .refiner import FloodRefiner, OracleRefiner, ExternalRefiner, RefinerRequest
from .tracker import (
    ReplayTracker,
    SyntheticScenario,
    SyntheticTracker,
    reference_scenario,
    synth_generate,
)
from .metrics import aci, boundary_f, idi, iou, noc, robustness_at, spearman
from .harness import (
    EpisodeConfig,
    EpisodeLog,
    SimulatedAgent,
    proxy_eval,
    run_benchmark,
    run_episode,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "Click",
    "EntropyMap",
    "EpisodeConfig",
    "EpisodeLog",
    "ExternalRefiner",
    "FloodRefiner",
    "InteractionDecision",
    "LabelMask",
    "MemoryDirective",
    "OracleRefiner",
    "PolicyConfig",
    "ProbabilityMap",
    "RefinerRequest",
    "RegionEntropy",
    "ReplayTracker",
    "SequenceManifest",
    "SimulatedAgent",
    "SyntheticScenario",
    "SyntheticTracker",
    "UncertaintySeries",
    "ValidationError",
    "aci",
    "argmax_labels",
    "boundary_f",
    "boundary_set",
    "decide_interaction",
    "dilate_mask",
    "distance_field",
    "entropy_map",
    "extract_object_mask",
    "idi",
    "iou",
    "largest_misclassified_component",
    "memory_gate",
    "noc",
    "proxy_eval",
    "pseudo_click",
    "reference_scenario",
    "region_entropy",
    "robustness_at",
    "run_benchmark",
    "run_episode",
    "simulated_user_click",
    "spearman",
    "synth_generate",
]
