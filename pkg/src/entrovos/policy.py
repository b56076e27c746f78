"""Interaction policy: when to ask for help, and what to store in memory.

The per-object entropy series drives two decisions each frame:

* interaction — a jump of the region entropy above ``tau_u`` requests a
  user correction, a milder jump in [tau_p, tau_u) triggers an automatic
  pseudo-correction, anything below is left alone;
* memory — corrected frames store the refined mask (interaction-driven
  update), uncorrected frames with entropy above ``tau_m`` are kept out of
  tracker memory (uncertainty-driven update), everything else stores the
  original prediction.

Callers are expected to suppress interaction decisions for frames whose
region is absent: there is no prediction to anchor a click to.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Tuple

from .core import ValidationError
from .uncertainty import DEFAULT_DILATION_RADIUS, RegionEntropy


class InteractionDecision(enum.Enum):
    NONE = "none"
    PSEUDO = "pseudo"
    REQUEST_USER = "request_user"


class MemoryDirective(enum.Enum):
    STORE_ORIGINAL = "store_original"
    SKIP = "skip"
    STORE_REFINED = "store_refined"


TRIGGER_MODES = ("delta", "value")


@dataclass(frozen=True)
class PolicyConfig:
    tau_u: float = 0.5
    tau_p: float = 0.2
    tau_m: float = 0.8
    dilation_radius: int = DEFAULT_DILATION_RADIUS
    enable_user: bool = True
    enable_pseudo: bool = True
    enable_udu: bool = True
    enable_user_idu: bool = True
    enable_pseudo_idu: bool = False
    trigger_on: str = "delta"

    def __post_init__(self):
        if not self.tau_u > self.tau_p:
            raise ValidationError(f"tau_u ({self.tau_u}) must exceed tau_p ({self.tau_p})")
        if not 0.0 <= self.tau_m <= 1.0:
            raise ValidationError(f"tau_m must be in [0, 1], got {self.tau_m}")
        if self.dilation_radius < 0:
            raise ValidationError("dilation_radius must be >= 0")
        if self.trigger_on not in TRIGGER_MODES:
            raise ValidationError(f"trigger_on must be one of {TRIGGER_MODES}")

    def all_off(self) -> "PolicyConfig":
        return replace(
            self,
            enable_user=False,
            enable_pseudo=False,
            enable_udu=False,
            enable_user_idu=False,
            enable_pseudo_idu=False,
        )


_CONFIG_KEYS = (
    "tau_u",
    "tau_p",
    "tau_m",
    "dilation_radius",
    "enable_user",
    "enable_pseudo",
    "enable_udu",
    "enable_user_idu",
    "enable_pseudo_idu",
    "trigger_on",
)


def policy_config_from_dict(doc: dict) -> PolicyConfig:
    """Build a config from a JSON document; omitted keys keep their defaults."""
    kwargs = {k: doc[k] for k in _CONFIG_KEYS if k in doc}
    return PolicyConfig(**kwargs)


def load_policy_config(path) -> PolicyConfig:
    return policy_config_from_dict(json.loads(Path(path).read_text()))


class UncertaintySeries:
    """Per-object record of region entropy over frames, with deltas.

    Owned by a single episode runner; not safe to share across threads.
    """

    def __init__(self, object_id: int):
        self.object_id = object_id
        self.frames: List[int] = []
        self.values: List[float] = []
        self.absent: List[bool] = []
        self.deltas: List[float] = []

    def __len__(self) -> int:
        return len(self.frames)

    def push_and_delta(self, frame: int, s: RegionEntropy) -> float:
        """Append one sample and return S(f) - S(f-1); 0 for the first sample."""
        if self.frames and frame <= self.frames[-1]:
            raise ValidationError(
                f"frame {frame} not after last recorded frame {self.frames[-1]}"
            )
        delta = 0.0 if not self.values else s.value - self.values[-1]
        self.frames.append(frame)
        self.values.append(s.value)
        self.absent.append(s.absent)
        if len(self.values) > 1:
            self.deltas.append(delta)
        return delta

    def last(self) -> Tuple[int, float, bool]:
        return self.frames[-1], self.values[-1], self.absent[-1]


def decide_interaction(delta: float, config: PolicyConfig) -> InteractionDecision:
    """Map a trigger signal onto an interaction decision.

    User requests take the band [tau_u, inf) and pseudo-corrections the band
    [tau_p, tau_u); disabling a band leaves it empty rather than widening
    the other.
    """
    if config.enable_user and delta >= config.tau_u:
        return InteractionDecision.REQUEST_USER
    if config.enable_pseudo and config.tau_u > delta >= config.tau_p:
        return InteractionDecision.PSEUDO
    return InteractionDecision.NONE


def memory_gate(
    s: RegionEntropy,
    user_corrected: bool,
    config: PolicyConfig,
    pseudo_corrected: bool = False,
) -> MemoryDirective:
    """Memory directive for one frame: IDU beats UDU beats the default."""
    if user_corrected and config.enable_user_idu:
        return MemoryDirective.STORE_REFINED
    if pseudo_corrected and config.enable_pseudo_idu:
        return MemoryDirective.STORE_REFINED
    if config.enable_udu and s.value > config.tau_m:
        return MemoryDirective.SKIP
    return MemoryDirective.STORE_ORIGINAL
