"""
From an entropy series to interaction decisions
===============================================

The policy watches the frame-to-frame jump of the region entropy. A jump
of at least tau_u asks the user for help, a jump in [tau_p, tau_u) only
spends a free pseudo-correction, and everything else is left alone. This
trace feeds a hand-written series through the policy and prints what the
engine would do each frame, including the memory directive.
"""

from entrovos.policy import (
    PolicyConfig,
    UncertaintySeries,
    decide_interaction,
    memory_gate,
)
from entrovos.uncertainty import RegionEntropy

# a quiet start, a slow simmer, one sharp failure, then recovery
S_R = [0.12, 0.13, 0.15, 0.14, 0.38, 0.40, 0.95, 0.30, 0.18, 0.17]

config = PolicyConfig()
series = UncertaintySeries(object_id=1)
print(f"thresholds: tau_u={config.tau_u}  tau_p={config.tau_p}  tau_m={config.tau_m}\n")
print(f"{'frame':>5} {'S_R':>6} {'delta':>7}  decision      directive")

for frame, value in enumerate(S_R):
    s = RegionEntropy(value=value, region_size=400)
    delta = series.push_and_delta(frame, s)
    decision = decide_interaction(delta, config)
    corrected = decision.value == "request_user"
    pseudo = decision.value == "pseudo"
    directive = memory_gate(s, corrected, config, pseudo)
    print(f"{frame:>5} {value:>6.2f} {delta:>+7.2f}  {decision.value:<12}  {directive.value}")

print(
    "\nframe 4 rises by 0.24 -> pseudo-correction; frame 6 jumps by 0.55 ->"
    "\nuser correction, and since S_R also exceeds tau_m the refined mask"
    "\n(not the original) is what enters tracker memory."
)
