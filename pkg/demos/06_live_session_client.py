"""
Driving the live session protocol programmatically
==================================================

The ``serve`` command pauses the episode whenever a correction is needed
and waits for a click over HTTP. This script plays both sides in one
process: it builds a short sequence with a planted failure, runs the
session app in-process, polls /api/state like the browser UI would, and
answers the single prompt.
"""

import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from entrovos.core import FrameEntry, LabelMask, SequenceManifest
from entrovos.formats import decode_zivp, load_manifest, save_manifest, save_mask_pgm, write_zivp
from entrovos.harness import EpisodeConfig
from entrovos.server import LiveSession, create_app

# -- a 10-frame sequence whose prediction slips at frame 6 --------------------
work = Path(tempfile.mkdtemp(prefix="entrovos_demo_"))
h = w = 16
gt = np.zeros((h, w), dtype=np.int32)
gt[4:12, 4:12] = 1
entries = []
for f in range(10):
    p_obj = np.full((h, w), 0.02)
    if f == 6:
        p_obj[:] = 0.25
        p_obj[4:12, 6:14] = 0.75  # shifted and unsure
    else:
        p_obj[4:12, 4:12] = 0.98
    write_zivp(work / f"p{f}.zivp", np.stack([1 - p_obj, p_obj], axis=2).astype(np.float32))
    save_mask_pgm(LabelMask(gt), work / f"g{f}.pgm")
    entries.append(FrameEntry(prob=work / f"p{f}.zivp", gt=work / f"g{f}.pgm"))
manifest_path = work / "manifest.json"
save_manifest(
    SequenceManifest(name="demo", object_ids=(1,), frame_entries=tuple(entries), fps=5.0),
    manifest_path,
)

# -- serve it and act as the user ---------------------------------------------
session = LiveSession(
    load_manifest(manifest_path), EpisodeConfig(agent="live"), manifest_path=manifest_path
)
client = TestClient(create_app(session))

print("initial:", client.get("/api/state").json())
client.post("/api/step")

import time

while True:
    state = client.get("/api/state").json()
    if state["status"] == "awaiting_click":
        print(f"prompted at frame {state['frame']} (delta={state['delta']:+.2f})")
        entropy = decode_zivp(client.get(f"/api/frame/{state['frame']}/entropy").content)
        hot = np.unravel_index(np.argmax(entropy[:, :, 0]), entropy[:, :, 0].shape)
        print(f"most uncertain pixel of the overlay: {hot}")
        client.post("/api/click", json={"row": 8, "col": 8, "polarity": "positive"})
        print("clicked (8, 8)")
    elif state["status"] == "done":
        summary = state["report"]["summary"]
        print(f"done: NoC={summary['noc']}  R@0.5={summary['r_at']['0.5']:.3f}")
        break
    time.sleep(0.02)
