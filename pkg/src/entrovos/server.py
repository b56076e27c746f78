"""Live session service: one episode, advanced over HTTP, paused on prompts.

Protocol (JSON bodies unless noted):

    GET  /api/state                     -> {frame, status, object, s_r, delta, noc_so_far}
    GET  /api/frame/{f}/image           -> PPM/PGM bytes
    GET  /api/frame/{f}/entropy         -> single-channel ZIVP bytes
    GET  /api/frame/{f}/mask/{object}   -> PGM bytes
    POST /api/click {row, col, polarity}-> 200, or 409 when nothing awaits a click
    POST /api/skip                      -> 200 (drop the pending prompt)
    POST /api/step                      -> 200 (start, or advance in manual-step mode)

Statuses: awaiting_init (not started), running, awaiting_click, done. The
episode thread blocks while a prompt is outstanding; a human may take as
long as they like, the tracker simply waits.

Note: no ``from __future__ import annotations`` here; the request models
are defined inside ``create_app`` and string annotations would not resolve.
"""

import queue
import threading
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .core import Click, SequenceManifest
from .formats import encode_zivp, load_manifest
from .harness import EpisodeConfig, build_tracker, episode_report, run_episode
from .metrics import aggregate_metrics
from .refiner import build_refiner
from .uncertainty import entropy_to_grid


def _pgm_bytes(labels: np.ndarray) -> bytes:
    h, w = labels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + labels.astype(np.uint8).tobytes()


class LiveSession:
    """Shared state between the HTTP handlers and the episode thread."""

    def __init__(self, manifest: SequenceManifest, config: EpisodeConfig,
                 manifest_path=None, manual_step: bool = False):
        self.manifest = manifest
        self.config = config
        self.manifest_path = manifest_path
        self.manual_step = manual_step
        self.lock = threading.Lock()
        self.status = "awaiting_init"
        self.frame = 0
        self.object: Optional[int] = None
        self.s_r: Optional[float] = None
        self.delta: Optional[float] = None
        self.noc_so_far = 0
        self.report: Optional[dict] = None
        self.error: Optional[str] = None
        self.images: Dict[int, bytes] = {}
        self.entropies: Dict[int, bytes] = {}
        self.masks: Dict[Tuple[int, int], bytes] = {}
        self._answers: "queue.Queue" = queue.Queue(maxsize=1)
        self._step_gate = threading.Event()
        self._thread: Optional[threading.Thread] = None

    # -- episode thread ------------------------------------------------------

    def start(self) -> bool:
        with self.lock:
            if self._thread is not None:
                return False
            self.status = "running"
            self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return True

    def _run(self):
        try:
            tracker = build_tracker(self.manifest, self.manifest_path)
            refiner = build_refiner(self.config.refiner, self.config.refiner_params)
            log = run_episode(
                self.manifest, tracker, refiner, self.config, agent=LiveAgent(self), observer=self
            )
            seq = episode_report(log, self.manifest, self.config)
            with self.lock:
                self.error = log.error
                self.report = {
                    "sequences": [seq],
                    "errors": [],
                    "summary": aggregate_metrics(seq["objects"], self.config.r_at_taus),
                }
                self.status = "done"
        except Exception as exc:  # surface crashes to the client instead of hanging
            with self.lock:
                self.error = f"{type(exc).__name__}: {exc}"
                self.status = "done"

    # -- observer hooks (called from the episode thread) ----------------------

    def on_step(self, frame, prob, entropy, originals):
        if self.manual_step and frame > 0:
            self._step_gate.wait()
            self._step_gate.clear()
        entry = self.manifest.frame_entries[frame]
        if entry.image is not None and Path(entry.image).exists():
            image = Path(entry.image).read_bytes()
        else:
            gray = np.round((1.0 - prob.values[:, :, 0]) * 255.0)
            image = _pgm_bytes(gray)
        with self.lock:
            self.frame = frame
            self.images[frame] = image
            self.entropies[frame] = encode_zivp(entropy_to_grid(entropy))
            for o, mask in originals.items():
                self.masks[(frame, o)] = _pgm_bytes(mask.bits.astype(np.uint8) * 255)

    def on_frame_done(self, frame, finals):
        with self.lock:
            for o, mask in finals.items():
                self.masks[(frame, o)] = _pgm_bytes(mask.bits.astype(np.uint8) * 255)

    def on_prompt(self, frame, object_id, s_r, delta):
        with self.lock:
            self.frame = frame
            self.object = object_id
            self.s_r = s_r
            self.delta = delta

    # -- prompt plumbing -------------------------------------------------------

    def await_answer(self) -> Optional[dict]:
        with self.lock:
            self.status = "awaiting_click"
        answer = self._answers.get()
        with self.lock:
            self.status = "running"
            self.object = None
        return answer

    def submit(self, answer: Optional[dict]) -> bool:
        with self.lock:
            if self.status != "awaiting_click":
                return False
        self._answers.put(answer)
        return True

    def step(self) -> dict:
        started = self.start()
        if not started and self.manual_step:
            self._step_gate.set()
        with self.lock:
            return {"status": self.status, "frame": self.frame}

    def state(self) -> dict:
        with self.lock:
            out = {
                "frame": self.frame,
                "status": self.status,
                "object": self.object,
                "s_r": self.s_r,
                "delta": self.delta,
                "noc_so_far": self.noc_so_far,
            }
            if self.status == "done":
                out["report"] = self.report
                out["error"] = self.error
            return out


class LiveAgent:
    """Harness-facing agent that forwards prompts to the HTTP session."""

    def __init__(self, session: LiveSession):
        self.session = session

    def request_click(self, pred, gt, frame, object_id) -> Optional[Click]:
        answer = self.session.await_answer()
        if answer is None:
            return None
        with self.session.lock:
            self.session.noc_so_far += 1
        return Click(
            frame=frame,
            object=object_id,
            row=answer["row"],
            col=answer["col"],
            polarity=answer.get("polarity", "positive"),
            origin="user",
        )

    def request_init_click(self, gt, object_id) -> Optional[Click]:
        self.session.on_prompt(0, object_id, None, None)
        answer = self.session.await_answer()
        if answer is None:
            return None
        return Click(
            frame=0,
            object=object_id,
            row=answer["row"],
            col=answer["col"],
            polarity="positive",
            origin="init",
        )


def create_app(session: LiveSession):
    from fastapi import FastAPI, HTTPException, Response
    from pydantic import BaseModel

    app = FastAPI(title="entrovos session")

    class ClickBody(BaseModel):
        row: int
        col: int
        polarity: str = "positive"

    @app.get("/api/state")
    def state():
        return session.state()

    @app.post("/api/click")
    def click(body: ClickBody):
        if body.polarity not in ("positive", "negative"):
            raise HTTPException(status_code=422, detail="polarity must be positive|negative")
        if not session.submit({"row": body.row, "col": body.col, "polarity": body.polarity}):
            raise HTTPException(status_code=409, detail="no click is awaited")
        return {"accepted": True}

    @app.post("/api/skip")
    def skip():
        session.submit(None)
        return {"skipped": True}

    @app.post("/api/step")
    def step():
        return session.step()

    def _frame_bytes(store: dict, key, media: str) -> Response:
        with session.lock:
            data = store.get(key)
        if data is None:
            raise HTTPException(status_code=404, detail="frame not processed yet")
        return Response(content=data, media_type=media)

    @app.get("/api/frame/{frame}/image")
    def image(frame: int):
        return _frame_bytes(session.images, frame, "image/x-portable-anymap")

    @app.get("/api/frame/{frame}/entropy")
    def entropy(frame: int):
        return _frame_bytes(session.entropies, frame, "application/octet-stream")

    @app.get("/api/frame/{frame}/mask/{object_id}")
    def mask(frame: int, object_id: int):
        return _frame_bytes(session.masks, (frame, object_id), "image/x-portable-anymap")

    return app


def serve_session(manifest_path, config: EpisodeConfig, port: int = 8008,
                  static_dir=None, manual_step: bool = False):
    """Blocking entry point used by the CLI."""
    import uvicorn
    from dataclasses import replace

    manifest = load_manifest(manifest_path)
    config = replace(config, agent="live")
    session = LiveSession(manifest, config, manifest_path=manifest_path, manual_step=manual_step)
    app = create_app(session)
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
