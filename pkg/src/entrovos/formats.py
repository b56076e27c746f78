"""On-disk formats: ZIVP float grids, binary PGM masks, JSON manifests.

ZIVP layout: magic ``ZIVP``, then little-endian u32 version (=1), u32 H,
u32 W, u32 C, then H*W*C little-endian float32 in row-major order with the
class index varying fastest. One file per frame. The same container also
carries single-channel entropy grids (C=1), which are not probability
maps, so simplex validation happens only in :func:`load_probability_map`.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .core import (
    BinaryMask,
    FrameEntry,
    LabelMask,
    ProbabilityMap,
    SequenceManifest,
    ValidationError,
)

ZIVP_MAGIC = b"ZIVP"
ZIVP_VERSION = 1

PathLike = Union[str, Path]


class FormatError(ValueError):
    """Base class for file decoding failures."""


class BadMagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class TruncatedError(FormatError):
    """Payload size disagrees with the declared dimensions."""


class InvalidDistributionError(FormatError):
    """Decoded values violate probability-map invariants."""


# --- ZIVP container ---------------------------------------------------------


def write_zivp(path: PathLike, values: np.ndarray) -> None:
    """Write an (H, W, C) float32 grid. Round-trips bit-exactly."""
    v = np.ascontiguousarray(values, dtype=np.float32)
    if v.ndim != 3:
        raise ValidationError(f"ZIVP payload must be (H, W, C), got shape {v.shape}")
    h, w, c = v.shape
    header = ZIVP_MAGIC + struct.pack("<IIII", ZIVP_VERSION, h, w, c)
    Path(path).write_bytes(header + v.tobytes())


def read_zivp(path: PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    return decode_zivp(data, source=str(path))


def decode_zivp(data: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(data) < 20:
        raise TruncatedError(f"{source}: header incomplete ({len(data)} bytes)")
    if data[:4] != ZIVP_MAGIC:
        raise BadMagicError(f"{source}: bad magic {data[:4]!r}")
    version, h, w, c = struct.unpack("<IIII", data[4:20])
    if version != ZIVP_VERSION:
        raise VersionError(f"{source}: unsupported version {version}")
    expected = 20 + 4 * h * w * c
    if len(data) != expected:
        raise TruncatedError(f"{source}: expected {expected} bytes for {h}x{w}x{c}, got {len(data)}")
    values = np.frombuffer(data[20:], dtype="<f4").reshape(h, w, c)
    return values.astype(np.float32)


def encode_zivp(values: np.ndarray) -> bytes:
    v = np.ascontiguousarray(values, dtype=np.float32)
    h, w, c = v.shape
    return ZIVP_MAGIC + struct.pack("<IIII", ZIVP_VERSION, h, w, c) + v.tobytes()


def save_probability_map(prob: ProbabilityMap, path: PathLike) -> None:
    write_zivp(path, prob.values)


def load_probability_map(path: PathLike) -> ProbabilityMap:
    values = read_zivp(path)
    try:
        return ProbabilityMap(values)
    except ValidationError as exc:
        raise InvalidDistributionError(f"{path}: {exc}") from exc


# --- binary PGM (P5, maxval 255) --------------------------------------------


def save_mask_pgm(mask: LabelMask, path: PathLike) -> None:
    lab = mask.labels
    if lab.size and lab.max() > 255:
        raise ValidationError("PGM masks carry one byte per pixel; class id > 255")
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + lab.astype(np.uint8).tobytes())


def _pgm_tokens(data: bytes, count: int) -> tuple:
    """First `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset just past the single whitespace after the last one).
    """
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise TruncatedError("PGM header incomplete")
        tokens.append(data[start:i])
    if i >= n:
        raise TruncatedError("PGM header incomplete")
    return tokens, i + 1  # consume exactly one whitespace byte after maxval


def load_mask_pgm(path: PathLike) -> LabelMask:
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise BadMagicError(f"{path}: not a binary PGM (got {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise FormatError(f"{path}: maxval must be 255, got {maxval}")
    payload = data[offset:]
    if len(payload) != width * height:
        raise TruncatedError(f"{path}: expected {width * height} pixels, got {len(payload)}")
    labels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return LabelMask(labels.astype(np.int32))


def save_binary_mask_pgm(mask: BinaryMask, path: PathLike) -> None:
    save_mask_pgm(LabelMask(mask.bits.astype(np.int32)), path)


def load_binary_mask_pgm(path: PathLike) -> BinaryMask:
    return BinaryMask(load_mask_pgm(path).labels != 0)


def save_image_pgm(gray: np.ndarray, path: PathLike) -> None:
    """8-bit grayscale image, same container as masks."""
    save_mask_pgm(LabelMask(np.clip(gray, 0, 255).astype(np.int32)), path)


# --- sequence manifest -------------------------------------------------------


def load_manifest(path: PathLike) -> SequenceManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    base = path.parent
    try:
        name = doc["name"]
        objects = doc["objects"]
        frames = doc["frames"]
    except KeyError as exc:
        raise FormatError(f"{path}: manifest missing key {exc}") from exc
    fps = doc.get("fps")
    entries = []
    for i, fr in enumerate(frames):
        if "prob" not in fr or "gt" not in fr:
            raise FormatError(f"{path}: frame {i} needs 'prob' and 'gt' paths")
        image = fr.get("image")
        entries.append(
            FrameEntry(
                prob=base / fr["prob"],
                gt=base / fr["gt"],
                image=(base / image) if image else None,
            )
        )
    try:
        return SequenceManifest(
            name=name,
            object_ids=tuple(objects),
            frame_entries=tuple(entries),
            fps=float(fps) if fps is not None else None,
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_manifest(manifest: SequenceManifest, path: PathLike) -> None:
    path = Path(path)
    base = path.parent

    def rel(p: Path) -> str:
        try:
            return str(Path(p).relative_to(base))
        except ValueError:
            return str(p)

    doc = {
        "name": manifest.name,
        "objects": list(manifest.object_ids),
        "frames": [
            {
                "prob": rel(e.prob),
                "gt": rel(e.gt),
                **({"image": rel(e.image)} if e.image else {}),
            }
            for e in manifest.frame_entries
        ],
    }
    if manifest.fps is not None:
        doc["fps"] = manifest.fps
    path.write_text(json.dumps(doc, indent=2) + "\n")
