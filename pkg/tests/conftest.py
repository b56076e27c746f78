import numpy as np
import pytest

from entrovos.core import BinaryMask, FrameEntry, LabelMask, ProbabilityMap, SequenceManifest
from entrovos.formats import save_manifest, save_mask_pgm, write_zivp


def bits(art: str) -> BinaryMask:
    """Build a mask from ascii art: '#' is True, '.' is False."""
    rows = [line.strip() for line in art.strip().splitlines()]
    return BinaryMask(np.array([[ch == "#" for ch in row] for row in rows]))


def write_replay_sequence(directory, prob_frames, gt_frames, fps=5.0, name="crafted"):
    """Write ZIVP/PGM files plus a manifest for a hand-built sequence.

    ``prob_frames``: list of (H, W, C) float arrays; ``gt_frames``: list of
    (H, W) integer label arrays.
    """
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for f, (prob, gt) in enumerate(zip(prob_frames, gt_frames)):
        prob_path = directory / f"prob_{f:03d}.zivp"
        gt_path = directory / f"gt_{f:03d}.pgm"
        write_zivp(prob_path, np.asarray(prob, dtype=np.float32))
        save_mask_pgm(LabelMask(np.asarray(gt, dtype=np.int32)), gt_path)
        entries.append(FrameEntry(prob=prob_path, gt=gt_path))
    objects = sorted({int(v) for gt in gt_frames for v in np.unique(gt) if v > 0}) or [1]
    manifest = SequenceManifest(
        name=name, object_ids=tuple(objects), frame_entries=tuple(entries), fps=fps
    )
    path = directory / "manifest.json"
    save_manifest(manifest, path)
    return path


def block_sequence(num_frames, spike_frame=None, h=16, w=16, confident=0.98, spiky=0.75):
    """Two-class sequence with an 8x8 object block; at ``spike_frame`` the
    predicted block shifts two columns and softens, so the entropy jumps
    and the prediction disagrees with the ground truth."""
    gt = np.zeros((h, w), dtype=np.int32)
    gt[4:12, 4:12] = 1
    probs, gts = [], []
    for f in range(num_frames):
        p_obj = np.full((h, w), 1.0 - confident)
        if spike_frame is not None and f == spike_frame:
            p_obj[:] = 1.0 - spiky
            p_obj[4:12, 6:14] = spiky
        else:
            p_obj[4:12, 4:12] = confident
        probs.append(np.stack([1.0 - p_obj, p_obj], axis=2))
        gts.append(gt)
    return probs, gts


def two_class_map(p_obj: np.ndarray) -> ProbabilityMap:
    p = np.asarray(p_obj, dtype=np.float32)
    return ProbabilityMap(np.stack([1.0 - p, p], axis=2))


def random_simplex_map(rng: np.random.Generator, h: int, w: int, c: int) -> ProbabilityMap:
    values = rng.dirichlet(np.ones(c), size=h * w).reshape(h, w, c)
    return ProbabilityMap(values.astype(np.float32))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
