"""Acceptance suite: every release criterion checked at its stated
tolerance, one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they are produced.
"""

import math
import time

import numpy as np

from entrovos.core import BinaryMask, ProbabilityMap, argmax_labels, extract_object_mask
from entrovos.formats import load_manifest, load_probability_map
from entrovos.harness import EpisodeConfig, build_tracker, proxy_eval, run_benchmark, run_episode, write_report
from entrovos.interactions import distance_field
from entrovos.metrics import (
    aci,
    idi,
    iou,
    make_record,
    robustness_at,
    spearman,
)
from entrovos.policy import InteractionDecision, MemoryDirective, PolicyConfig, decide_interaction, memory_gate
from entrovos.refiner import OracleRefiner
from entrovos.tracker import reference_scenario, synth_generate
from entrovos.uncertainty import EntropyMap, RegionEntropy, entropy_map, region_entropy

from conftest import bits, random_simplex_map


def criterion(name: str, ok: bool, detail: str = ""):
    line = f"[criterion] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# --- 1. entropy correctness ---------------------------------------------------


def test_entropy_correctness():
    rng = np.random.default_rng(7)
    start = time.monotonic()
    in_range = True
    for _ in range(1000):
        c = int(rng.integers(1, 9))
        e = entropy_map(random_simplex_map(rng, 16, 16, c))
        if e.values.min() < 0.0 or e.values.max() > 1.0:
            in_range = False
            break
    uniform_ok = True
    onehot_ok = True
    for c in range(2, 9):
        uniform = entropy_map(ProbabilityMap(np.full((8, 8, c), 1.0 / c, dtype=np.float32)))
        uniform_ok &= bool(np.abs(uniform.values - 1.0).max() <= 1e-6)
        hot = np.zeros((8, 8, c), dtype=np.float32)
        hot[:, :, c - 1] = 1.0
        onehot_ok &= bool((entropy_map(ProbabilityMap(hot)).values == 0.0).all())
    elapsed = time.monotonic() - start
    criterion(
        "entropy correctness (1000 random maps, C in 1..8)",
        in_range and uniform_ok and onehot_ok and elapsed < 5.0,
        f"range_ok={in_range} uniform_ok={uniform_ok} onehot_ok={onehot_ok} {elapsed:.2f}s",
    )


# --- 2. oracle equivalences ---------------------------------------------------


def _brute_boundary(bitmap: np.ndarray) -> np.ndarray:
    padded = np.pad(bitmap, 1, constant_values=False)
    all_neighbors = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return bitmap & ~all_neighbors


def _brute_distance(bitmap: np.ndarray) -> np.ndarray:
    omega = np.argwhere(_brute_boundary(bitmap))
    h, w = bitmap.shape
    rows = np.arange(h)[:, None, None]
    cols = np.arange(w)[None, :, None]
    d2 = (rows - omega[:, 0]) ** 2 + (cols - omega[:, 1]) ** 2
    return np.sqrt(d2.min(axis=2))


def test_distance_field_oracle():
    rng = np.random.default_rng(11)
    checked = 0
    exact = True
    while checked < 200:
        h = int(rng.integers(4, 65))
        w = int(rng.integers(4, 65))
        bitmap = rng.random((h, w)) < rng.uniform(0.05, 0.6)
        if not bitmap.any():
            continue
        got = distance_field(BinaryMask(bitmap)).values
        want = _brute_distance(bitmap)
        if not np.array_equal(got, want):
            exact = False
            break
        checked += 1
    criterion("distance field vs brute force (200 masks <= 64x64)", exact, f"{checked} masks")


def _literal_aci(prompts, num_frames):
    prompts = sorted(prompts)
    gaps = [b - a for a, b in zip(prompts, prompts[1:])]
    counts = {}
    for g in gaps:
        counts[g] = counts.get(g, 0) + 1
    total = 0
    for i in range(1, num_frames + 1):
        for j in range(1, i + 1):
            total += counts.get(j, 0)
    return total / num_frames


def _records_with_prompts(num_frames, prompts):
    mask = BinaryMask(np.ones((2, 2), dtype=bool))
    return [
        make_record(f, mask, mask, s_r=0.0, user_prompted=f in prompts)
        for f in range(num_frames)
    ]


def test_aci_oracle():
    rng = np.random.default_rng(13)
    exact = True
    for _ in range(500):
        num_frames = int(rng.integers(2, 60))
        count = int(rng.integers(0, min(num_frames, 10)))
        prompts = set(rng.choice(num_frames, size=count, replace=False).tolist())
        got = aci({1: _records_with_prompts(num_frames, prompts)})
        if got != _literal_aci(prompts, num_frames):
            exact = False
            break
    criterion("cumulative-interaction score vs literal double sum (500 sets)", exact)


def _rank_avg(xs):
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def test_spearman_oracle():
    rng = np.random.default_rng(17)
    worst = 0.0
    n_checked = 0
    while n_checked < 200:
        n = int(rng.integers(4, 40))
        xs = rng.integers(0, 7, size=n).astype(float)
        ys = rng.integers(0, 7, size=n).astype(float)
        if np.all(xs == xs[0]) or np.all(ys == ys[0]):
            continue
        rx, ry = _rank_avg(xs.tolist()), _rank_avg(ys.tolist())
        mx, my = sum(rx) / n, sum(ry) / n
        num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
        den = math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))
        want = num / den
        worst = max(worst, abs(spearman(xs, ys) - want))
        n_checked += 1
    criterion(
        "rank correlation vs Pearson-on-average-ranks (200 tied series)",
        worst < 1e-10,
        f"max |diff| = {worst:.2e}",
    )


def test_region_entropy_oracle():
    rng = np.random.default_rng(19)
    exact = True
    for _ in range(100):
        h, w = int(rng.integers(3, 20)), int(rng.integers(3, 20))
        values = rng.random((h, w))
        mask = rng.random((h, w)) < 0.4
        got = region_entropy(EntropyMap(values), BinaryMask(mask))
        picked = [float(values[r, c]) for r in range(h) for c in range(w) if mask[r, c]]
        if not picked:
            if not (got.absent and got.value == 0.0):
                exact = False
                break
        elif got.value != math.fsum(picked) / len(picked):
            exact = False
            break
    criterion("region entropy vs pixel-loop oracle", exact)


# --- 3. metric unit values ----------------------------------------------------


def test_metric_unit_values():
    tol = 1e-4
    a = bits("""
        ##.
        ##.
    """)
    b = bits("""
        .##
        .##
    """)
    iou_ok = abs(iou(a, b) - 1 / 3) < tol

    full = BinaryMask(np.ones((10, 10), dtype=bool))
    empty = BinaryMask(np.zeros((10, 10), dtype=bool))
    half = BinaryMask(np.pad(np.ones((4, 10), dtype=bool), ((0, 6), (0, 0))))
    recs = [
        make_record(0, BinaryMask(np.pad(np.ones((6, 10), dtype=bool), ((0, 4), (0, 0)))), full, s_r=0),
        make_record(1, half, full, s_r=0),
        make_record(2, empty, empty, s_r=0),
        make_record(3, BinaryMask(np.pad(np.ones((8, 10), dtype=bool), ((0, 2), (0, 0)))), full, s_r=0),
    ]
    r_ok = abs(robustness_at({1: recs}, 0.5) - 0.75) < tol

    aci_a = aci({1: _records_with_prompts(10, {2, 5})})
    aci_b = aci({1: _records_with_prompts(10, {2, 3, 4})})
    aci_ok = abs(aci_a - 0.8) < tol and abs(aci_b - 2.0) < tol

    idi_val = idi({1: _records_with_prompts(100, {40})}, fps=5.0)
    idi_ok = abs(idi_val - 9.9) < tol

    rho = spearman([1, 2, 2, 3], [1, 2, 3, 4])
    rho_ok = abs(rho - 0.9487) < tol

    criterion(
        "metric unit values (IoU 1/3, R@0.5 0.75, ACI 0.8/2.0, IDI 9.9s, rank-corr 0.9487)",
        iou_ok and r_ok and aci_ok and idi_ok and rho_ok,
        f"iou={iou_ok} r={r_ok} aci={aci_ok} idi={idi_ok} rho={rho_ok}",
    )


# --- 4. policy tables and baseline degradation --------------------------------


def test_policy_truth_tables():
    import itertools

    cfg_ok = True
    for enable_user, enable_pseudo in itertools.product((False, True), repeat=2):
        cfg = PolicyConfig(enable_user=enable_user, enable_pseudo=enable_pseudo)
        probes = (-0.3, 0.0, 0.19999, 0.2, 0.35, 0.49999, 0.5, 0.8)
        for delta in probes:
            got = decide_interaction(delta, cfg)
            if enable_user and delta >= cfg.tau_u:
                want = InteractionDecision.REQUEST_USER
            elif enable_pseudo and cfg.tau_u > delta >= cfg.tau_p:
                want = InteractionDecision.PSEUDO
            else:
                want = InteractionDecision.NONE
            cfg_ok &= got is want

    gate_ok = True
    for udu, u_idu, p_idu, user_c, pseudo_c, above in itertools.product((False, True), repeat=6):
        cfg = PolicyConfig(enable_udu=udu, enable_user_idu=u_idu, enable_pseudo_idu=p_idu)
        value = 0.81 if above else 0.8  # the gate is strictly greater-than
        s = RegionEntropy(value=value, region_size=5)
        got = memory_gate(s, user_c, cfg, pseudo_c)
        if (user_c and u_idu) or (pseudo_c and p_idu):
            want = MemoryDirective.STORE_REFINED
        elif udu and value > cfg.tau_m:
            want = MemoryDirective.SKIP
        else:
            want = MemoryDirective.STORE_ORIGINAL
        gate_ok &= got is want

    criterion("policy truth tables (interaction bands, memory-gate precedence)", cfg_ok and gate_ok)


def test_baseline_degradation(tmp_path):
    off = EpisodeConfig(policy=PolicyConfig().all_off())
    ok = True
    for kind in ("drift", "distractor", "occlusion"):
        scenario = reference_scenario(kind, frames=40, seed=42)
        synth_generate(scenario, tmp_path / kind)
        manifest = load_manifest(tmp_path / kind / "manifest.json")
        tracker = build_tracker(manifest, tmp_path / kind / "manifest.json")
        log = run_episode(manifest, tracker, OracleRefiner(), off)
        ok &= not log.clicks
        for f in range(1, manifest.num_frames):
            raw = load_probability_map(manifest.frame_entries[f].prob)
            want = extract_object_mask(argmax_labels(raw), 1)
            ok &= bool(np.array_equal(log.records[1][f].pred.bits, want.bits))
        ok &= all(
            ev["directive"] == "store_original" for ev in log.events if ev["frame"] > 0
        )
    criterion("baseline degradation (all toggles off == raw tracker, bit-identical)", ok)


# --- 5. mechanism reproduction -------------------------------------------------


def test_distractor_rescue(tmp_path):
    start = time.monotonic()
    scenario = reference_scenario("distractor", frames=80, seed=42)
    synth_generate(scenario, tmp_path / "d")
    path = tmp_path / "d" / "manifest.json"
    manifest = load_manifest(path)

    on_log = run_episode(manifest, build_tracker(manifest, path), OracleRefiner(), EpisodeConfig())
    off_cfg = EpisodeConfig(policy=PolicyConfig().all_off())
    off_log = run_episode(manifest, build_tracker(manifest, path), OracleRefiner(), off_cfg)

    r_on = robustness_at(on_log.records, 0.5)
    r_off = robustness_at(off_log.records, 0.5)
    users = sum(1 for c in on_log.clicks if c.origin == "user")
    pseudos = sum(1 for c in on_log.clicks if c.origin == "pseudo")
    elapsed = time.monotonic() - start
    criterion(
        "distractor rescue (R@0.5 gap >= 0.05, >=1 user, >=1 pseudo, < 10 s)",
        r_on >= r_off + 0.05 and users >= 1 and pseudos >= 1 and elapsed < 10.0,
        f"R_on={r_on:.3f} R_off={r_off:.3f} users={users} pseudos={pseudos} {elapsed:.1f}s",
    )


def test_drift_proxy_correlation(tmp_path):
    scenario = reference_scenario("drift", frames=64, seed=42)
    synth_generate(scenario, tmp_path / "drift")
    rows = proxy_eval([tmp_path / "drift" / "manifest.json"], [2])
    rho = rows[0]["rho"]
    criterion("drift proxy correlation (inverted rho > 0.9)", rho is not None and rho > 0.9,
              f"rho={rho:.4f}")


# --- 6. kernel sweep ------------------------------------------------------------


def test_kernel_sweep(tmp_path):
    scenario = reference_scenario("drift", frames=64, seed=42)
    synth_generate(scenario, tmp_path / "drift")
    rows = proxy_eval([tmp_path / "drift" / "manifest.json"], [1, 2, 3, 4, 5])
    by_radius = {r["radius"]: r["rho"] for r in rows}
    all_ok = all(v is not None and v > 0.8 for v in by_radius.values())
    best = max(by_radius.values())
    radius2_ok = best - by_radius[2] <= 0.05
    criterion(
        "kernel sweep (rho > 0.8 for radii 1..5; radius 2 within 0.05 of best)",
        all_ok and radius2_ok,
        " ".join(f"r{k}={v:.3f}" for k, v in sorted(by_radius.items())),
    )


# --- 7. determinism --------------------------------------------------------------


def test_benchmark_determinism(tmp_path):
    for kind, seed in (("distractor", 42), ("drift", 7)):
        scenario = reference_scenario(kind, frames=32, seed=seed)
        synth_generate(scenario, tmp_path / f"{kind}{seed}")
    paths = sorted(tmp_path.glob("*/manifest.json"))
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    write_report(run_benchmark(paths, EpisodeConfig()), out1)
    write_report(run_benchmark(paths, EpisodeConfig()), out2)
    criterion("benchmark determinism (byte-identical reports)", out1.read_bytes() == out2.read_bytes())
