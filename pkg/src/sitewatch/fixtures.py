"""Builders for the data files shipped in ``sitewatch/data``.

Run ``python -m sitewatch.fixtures`` to regenerate them; the test suite
checks that the shipped files equal a fresh build.

static_frames.jsonl
    210 frames, one per (site, angle, distance) measurement point at seven
    sites.  Each site is dominated by one kind of evidence: sidewalk shed,
    barrels, barricades, cones, wall dividers, signs, and a mix.  A point
    fails when the evidence seen from there falls short of every pipeline.
    Failures are placed so that per-cell success counts reproduce the
    target distance x angle success grid in ``GRID_SUCCESSES``.
static_points.jsonl
    The same 210 points reduced to ``success`` booleans, as produced by
    replaying ``static_frames.jsonl`` through the default pipeline.
dynamic_pairs.jsonl
    14,865 (truth, predicted) frame pairs from a walk past eight sites with
    tp=2907, fn=886, fp=1151, tn=9921, errors arriving in bursts.
sample_frames.jsonl
    A 100-frame noisy simulated stream for smoke runs.
benchmark_sim.json
    Simulation config for the 100k-frame throughput benchmark.
sitewatch.json
    The default pipeline configuration written out in full.
"""
from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from .config import PipelineConfig
from .engine import DecisionEngine
from .frames import (ANGLES_DEG, DISTANCES_M, BoundingBox, Detection, FrameRecord,
                     GroundTruth, TextObservation, serialize_frame)
from .sim import FRAME_MS, SimConfig, SiteProfile, Span, gen_stream

SITES = {
    1: "sidewalk shed",
    2: "traffic barrels",
    3: "traffic barricades",
    4: "traffic cones",
    5: "wall dividers",
    6: "construction signs",
    7: "mixed elements",
}

# (distance_m, angle_deg) points where the site is missed
STATIC_FAILURES = {
    1: {(8, 75), (10, 75)},
    3: {(6, 75), (8, 45), (8, 75), (10, 30), (10, 45), (10, 60), (10, 75)},
    6: {(6, 0), (8, 0), (8, 15), (8, 60), (8, 75),
        (10, 0), (10, 15), (10, 30), (10, 45), (10, 60), (10, 75)},
    7: {(10, 30), (10, 45), (10, 60), (10, 75)},
}

# target success grid, successes out of 7 sites per (distance, angle)
GRID_SUCCESSES = {
    2: (7, 7, 7, 7, 7, 7),
    4: (7, 7, 7, 7, 7, 7),
    6: (6, 7, 7, 7, 7, 6),
    8: (6, 6, 7, 6, 6, 4),
    10: (6, 6, 4, 4, 4, 3),
}

# target confusion matrix of the dynamic walk
WALK_MATRIX = {"tp": 2907, "fn": 886, "fp": 1151, "tn": 9921}

DATA_FILES = ("static_frames.jsonl", "static_points.jsonl", "dynamic_pairs.jsonl",
              "sample_frames.jsonl", "benchmark_sim.json", "sitewatch.json")


def data_path(name: str) -> Path:
    return Path(str(resources.files("sitewatch") / "data" / name))


# -- static grid --------------------------------------------------------------

class _Row:
    """Lays boxes left to right; farther points give smaller boxes."""

    def __init__(self, distance: int, angle: int):
        self.scale = 2.0 / distance
        self.x = 40 + angle * 8
        self.y = 300 + distance * 20

    def box(self, w: int, h: int) -> BoundingBox:
        w, h = max(4, round(w * self.scale)), max(4, round(h * self.scale))
        b = BoundingBox(self.x, self.y, w, h)
        self.x += w + 10
        return b


def _conf(base: float, distance: int, angle: int) -> float:
    return round(base * (1.0 - 0.03 * (distance - 2)) * (1.0 - angle / 600), 4)


def _site_evidence(site: int, distance: int, angle: int, ok: bool):
    row = _Row(distance, angle)
    c = lambda base: _conf(base, distance, angle)  # noqa: E731
    dets: list[Detection] = []
    texts: list[TextObservation] = []
    add = lambda label, conf, w, h: dets.append(Detection(label, conf, row.box(w, h)))  # noqa: E731

    if site == 1:
        poles, bars = (4, 2) if ok else (3, 1)
        for _ in range(poles):
            add("scaffolding pole", c(0.8), 40, 360)
        for _ in range(bars):
            add("horizontal scaffolding", c(0.6), 360, 30)
        add("tree", 0.41, 200, 400)
    elif site == 2:
        for _ in range(4):
            add("orange and white striped traffic barrier", c(0.09), 120, 200)
        add("car", 0.62, 400, 220)
    elif site == 3:
        for label in ("construction barricade", "red traffic barricade"):
            add(label, c(0.07), 300, 160)
        # third barricade drops under its band at the failing points
        add("white traffic barricade", c(0.06) if ok else 0.02, 300, 160)
        add("white car", 0.35, 400, 220)
    elif site == 4:
        for _ in range(5):
            add("traffic cone", c(0.35), 70, 120)
        add("traffic cone", 0.08, 70, 120)
        add("fire hydrant", 0.44, 60, 110)
    elif site == 5:
        for label in ("green construction wall", "dark green wall", "construction wall"):
            add(label, c(0.012), 400, 250)
        add("grassland", 0.21, 500, 100)
    elif site == 6:
        if distance == 2:
            for line in ("SIDEWALK CLOSED", "AHEAD", "USE OTHER SIDE"):
                texts.append(TextObservation(line, 0.91, row.box(400, 60)))
        elif distance == 4:
            texts.append(TextObservation("ROAD WORK AHEAD", 0.88, row.box(500, 60)))
        else:
            # unreadable at range; the cones around the sign decide
            texts.append(TextObservation("RD WK AHD", 0.41, row.box(500, 60)))
            for _ in range(3 if ok else 2):
                add("traffic cone", c(0.3), 70, 120)
        texts.append(TextObservation("PIZZA SLICE $1", 0.77, row.box(300, 50)))
    elif site == 7:
        # failing points show 4 poles and 2 cones: neither pipeline reaches its minimum
        for _ in range(5 if ok else 4):
            add("scaffolding pole", c(0.7), 40, 360)
        for _ in range(2):
            add("traffic cone", c(0.3), 70, 120)
        if distance <= 4:
            texts.append(TextObservation("CONSTRUCTION ZONE", 0.9, row.box(500, 60)))
    else:
        raise ValueError(f"unknown site {site}")
    return tuple(dets), tuple(texts)


def build_static_frames() -> list[FrameRecord]:
    frames = []
    for site in SITES:
        failures = STATIC_FAILURES.get(site, set())
        for angle in ANGLES_DEG:
            for distance in DISTANCES_M:
                ok = (distance, angle) not in failures
                dets, texts = _site_evidence(site, distance, angle, ok)
                i = len(frames)
                frames.append(FrameRecord(i, round(i * FRAME_MS), dets, texts,
                                          GroundTruth(True, site, angle, distance)))
    return frames


def static_points(frames, cfg: PipelineConfig = None) -> list[dict]:
    """Replay static frames and reduce each to an evaluation point."""
    engine = DecisionEngine(cfg)
    out = []
    for f in frames:
        t = f.truth
        out.append({"site_id": t.site_id, "angle_deg": t.angle_deg,
                    "distance_m": t.distance_m, "success": engine(f).construction})
    return out


# -- dynamic walk -------------------------------------------------------------

def _split(total: int, parts: int, rng: random.Random) -> list[int]:
    weights = [0.5 + rng.random() for _ in range(parts)]
    s = sum(weights)
    sizes = [int(total * w / s) for w in weights]
    sizes[-1] += total - sum(sizes)
    return sizes


def _flip_bursts(positions: list[int], target: int, rng: random.Random,
                 max_len: int, flipped: set) -> None:
    done = 0
    while done < target:
        start = int(rng.random() * len(positions))
        length = 1 + int(rng.random() * max_len)
        for p in positions[start:start + length]:
            if p not in flipped:
                flipped.add(p)
                done += 1
                if done == target:
                    return


def build_dynamic_pairs(seed: int = 14865) -> list[dict]:
    rng = random.Random(seed)
    n_pos = WALK_MATRIX["tp"] + WALK_MATRIX["fn"]
    n_neg = WALK_MATRIX["fp"] + WALK_MATRIX["tn"]
    sites = 8
    pos_sizes = _split(n_pos, sites, rng)
    neg_sizes = _split(n_neg, sites + 1, rng)
    truth = []
    for i in range(sites):
        truth += [False] * neg_sizes[i] + [True] * pos_sizes[i]
    truth += [False] * neg_sizes[-1]
    flipped: set = set()
    _flip_bursts([i for i, t in enumerate(truth) if t], WALK_MATRIX["fn"], rng, 40, flipped)
    _flip_bursts([i for i, t in enumerate(truth) if not t], WALK_MATRIX["fp"], rng, 25, flipped)
    return [{"frame_id": i, "truth": t, "predicted": t != (i in flipped)}
            for i, t in enumerate(truth)]


# -- simulated streams --------------------------------------------------------

def sample_sim_config() -> SimConfig:
    return SimConfig(
        n_frames=100,
        spans=(Span(20, 55, SiteProfile(scaffold=6, objects=1)),
               Span(70, 95, SiteProfile(objects=4, signs=1))),
        miss_rate=0.08, fp_rate=0.05, burst_drop=(0.02, 4), ocr_garble_rate=0.05,
        stack_rate=0.1, null_clutter=2, unknown_clutter=2, seed=100,
    )


def benchmark_sim_obj() -> dict:
    """100k frames; a quarter of them inside construction spans."""
    spans = []
    profiles = [
        {"scaffold": 8, "objects": 2, "signs": 0},
        {"scaffold": 0, "objects": 6, "signs": 1},
        {"scaffold": 6, "objects": 4, "signs": 2},
        {"scaffold": 0, "objects": 0, "signs": 2},
    ]
    for j in range(40):
        start = 1000 + j * 2500
        spans.append({"start": start, "end": start + 625, "profile": profiles[j % len(profiles)]})
    return {
        "n_frames": 100000,
        "seed": 2025,
        "spans": spans,
        "miss_rate": 0.1,
        "fp_rate": 0.05,
        "burst_drop": {"probability": 0.01, "max_length": 8},
        "ocr_garble_rate": 0.05,
        "stack_rate": 0.1,
        "clutter": {"null": 6, "unknown": 4},
    }


# -- writing ------------------------------------------------------------------

def _jsonl(objs) -> str:
    return "".join(json.dumps(o, separators=(",", ":")) + "\n" for o in objs)


def build_all() -> dict[str, str]:
    """File name -> exact file content."""
    static = build_static_frames()
    sample, _ = gen_stream(sample_sim_config())
    return {
        "static_frames.jsonl": "".join(serialize_frame(f) + "\n" for f in static),
        "static_points.jsonl": _jsonl(static_points(static)),
        "dynamic_pairs.jsonl": _jsonl(build_dynamic_pairs()),
        "sample_frames.jsonl": "".join(serialize_frame(f) + "\n" for f in sample),
        "benchmark_sim.json": json.dumps(benchmark_sim_obj(), indent=1) + "\n",
        "sitewatch.json": json.dumps(PipelineConfig().to_obj(), indent=2) + "\n",
    }


def write_all(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, content in build_all().items():
        (directory / name).write_text(content, encoding="utf-8")


if __name__ == "__main__":
    write_all(Path(__file__).parent / "data")
