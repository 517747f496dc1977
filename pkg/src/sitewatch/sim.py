"""Seeded synthetic frame streams with ground truth.

Randomness comes from ``random.Random(seed)`` (Mersenne Twister) and only
its ``random()`` method is called, whose output for a given integer seed is
stable across platforms and Python versions.  Every frame consumes the same
number of draws whatever the noise rates are, so streams generated with
different rates from one seed share their random numbers: raising
``miss_rate`` only ever removes detections.

Boxes sit on a 1920x1080 canvas split into 120 px slots; distinct objects
never overlap.  A stacked duplicate is the one exception: it is offset by
one pixel so that de-duplication removes it.
"""
from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError
from .frames import BoundingBox, Detection, FrameRecord, GroundTruth, TextObservation
from .signs import DEFAULT_SIGNS
from .vocab import CategoryKind, VocabularyConfig, default_vocabulary

CANVAS_W, CANVAS_H = 1920, 1080
SLOT = 120
_COLS, _ROWS = CANVAS_W // SLOT, CANVAS_H // SLOT
N_SLOTS = _COLS * _ROWS
_STEPS = tuple(s for s in range(1, N_SLOTS) if math.gcd(s, N_SLOTS) == 1)
FRAME_MS = 1000 / 30
CONF_CAP = 0.95

DEFAULT_OBJECT_MIX = (
    ("traffic cone", 1.0),
    ("construction barricade", 1.0),
    ("orange and white striped traffic barrier", 1.0),
    ("green construction wall", 1.0),
)
NULL_CLUTTER = ("car", "white car", "truck", "bench", "fire hydrant", "tree", "building")
UNKNOWN_CLUTTER = ("person", "bicycle", "trash bag", "street lamp", "dog", "traffic light")
_SUBSTITUTES = string.ascii_lowercase + string.digits


@dataclass(frozen=True)
class SiteProfile:
    """Expected per-frame evidence inside a construction span."""
    scaffold: int = 0
    objects: int = 0
    signs: int = 0
    horizontal_fraction: float = 0.4
    object_mix: tuple[tuple[str, float], ...] = DEFAULT_OBJECT_MIX
    sign_texts: tuple[str, ...] = DEFAULT_SIGNS


@dataclass(frozen=True)
class Span:
    start: int
    end: int  # exclusive
    profile: SiteProfile = SiteProfile()


@dataclass(frozen=True)
class SimConfig:
    n_frames: int
    spans: tuple[Span, ...] = ()
    miss_rate: float = 0.0
    fp_rate: float = 0.0
    burst_drop: tuple[float, int] = (0.0, 0)
    ocr_garble_rate: float = 0.0
    stack_rate: float = 0.0
    null_clutter: int = 0
    unknown_clutter: int = 0
    seed: int = 0

    def validate(self) -> None:
        if type(self.n_frames) is not int or self.n_frames < 0:
            raise ConfigError(f"n_frames must be a non-negative integer, got {self.n_frames!r}")
        for name in ("miss_rate", "fp_rate", "ocr_garble_rate", "stack_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name} must be a probability, got {v!r}")
        p, max_len = self.burst_drop
        if not 0 <= p <= 1 or type(max_len) is not int or max_len < 0:
            raise ConfigError(f"burst_drop must be (probability, max_length >= 0), got {self.burst_drop!r}")
        if min(self.null_clutter, self.unknown_clutter) < 0:
            raise ConfigError("clutter counts must be non-negative")
        last_end = 0
        for span in sorted(self.spans, key=lambda s: s.start):
            if not 0 <= span.start < span.end <= self.n_frames:
                raise ConfigError(f"span [{span.start}, {span.end}) is empty or outside [0, {self.n_frames})")
            if span.start < last_end:
                raise ConfigError(f"span [{span.start}, {span.end}) overlaps another span")
            last_end = span.end
            prof = span.profile
            if min(prof.scaffold, prof.objects, prof.signs) < 0:
                raise ConfigError("profile counts must be non-negative")
            if not 0 <= prof.horizontal_fraction <= 1:
                raise ConfigError("horizontal_fraction must be in [0, 1]")
            if prof.objects and (not prof.object_mix or sum(w for _, w in prof.object_mix) <= 0):
                raise ConfigError("object_mix needs positive weights")
            if prof.signs and not prof.sign_texts:
                raise ConfigError("sign_texts is empty")
            # worst case: every object stacked, plus clutter, spurious object and texts
            need = 2 * (prof.scaffold + prof.objects) + prof.signs + self.null_clutter + self.unknown_clutter + 1
            if need > N_SLOTS:
                raise ConfigError(f"profile needs up to {need} slots; the canvas has {N_SLOTS}")


def truth_vector(cfg: SimConfig) -> list[bool]:
    truth = [False] * cfg.n_frames
    for span in cfg.spans:
        truth[span.start:span.end] = [True] * (span.end - span.start)
    return truth


def flip_noise(decisions: Sequence[bool], rate: float, seed: int) -> list[bool]:
    """Flip each decision independently with probability ``rate``.

    Models an i.i.d. noisy per-frame classifier; one draw per frame.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must be a probability, got {rate!r}")
    rng = random.Random(seed)
    return [d != (rng.random() < rate) for d in decisions]


# -- text corruption ----------------------------------------------------------

def _garble(text: str, rate: float, rng: random.Random) -> str:
    banned = set(text.casefold())
    pool = [c for c in _SUBSTITUTES if c not in banned] or list(_SUBSTITUTES)
    out = []
    for ch in text:
        hit, kind, pick = rng.random(), rng.random(), rng.random()
        if hit >= rate:
            out.append(ch)
        elif kind >= 0.5:
            out.append(pool[int(pick * len(pool))])
        # else: deleted
    return "".join(out)


def garble(text: str, rate: float, seed: int) -> str:
    """Delete or substitute each character independently with probability ``rate``.

    Substitutes are drawn from letters and digits that do not occur in the
    original text.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must be a probability, got {rate!r}")
    return _garble(text, rate, random.Random(seed))


# -- stream generation --------------------------------------------------------

def _pick(weights: Sequence[tuple[str, float]], u: float) -> str:
    total = sum(w for _, w in weights)
    acc = 0.0
    for item, w in weights:
        acc += w / total
        if u < acc:
            return item
    return weights[-1][0]


class _Canvas:
    """Hands out distinct slots in a per-frame pseudo-random order."""

    def __init__(self, u_start: float, u_step: float):
        self.start = int(u_start * N_SLOTS)
        self.step = _STEPS[int(u_step * len(_STEPS))]
        self.i = 0

    def place(self, w: int, h: int, ux: float, uy: float) -> BoundingBox:
        slot = (self.start + self.i * self.step) % N_SLOTS
        self.i += 1
        col, row = slot % _COLS, slot // _COLS
        x = col * SLOT + int(ux * (SLOT - w))
        y = row * SLOT + int(uy * (SLOT - h))
        return BoundingBox(x, y, w, h)


_SIZES = {
    "scaffolding pole": (24, 110),
    "horizontal scaffolding": (110, 20),
}
_DEFAULT_SIZE = (60, 80)
_TEXT_SIZE = (110, 30)


def _in_band(lo: float, u: float) -> float:
    conf = math.ceil((lo + (CONF_CAP - lo) * u) * 10000) / 10000
    return max(conf, lo)


def _below_band(lo: float, u: float) -> float:
    return math.floor(lo * u * 10000) / 10000


class _FrameBuilder:
    def __init__(self, cfg: SimConfig, vocab: VocabularyConfig, rng: random.Random):
        self.cfg = cfg
        self.vocab = vocab
        self.rng = rng
        self.fp_mix = tuple((c, 1.0) for c in _target_descriptors(vocab)) or DEFAULT_OBJECT_MIX

    def _lo(self, label: str) -> float:
        entry = self.vocab.lookup(label)
        return entry.lo if entry is not None else 0.0

    def _object(self, label, canvas, dets, u_miss, u_conf, ux, uy, u_stack):
        miss = self.cfg.miss_rate
        lo = self._lo(label)
        w, h = _SIZES.get(label, _DEFAULT_SIZE)
        box = canvas.place(w, h, ux, uy)
        if u_miss < miss:
            # half the misses still reach the output with a sub-band score
            if u_miss < miss / 2 and lo > 0:
                dets.append(Detection(label, _below_band(lo, u_conf), box))
            return
        conf = _in_band(lo, u_conf)
        dets.append(Detection(label, conf, box))
        if u_stack < self.cfg.stack_rate:
            # 1 px keeps IoU above 0.8 even for 24 px wide poles
            dets.append(Detection(label, max(lo, round(conf - 0.01, 4)),
                                  BoundingBox(box.x + 1, box.y + 1, w, h)))

    def frame(self, i: int, profile: Optional[SiteProfile], dropped: bool, truth: bool) -> FrameRecord:
        r = self.rng.random
        cfg = self.cfg
        canvas = _Canvas(r(), r())
        dets: list[Detection] = []
        texts: list[TextObservation] = []
        if profile is not None:
            n_horizontal = round(profile.scaffold * profile.horizontal_fraction)
            for j in range(profile.scaffold):
                label = "horizontal scaffolding" if j < n_horizontal else "scaffolding pole"
                self._object(label, canvas, dets, r(), r(), r(), r(), r())
            for _ in range(profile.objects):
                u_miss, u_desc = r(), r()
                label = _pick(profile.object_mix, u_desc)
                self._object(label, canvas, dets, u_miss, r(), r(), r(), r())
            for _ in range(profile.signs):
                u_miss, u_text, u_conf, ux, uy = r(), r(), r(), r(), r()
                text = profile.sign_texts[int(u_text * len(profile.sign_texts))]
                text = _garble(text, cfg.ocr_garble_rate, self.rng)
                box = canvas.place(*_TEXT_SIZE, ux, uy)
                if u_miss >= cfg.miss_rate and text:
                    texts.append(TextObservation(text, round(0.6 + 0.39 * u_conf, 4), box))
        u_fp, u_desc, u_conf, ux, uy = r(), r(), r(), r(), r()
        if u_fp < cfg.fp_rate:
            label = _pick(self.fp_mix, u_desc)
            box = canvas.place(*_SIZES.get(label, _DEFAULT_SIZE), ux, uy)
            dets.append(Detection(label, _in_band(self._lo(label), u_conf), box))
        for pool, n in ((NULL_CLUTTER, cfg.null_clutter), (UNKNOWN_CLUTTER, cfg.unknown_clutter)):
            for _ in range(n):
                u_desc, u_conf, ux, uy = r(), r(), r(), r()
                label = pool[int(u_desc * len(pool))]
                box = canvas.place(*_DEFAULT_SIZE, ux, uy)
                dets.append(Detection(label, round(0.03 + 0.9 * u_conf, 4), box))
        if dropped:
            dets, texts = [], []
        return FrameRecord(i, round(i * FRAME_MS), tuple(dets), tuple(texts), GroundTruth(truth))


def _target_descriptors(vocab: VocabularyConfig) -> list[str]:
    return [d for c in vocab.categories if c.kind is CategoryKind.TARGET for d in c.descriptors]


def gen_stream(cfg: SimConfig, vocab: VocabularyConfig = None) -> tuple[list[FrameRecord], list[bool]]:
    cfg.validate()
    vocab = vocab or default_vocabulary()
    rng = random.Random(cfg.seed)
    builder = _FrameBuilder(cfg, vocab, rng)
    truth = truth_vector(cfg)
    profiles: list[Optional[SiteProfile]] = [None] * cfg.n_frames
    for span in cfg.spans:
        profiles[span.start:span.end] = [span.profile] * (span.end - span.start)
    burst_p, burst_max = cfg.burst_drop
    burst_left = 0
    frames = []
    for i in range(cfg.n_frames):
        u_start, u_len = rng.random(), rng.random()
        if burst_left == 0 and burst_max > 0 and u_start < burst_p:
            burst_left = 1 + int(u_len * burst_max)
        dropped = burst_left > 0
        if dropped:
            burst_left -= 1
        frames.append(builder.frame(i, profiles[i], dropped, truth[i]))
    return frames, truth


# -- JSON form ----------------------------------------------------------------

def _profile_from_obj(obj: dict, where: str) -> SiteProfile:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {"scaffold", "objects", "signs", "horizontal_fraction", "object_mix", "sign_texts"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    kwargs = {k: obj[k] for k in ("scaffold", "objects", "signs", "horizontal_fraction") if k in obj}
    for k in ("scaffold", "objects", "signs"):
        if k in kwargs and type(kwargs[k]) is not int:
            raise ConfigError(f"{where}.{k} must be an integer")
    if "object_mix" in obj:
        mix = obj["object_mix"]
        if not isinstance(mix, dict):
            raise ConfigError(f"{where}.object_mix must map descriptor to weight")
        kwargs["object_mix"] = tuple((str(k), float(v)) for k, v in mix.items())
    if "sign_texts" in obj:
        kwargs["sign_texts"] = tuple(obj["sign_texts"])
    return SiteProfile(**kwargs)


def sim_config_from_obj(obj: dict) -> SimConfig:
    if not isinstance(obj, dict):
        raise ConfigError("simulation config must be a JSON object")
    known = {"n_frames", "seed", "spans", "miss_rate", "fp_rate", "burst_drop",
             "ocr_garble_rate", "stack_rate", "clutter"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"unknown simulation keys: {sorted(extra)}")
    if "n_frames" not in obj:
        raise ConfigError("n_frames is required")
    spans = []
    for i, s in enumerate(obj.get("spans", [])):
        if not isinstance(s, dict) or type(s.get("start")) is not int or type(s.get("end")) is not int:
            raise ConfigError(f"spans[{i}]: needs integer start and end")
        spans.append(Span(s["start"], s["end"], _profile_from_obj(s.get("profile", {}), f"spans[{i}].profile")))
    burst = obj.get("burst_drop", {})
    clutter = obj.get("clutter", {})
    try:
        cfg = SimConfig(
            n_frames=obj["n_frames"],
            spans=tuple(spans),
            miss_rate=float(obj.get("miss_rate", 0.0)),
            fp_rate=float(obj.get("fp_rate", 0.0)),
            burst_drop=(float(burst.get("probability", 0.0)), burst.get("max_length", 0)),
            ocr_garble_rate=float(obj.get("ocr_garble_rate", 0.0)),
            stack_rate=float(obj.get("stack_rate", 0.0)),
            null_clutter=clutter.get("null", 0),
            unknown_clutter=clutter.get("unknown", 0),
            seed=obj.get("seed", 0),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"simulation config: {exc}") from None
    cfg.validate()
    return cfg
