"""Detector-label vocabulary, confidence bands, de-duplication and tallying.

Open-vocabulary detectors are prompted with several descriptors per object
("green wall", "dark green wall", ...).  Each descriptor resolves to one
canonical category and a closed confidence band ``[lo, hi]``.  Null-class
descriptors exist only to pull misclassifications away from the targets and
are discarded after lookup.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .frames import BoundingBox, Detection, FrameRecord

DEFAULT_BAND = (0.03, 1.0)
DEFAULT_DEDUP_IOU = 0.8


class CategoryKind(enum.Enum):
    TARGET = "target"
    NULL = "null"
    SCAFFOLD_VERTICAL = "scaffold_vertical"
    SCAFFOLD_HORIZONTAL = "scaffold_horizontal"

    @property
    def is_scaffold(self) -> bool:
        return self in (CategoryKind.SCAFFOLD_VERTICAL, CategoryKind.SCAFFOLD_HORIZONTAL)


class VocabEntry(NamedTuple):
    """What one descriptor resolves to."""
    category: str
    kind: CategoryKind
    lo: float
    hi: float


def normalize_label(label: str) -> str:
    return " ".join(label.split()).casefold()


@dataclass(frozen=True)
class Category:
    name: str
    kind: CategoryKind
    descriptors: tuple[str, ...]
    band: tuple[float, float] = DEFAULT_BAND
    # per-descriptor overrides; thresholds are tuned per prompt term
    descriptor_bands: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def band_for(self, descriptor: str) -> tuple[float, float]:
        return self.descriptor_bands.get(descriptor, self.band)


@dataclass(frozen=True)
class VocabularyConfig:
    categories: tuple[Category, ...]
    _lookup: Mapping[str, VocabEntry] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        for cat in self.categories:
            for bands in (cat.band, *cat.descriptor_bands.values()):
                lo, hi = bands
                if not 0.0 <= lo <= hi <= 1.0:
                    raise ValueError(f"category {cat.name!r}: band {list(bands)} is not 0 <= lo <= hi <= 1")
            for desc in cat.descriptor_bands:
                if desc not in cat.descriptors:
                    raise ValueError(f"category {cat.name!r}: band given for unlisted descriptor {desc!r}")
            for desc in cat.descriptors:
                key = normalize_label(desc)
                if not key:
                    raise ValueError(f"category {cat.name!r}: empty descriptor")
                if key in lookup:
                    raise ValueError(f"descriptor {desc!r} listed twice")
                lo, hi = cat.band_for(desc)
                lookup[key] = VocabEntry(cat.name, cat.kind, lo, hi)
        object.__setattr__(self, "_lookup", MappingProxyType(lookup))

    @property
    def entries(self) -> Mapping[str, tuple[str, CategoryKind]]:
        """Normalized descriptor -> (canonical category, kind)."""
        return {k: (e.category, e.kind) for k, e in self._lookup.items()}

    @property
    def bands(self) -> Mapping[str, tuple[float, float]]:
        """Normalized descriptor -> (lo, hi)."""
        return {k: (e.lo, e.hi) for k, e in self._lookup.items()}

    def lookup(self, label: str) -> Optional[VocabEntry]:
        return self._lookup.get(normalize_label(label))

    def with_band(self, category: str, band: tuple[float, float]) -> "VocabularyConfig":
        """Copy with one category's band (and all its descriptor overrides) replaced."""
        cats = []
        for cat in self.categories:
            if cat.name == category:
                cat = Category(cat.name, cat.kind, cat.descriptors, tuple(band))
            cats.append(cat)
        return VocabularyConfig(tuple(cats))


def default_vocabulary() -> VocabularyConfig:
    """The shipped prompt vocabulary and its confidence bands.

    Descriptors that the band tables never mention fall back to the middle
    band 0.03-1.0.  Scaffold classes come from a dedicated pole detector
    that already runs at confidence 0.25, so their band starts there.
    """
    target, null = CategoryKind.TARGET, CategoryKind.NULL
    return VocabularyConfig((
        Category("traffic_cone", target, ("traffic cone",), (0.12, 1.0)),
        Category(
            "traffic_barrier", target,
            ("orange and white striped traffic barrier", "white traffic barrier",
             "red traffic barrier", "traffic barrier", "orange traffic barrier"),
            (0.12, 1.0),
            {
                "orange and white striped traffic barrier": DEFAULT_BAND,
                "white traffic barrier": DEFAULT_BAND,
                "traffic barrier": DEFAULT_BAND,
            },
        ),
        Category(
            "traffic_barricade", target,
            ("construction barricade", "red traffic barricade",
             "white traffic barricade", "red and white barricade"),
            (0.03, 1.0),
        ),
        Category(
            "construction_wall", target,
            ("green construction wall", "construction wall", "green wall", "dark green wall"),
            (0.005, 1.0),
            {"green wall": DEFAULT_BAND},
        ),
        Category(
            "null", null,
            ("car", "white car", "truck", "bench", "fire hydrant", "computer monitor",
             "tree", "tree canopy", "building", "grass", "grassland"),
            (0.03, 1.0),
        ),
        Category("scaffold_pole", CategoryKind.SCAFFOLD_VERTICAL, ("scaffolding pole",), (0.25, 1.0)),
        Category(
            "scaffold_horizontal", CategoryKind.SCAFFOLD_HORIZONTAL,
            ("horizontal scaffolding",), (0.25, 1.0),
        ),
    ))


# -- per-detection operations -------------------------------------------------

def canonicalize(label: str, vocab: VocabularyConfig) -> Optional[tuple[str, CategoryKind]]:
    """(category, kind) for a detector label, or None when the label is unknown."""
    entry = vocab.lookup(label)
    return None if entry is None else (entry.category, entry.kind)


def apply_band(d: Detection, vocab: VocabularyConfig) -> bool:
    """True when the detection's confidence lies inside its descriptor's closed band."""
    entry = vocab.lookup(d.label)
    if entry is None:
        raise KeyError(f"label {d.label!r} is not in the vocabulary")
    return entry.lo <= d.confidence <= entry.hi


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    if ix <= 0:
        return 0.0
    iy = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    if iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


def _suppress(ds: Sequence[Detection], dedup_iou: float) -> list[int]:
    """Indices of survivors of greedy suppression within one category."""
    order = sorted(range(len(ds)), key=lambda i: -ds[i][1])
    kept: list[tuple] = []
    survivors: list[int] = []
    # same arithmetic as iou(), unrolled; this runs for every multi-box category
    for i in order:
        x, y, w, h = ds[i][2]
        x2, y2, area = x + w, y + h, w * h
        for kx, ky, kx2, ky2, karea in kept:
            ix = (x2 if x2 < kx2 else kx2) - (x if x > kx else kx)
            if ix <= 0:
                continue
            iy = (y2 if y2 < ky2 else ky2) - (y if y > ky else ky)
            if iy <= 0:
                continue
            inter = ix * iy
            if inter / (area + karea - inter) > dedup_iou:
                break
        else:
            kept.append((x, y, x2, y2, area))
            survivors.append(i)
    return survivors


def dedup(ds: Sequence[Detection], vocab: VocabularyConfig,
          dedup_iou: float = DEFAULT_DEDUP_IOU) -> list[Detection]:
    """Greedy per-category suppression of near-identical boxes.

    Within a category the highest-confidence detection is kept and any other
    whose IoU with a kept box exceeds ``dedup_iou`` is dropped.  Detections
    in different categories never suppress each other.  Labels missing from
    the vocabulary are grouped by their normalized label.  Survivors keep
    their input order.
    """
    groups: dict[str, list[int]] = {}
    for i, d in enumerate(ds):
        entry = vocab.lookup(d.label)
        key = entry.category if entry is not None else "?" + normalize_label(d.label)
        groups.setdefault(key, []).append(i)
    survivors = []
    for idx in groups.values():
        if len(idx) == 1:
            survivors.extend(idx)
            continue
        members = [ds[i] for i in idx]
        survivors.extend(idx[k] for k in _suppress(members, dedup_iou))
    return [ds[i] for i in sorted(survivors)]


# -- per-frame tally ----------------------------------------------------------

@dataclass(frozen=True)
class EvidenceCounts:
    scaffold_count: int = 0
    object_count: int = 0
    object_breakdown: Mapping[str, int] = field(default_factory=dict)
    sign_match_count: int = 0

    def __post_init__(self):
        if min(self.scaffold_count, self.object_count, self.sign_match_count) < 0:
            raise ValueError("evidence counts must be non-negative")
        if sum(self.object_breakdown.values()) != self.object_count:
            raise ValueError("object_count must equal the sum of object_breakdown")


class Tallier:
    """Reusable tally over one vocabulary; memoizes label lookups."""

    def __init__(self, vocab: VocabularyConfig, dedup_iou: float = DEFAULT_DEDUP_IOU):
        self.vocab = vocab
        self.dedup_iou = dedup_iou
        self._memo: dict[str, Optional[VocabEntry]] = {}

    def split(self, detections: Iterable[Detection]) -> tuple[int, dict[str, int]]:
        """(scaffold count, per-category object counts) after band filter and dedup."""
        memo = self._memo
        target = CategoryKind.TARGET
        null = CategoryKind.NULL
        groups: dict[str, list[Detection]] = {}
        kinds: dict[str, CategoryKind] = {}
        for d in detections:
            label = d[0]
            try:
                entry = memo[label]
            except KeyError:
                entry = memo[label] = self.vocab.lookup(label)
            if entry is None or entry[1] is null or not entry[2] <= d[1] <= entry[3]:
                continue
            cat = entry[0]
            members = groups.get(cat)
            if members is None:
                groups[cat] = [d]
                kinds[cat] = entry[1]
            else:
                members.append(d)
        scaffold = 0
        breakdown = {}
        for cat, members in groups.items():
            n = 1 if len(members) == 1 else len(_suppress(members, self.dedup_iou))
            if kinds[cat] is target:
                breakdown[cat] = n
            else:
                scaffold += n
        return scaffold, breakdown

    def counts(self, detections: Iterable[Detection]) -> EvidenceCounts:
        scaffold, breakdown = self.split(detections)
        return EvidenceCounts(scaffold, sum(breakdown.values()), breakdown, 0)

    def __call__(self, frame: FrameRecord) -> EvidenceCounts:
        return self.counts(frame.detections)


def tally(frame: FrameRecord, vocab: VocabularyConfig,
          dedup_iou: float = DEFAULT_DEDUP_IOU) -> EvidenceCounts:
    return Tallier(vocab, dedup_iou)(frame)
