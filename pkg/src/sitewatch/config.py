"""Pipeline configuration and its JSON file format.

All sections are optional; anything omitted keeps the built-in default::

    {
      "vocabulary": {
        "categories": [{"name": "traffic_cone", "kind": "target",
                        "descriptors": ["traffic cone"], "band": [0.12, 1.0]}],
        "dedup_iou": 0.8
      },
      "sign_dictionary": ["Road Work Ahead"],
      "dice": {"ngram": 2, "threshold": 0.8},
      "thresholds": {"scaffold_min": 5, "objects_min": 3, "signs_min": 1},
      "voter": {"k": 50, "tie": "hold"}
    }

Flat top-level keys named after ``PipelineConfig`` fields (``"voter_k": 10``)
are accepted as well.  A supplied vocabulary or sign dictionary replaces
the default one entirely.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigError
from .signs import DEFAULT_NGRAM, DEFAULT_SIGNS, DEFAULT_THRESHOLD, SignDictionary
from .vocab import (DEFAULT_BAND, DEFAULT_DEDUP_IOU, Category, CategoryKind,
                    VocabularyConfig, default_vocabulary)

DEFAULT_CONFIG_PATH = Path("sitewatch.json")
TIE_POLICIES = ("hold",)


@dataclass(frozen=True)
class PipelineConfig:
    vocabulary: VocabularyConfig = field(default_factory=default_vocabulary)
    sign_dictionary: tuple[str, ...] = DEFAULT_SIGNS
    dice_ngram: int = DEFAULT_NGRAM
    dice_threshold: float = DEFAULT_THRESHOLD
    scaffold_min: int = 5
    objects_min: int = 3
    signs_min: int = 1
    dedup_iou: float = DEFAULT_DEDUP_IOU
    voter_k: int = 50
    voter_tie: str = "hold"

    def __post_init__(self):
        for name in ("scaffold_min", "objects_min", "signs_min"):
            v = getattr(self, name)
            if type(v) is not int or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
        if type(self.dice_ngram) is not int or self.dice_ngram < 1:
            raise ConfigError(f"dice_ngram must be an integer >= 1, got {self.dice_ngram!r}")
        if type(self.voter_k) is not int or self.voter_k < 1:
            raise ConfigError(f"voter_k must be an integer >= 1, got {self.voter_k!r}")
        for name in ("dice_threshold", "dedup_iou"):
            v = getattr(self, name)
            if not _is_fraction(v):
                raise ConfigError(f"{name} must be a number in [0, 1], got {v!r}")
        if self.voter_tie not in TIE_POLICIES:
            raise ConfigError(f"voter tie policy must be one of {TIE_POLICIES}, got {self.voter_tie!r}")
        if self.signs_min > 0 and not self.sign_dictionary:
            raise ConfigError("sign_dictionary is empty but signs_min > 0")
        try:
            SignDictionary(self.sign_dictionary)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def signs(self) -> SignDictionary:
        return SignDictionary(self.sign_dictionary)

    def to_obj(self) -> dict:
        """Sectioned JSON form; ``config_from_obj(cfg.to_obj()) == cfg``."""
        cats = []
        for c in self.vocabulary.categories:
            item = {"name": c.name, "kind": c.kind.value,
                    "descriptors": list(c.descriptors), "band": list(c.band)}
            if c.descriptor_bands:
                item["descriptor_bands"] = {k: list(v) for k, v in c.descriptor_bands.items()}
            cats.append(item)
        return {
            "vocabulary": {"categories": cats, "dedup_iou": self.dedup_iou},
            "sign_dictionary": list(self.sign_dictionary),
            "dice": {"ngram": self.dice_ngram, "threshold": self.dice_threshold},
            "thresholds": {"scaffold_min": self.scaffold_min,
                           "objects_min": self.objects_min,
                           "signs_min": self.signs_min},
            "voter": {"k": self.voter_k, "tie": self.voter_tie},
        }


def _is_fraction(v) -> bool:
    return type(v) in (int, float) and math.isfinite(v) and 0 <= v <= 1


def _band(raw, where: str) -> tuple[float, float]:
    if (not isinstance(raw, list) or len(raw) != 2
            or not all(type(v) in (int, float) for v in raw)):
        raise ConfigError(f"{where}: band must be [lo, hi]")
    lo, hi = float(raw[0]), float(raw[1])
    if lo > hi:
        raise ConfigError(f"{where}: band [{lo}, {hi}] has lo > hi")
    if lo < 0 or hi > 1:
        raise ConfigError(f"{where}: band [{lo}, {hi}] must lie within [0, 1]")
    return lo, hi


def _vocabulary(raw: Any) -> VocabularyConfig:
    if not isinstance(raw, dict) or not isinstance(raw.get("categories"), list):
        raise ConfigError("vocabulary: expected an object with a 'categories' list")
    kinds = {k.value: k for k in CategoryKind}
    cats = []
    for i, item in enumerate(raw["categories"]):
        where = f"vocabulary.categories[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected an object")
        unknown = set(item) - {"name", "kind", "descriptors", "band", "descriptor_bands"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError(f"{where}: name must be a non-empty string")
        kind = kinds.get(item.get("kind"))
        if kind is None:
            raise ConfigError(f"{where}: unknown category kind {item.get('kind')!r}; "
                              f"expected one of {sorted(kinds)}")
        descriptors = item.get("descriptors")
        if (not isinstance(descriptors, list) or not descriptors
                or not all(isinstance(d, str) for d in descriptors)):
            raise ConfigError(f"{where}: descriptors must be a non-empty list of strings")
        if "band" in item:
            band = _band(item["band"], where)
        elif kind is CategoryKind.NULL:
            band = DEFAULT_BAND
        else:
            raise ConfigError(f"{where}: category {name!r} of kind {kind.value} needs a band")
        overrides = {}
        for desc, b in (item.get("descriptor_bands") or {}).items():
            overrides[desc] = _band(b, f"{where}.descriptor_bands[{desc!r}]")
        cats.append(Category(name, kind, tuple(descriptors), band, overrides))
    try:
        return VocabularyConfig(tuple(cats))
    except ValueError as exc:
        raise ConfigError(f"vocabulary: {exc}") from None


_SECTIONS = {"vocabulary", "sign_dictionary", "dice", "thresholds", "voter"}
_FLAT = {f.name for f in fields(PipelineConfig)} - {"vocabulary", "sign_dictionary"}


def config_from_obj(obj: Optional[dict]) -> PipelineConfig:
    if obj is None:
        return PipelineConfig()
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - _SECTIONS - _FLAT
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    values: dict[str, Any] = {}

    def put(key, value, where):
        if key in values and values[key] != value:
            raise ConfigError(f"{key} given twice with different values ({where})")
        values[key] = value

    def section(name, mapping):
        raw = obj.get(name)
        if raw is None:
            return
        if not isinstance(raw, dict):
            raise ConfigError(f"{name}: expected an object")
        extra = set(raw) - set(mapping)
        if extra:
            raise ConfigError(f"{name}: unknown keys {sorted(extra)}")
        for key, target in mapping.items():
            if key in raw:
                put(target, raw[key], f"{name}.{key}")

    if "vocabulary" in obj:
        vocab_raw = obj["vocabulary"]
        values["vocabulary"] = _vocabulary(vocab_raw)
        if "dedup_iou" in vocab_raw:
            put("dedup_iou", vocab_raw["dedup_iou"], "vocabulary.dedup_iou")
        extra = set(vocab_raw) - {"categories", "dedup_iou"}
        if extra:
            raise ConfigError(f"vocabulary: unknown keys {sorted(extra)}")
    if "sign_dictionary" in obj:
        signs = obj["sign_dictionary"]
        if not isinstance(signs, list) or not all(isinstance(s, str) for s in signs):
            raise ConfigError("sign_dictionary must be a list of strings")
        values["sign_dictionary"] = tuple(signs)
    section("dice", {"ngram": "dice_ngram", "threshold": "dice_threshold"})
    section("thresholds", {k: k for k in ("scaffold_min", "objects_min", "signs_min",
                                          "dice_ngram", "dice_threshold", "dedup_iou")})
    section("voter", {"k": "voter_k", "tie": "voter_tie"})
    for key in _FLAT & set(obj):
        put(key, obj[key], key)
    return PipelineConfig(**values)


def load_config(path: Union[str, Path]) -> PipelineConfig:
    """Read a JSON config file.  An empty (or whitespace-only) file means all defaults."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    if not text.strip():
        return PipelineConfig()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_obj(obj)


def resolve_config(path: Optional[Union[str, Path]]) -> PipelineConfig:
    """Config for a CLI invocation.

    An explicit path must exist.  Without one, ``./sitewatch.json`` is used
    when present and the built-in defaults otherwise.
    """
    if path is not None:
        return load_config(path)
    if DEFAULT_CONFIG_PATH.is_file():
        return load_config(DEFAULT_CONFIG_PATH)
    return PipelineConfig()
