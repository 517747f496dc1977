"""Three independent evidence pipelines combined by disjunction.

A frame is a construction site when any one pipeline fires:

* scaffold: at least ``scaffold_min`` scaffolding poles (vertical or horizontal),
* objects:  at least ``objects_min`` construction objects,
* sign:     at least ``signs_min`` dictionary-matched sign texts.

Counts are never pooled across pipelines.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

from .config import PipelineConfig
from .frames import FrameRecord
from .signs import SignMatcher
from .vocab import EvidenceCounts, Tallier


class Pipeline(str, enum.Enum):
    SCAFFOLD = "scaffold"
    OBJECTS = "objects"
    SIGN = "sign"


@dataclass(frozen=True)
class Decision:
    construction: bool
    fired_pipelines: tuple[Pipeline, ...]
    counts: EvidenceCounts

    def to_obj(self, frame_id: int) -> dict:
        c = self.counts
        return {
            "frame_id": frame_id,
            "construction": self.construction,
            "pipelines": [p.value for p in self.fired_pipelines],
            "counts": {"scaffold": c.scaffold_count, "objects": c.object_count,
                       "signs": c.sign_match_count},
        }


def evaluate_frame(counts: EvidenceCounts, cfg: PipelineConfig) -> Decision:
    fired = []
    if counts.scaffold_count >= cfg.scaffold_min:
        fired.append(Pipeline.SCAFFOLD)
    if counts.object_count >= cfg.objects_min:
        fired.append(Pipeline.OBJECTS)
    if counts.sign_match_count >= cfg.signs_min:
        fired.append(Pipeline.SIGN)
    return Decision(bool(fired), tuple(fired), counts)


class DecisionEngine:
    """Frame -> Decision with the vocabulary and sign caches kept warm."""

    def __init__(self, cfg: PipelineConfig = None):
        self.cfg = cfg or PipelineConfig()
        self.tallier = Tallier(self.cfg.vocabulary, self.cfg.dedup_iou)
        self.matcher = SignMatcher(self.cfg.signs(), self.cfg.dice_ngram, self.cfg.dice_threshold)

    def counts(self, frame: FrameRecord) -> EvidenceCounts:
        scaffold, breakdown = self.tallier.split(frame.detections)
        signs = self.matcher.count(frame.texts) if frame.texts else 0
        return EvidenceCounts(scaffold, sum(breakdown.values()), breakdown, signs)

    def __call__(self, frame: FrameRecord) -> Decision:
        return evaluate_frame(self.counts(frame), self.cfg)


def evaluate_stream(frames: Iterable[FrameRecord],
                    cfg: PipelineConfig = None) -> Iterator[tuple[int, Decision]]:
    engine = DecisionEngine(cfg)
    for frame in frames:
        yield frame.frame_id, engine(frame)


def decision_line(frame_id: int, decision: Decision, smoothed: bool = None) -> str:
    """Decision JSONL line, formatted by hand (this is on the per-frame hot path).

    With ``smoothed`` given, ``construction`` carries the voted verdict and
    the per-frame verdict moves to ``raw``.
    """
    c = decision.counts
    pipelines = ",".join(f'"{p.value}"' for p in decision.fired_pipelines)
    head = (f'{{"frame_id":{frame_id},"construction":'
            f'{_JSON_BOOL[decision.construction if smoothed is None else smoothed]},'
            f'"pipelines":[{pipelines}],'
            f'"counts":{{"scaffold":{c.scaffold_count},"objects":{c.object_count},'
            f'"signs":{c.sign_match_count}}}')
    if smoothed is None:
        return head + "}"
    return f'{head},"raw":{_JSON_BOOL[decision.construction]}}}'


_JSON_BOOL = {True: "true", False: "false"}
