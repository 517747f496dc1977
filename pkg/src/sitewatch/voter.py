"""Causal K-frame majority voting over per-frame decisions."""
from __future__ import annotations

from collections import deque
from typing import Iterable


class MajorityVoter:
    """Trailing-window majority vote.

    The window holds the most recent ``k`` raw decisions.  Until it fills,
    the vote is over whatever has arrived.  An exact tie repeats the
    previous output, which starts out negative.
    """

    __slots__ = ("k", "window", "positives", "last_output")

    def __init__(self, k: int):
        if type(k) is not int or k < 1:
            raise ValueError(f"k must be an integer >= 1, got {k!r}")
        self.k = k
        self.window: deque[bool] = deque()
        self.positives = 0
        self.last_output = False

    def push(self, raw: bool) -> bool:
        raw = bool(raw)
        window = self.window
        if len(window) == self.k:
            self.positives -= window.popleft()
        window.append(raw)
        self.positives += raw
        negatives = len(window) - self.positives
        if self.positives != negatives:
            self.last_output = self.positives > negatives
        return self.last_output


def smooth_stream(decisions: Iterable[bool], k: int) -> list[bool]:
    voter = MajorityVoter(k)
    return [voter.push(d) for d in decisions]
