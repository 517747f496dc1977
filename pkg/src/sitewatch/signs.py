"""OCR text filtering against a dictionary of construction-sign strings.

Texts are compared with the Sørensen-Dice coefficient over character
n-grams (bigrams by default) after stripping everything but letters and
digits.  A text matches when its best score strictly exceeds the threshold.
"""
from __future__ import annotations

from collections import Counter
from typing import Iterable, NamedTuple, Optional, Sequence

from .frames import FrameRecord, TextObservation

DEFAULT_SIGNS = (
    "Authorized Personnel Only",
    "Caution: Construction Zone",
    "Road Work Ahead",
    "Construction Zone",
    "Sidewalk Closed",
    "Sidewalk Closed Ahead",
    "Use Other Side",
)
DEFAULT_NGRAM = 2
DEFAULT_THRESHOLD = 0.8


def normalize_text(s: str) -> str:
    return "".join(ch for ch in s.casefold() if ch.isalnum())


def ngrams(s: str, n: int) -> Counter:
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def dice_counts(a: str, b: str, n: int = DEFAULT_NGRAM) -> tuple[int, int]:
    """(2 * shared n-grams, total n-grams) with multiset semantics."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ga, gb = ngrams(a, n), ngrams(b, n)
    shared = sum((ga & gb).values())
    return 2 * shared, sum(ga.values()) + sum(gb.values())


def dice_ngram(a: str, b: str, n: int = DEFAULT_NGRAM) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(a) < n or len(b) < n:
        return 1.0 if a == b else 0.0
    num, den = dice_counts(a, b, n)
    return num / den


class SignMatch(NamedTuple):
    observed: str
    matched_entry: str
    score: float


class SignDictionary:
    """Canonical sign strings; entries must stay distinct after normalization."""

    def __init__(self, entries: Iterable[str] = DEFAULT_SIGNS):
        self.entries = tuple(entries)
        self.normalized = tuple(normalize_text(e) for e in self.entries)
        seen = {}
        for raw, norm in zip(self.entries, self.normalized):
            if not norm:
                raise ValueError(f"sign entry {raw!r} has no letters or digits")
            if norm in seen:
                raise ValueError(f"sign entries {seen[norm]!r} and {raw!r} coincide after normalization")
            seen[norm] = raw

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return isinstance(other, SignDictionary) and self.entries == other.entries

    def __repr__(self):
        return f"SignDictionary({list(self.entries)!r})"


class SignMatcher:
    """Best-entry lookup with per-string memoization.

    OCR output repeats heavily across consecutive frames, so results are
    cached under both the raw and the normalized text.
    """

    def __init__(self, dictionary: SignDictionary, ngram: int = DEFAULT_NGRAM,
                 threshold: float = DEFAULT_THRESHOLD, cache_size: int = 65536):
        if ngram < 1:
            raise ValueError("ngram must be >= 1")
        self.dictionary = dictionary
        self.ngram = ngram
        self.threshold = threshold
        self._profiles = [(e, norm, ngrams(norm, ngram)) for e, norm in
                          zip(dictionary.entries, dictionary.normalized)]
        self._cache: dict[str, Optional[tuple[str, float]]] = {}
        self._cache_size = cache_size

    def best(self, normalized: str) -> Optional[tuple[str, float]]:
        """Highest-scoring entry for an already-normalized string (first wins ties)."""
        n = self.ngram
        best_entry, best_score = None, -1.0
        if len(normalized) < n:
            for entry, norm, _ in self._profiles:
                score = 1.0 if norm == normalized else 0.0
                if score > best_score:
                    best_entry, best_score = entry, score
        else:
            grams = ngrams(normalized, n)
            size = len(normalized) - n + 1
            for entry, norm, prof in self._profiles:
                if len(norm) < n:
                    score = 0.0
                else:
                    shared = sum((grams & prof).values())
                    score = 2 * shared / (size + len(norm) - n + 1)
                if score > best_score:
                    best_entry, best_score = entry, score
        return None if best_entry is None else (best_entry, best_score)

    def _hit(self, text: str) -> Optional[tuple[str, float]]:
        cache = self._cache
        try:
            return cache[text]
        except KeyError:
            pass
        norm = normalize_text(text)
        try:
            hit = cache[norm]
        except KeyError:
            best = self.best(norm)
            hit = best if best is not None and best[1] > self.threshold else None
        if len(cache) >= self._cache_size:
            cache.clear()
        cache[norm] = cache[text] = hit
        return hit

    def match_text(self, text: str) -> Optional[SignMatch]:
        hit = self._hit(text)
        return None if hit is None else SignMatch(text, hit[0], hit[1])

    def count(self, texts: Sequence[TextObservation]) -> int:
        """Matched rows, plus one if the whole frame read top-to-bottom matches.

        The concatenated candidate is only formed when the frame holds two or
        more texts, so a single-row sign is never counted twice.
        """
        hit = self._hit
        n = 0
        for t in texts:
            if hit(t[0]) is not None:
                n += 1
        if len(texts) > 1:
            ordered = sorted(texts, key=lambda t: (t.box.y, t.box.x))
            if hit(" ".join(t.string for t in ordered)) is not None:
                n += 1
        return n


def match_sign(obs: TextObservation, dictionary: SignDictionary,
               ngram: int = DEFAULT_NGRAM, threshold: float = DEFAULT_THRESHOLD) -> Optional[SignMatch]:
    return SignMatcher(dictionary, ngram, threshold).match_text(obs.string)


def count_sign_matches(frame: FrameRecord, dictionary: SignDictionary,
                       ngram: int = DEFAULT_NGRAM, threshold: float = DEFAULT_THRESHOLD) -> int:
    return SignMatcher(dictionary, ngram, threshold).count(frame.texts)
