from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dice_oracle
from sitewatch.frames import BoundingBox, FrameRecord, TextObservation
from sitewatch.signs import (SignDictionary, SignMatcher, count_sign_matches, dice_counts,
                             dice_ngram, match_sign, normalize_text)

DICT = SignDictionary()


def text(s, x=0, y=0):
    return TextObservation(s, 0.9, BoundingBox(x, y, 200, 40))


@pytest.mark.parametrize("raw, norm", [
    ("Road Work Ahead", "roadworkahead"),
    ("SIDEWALK  CLOSED!", "sidewalkclosed"),
    ("", ""),
    ("Caution: Construction Zone", "cautionconstructionzone"),
])
def test_normalize(raw, norm):
    assert normalize_text(raw) == norm


def test_dice_examples():
    assert dice_ngram("abc", "abc", 2) == 1.0
    assert dice_ngram("abc", "xyz", 2) == 0.0
    assert dice_counts("roadwrkahead", "roadworkahead") == (20, 23)
    assert dice_ngram("roadwrkahead", "roadworkahead", 2) == 20 / 23
    assert dice_oracle("roadwrkahead", "roadworkahead") == Fraction(20, 23)


def test_short_strings():
    assert dice_ngram("a", "a", 2) == 1.0
    assert dice_ngram("a", "b", 2) == 0.0
    assert dice_ngram("", "abc", 2) == 0.0


def test_multiset_semantics():
    # "aaa" has bigrams {aa, aa}; "aa" has {aa}: 2*1/3
    assert dice_counts("aaa", "aa") == (2, 3)


def test_match_examples():
    m = match_sign(text("roadwrk Ahead"), DICT)
    assert m.matched_entry == "Road Work Ahead" and m.score == pytest.approx(0.8696, abs=1e-4)
    assert match_sign(text("pizza special today"), DICT) is None


def test_score_exactly_at_threshold_is_no_match():
    # "abcdef" vs "abcdex": 4 shared of 5+5 bigrams = 0.8
    assert dice_ngram("abcdef", "abcdex") == 0.8
    assert match_sign(text("abcdeX"), SignDictionary(["abcdef"])) is None
    assert match_sign(text("abcdeX"), SignDictionary(["abcdef"]), threshold=0.79) is not None


def test_count_examples():
    rows = [text("Sidewalk Closed", y=0), text("Ahead", y=50), text("Use Other Side", y=100)]
    assert count_sign_matches(FrameRecord(0, 0, (), tuple(rows)), DICT) >= 2
    assert count_sign_matches(FrameRecord(0, 0), DICT) == 0
    assert count_sign_matches(FrameRecord(0, 0, (), (text("Road Work Ahead"),)), DICT) == 1


def test_split_sign_matches_through_concatenation():
    rows = (text("ROAD", y=0), text("WORK", y=40), text("AHEAD", y=80))
    assert count_sign_matches(FrameRecord(0, 0, (), rows), DICT) == 1
    # reading order follows y, not list order
    assert count_sign_matches(FrameRecord(0, 0, (), rows[::-1]), DICT) == 1


def test_dictionary_validation():
    with pytest.raises(ValueError):
        SignDictionary(["!!!"])
    with pytest.raises(ValueError):
        SignDictionary(["Road Work Ahead", "ROAD-WORK-AHEAD"])


def test_best_prefers_first_entry_on_ties():
    m = SignMatcher(SignDictionary(["abcd", "abce"]))
    assert m.best("abc")[0] == "abcd"


def test_matcher_cache_consistent():
    m = SignMatcher(DICT, cache_size=2)
    for s in ["Road Work Ahead", "road work ahead", "pizza", "Road Work Ahead", "x"]:
        assert m.match_text(s) == match_sign(text(s), DICT)


short = st.text(alphabet="abcdeor", max_size=14)


@settings(max_examples=400, deadline=None)
@given(short, short)
def test_dice_symmetric_in_range_and_matches_oracle(a, b):
    s = dice_ngram(a, b)
    assert s == dice_ngram(b, a)
    assert 0.0 <= s <= 1.0
    assert s == float(dice_oracle(a, b))


@settings(max_examples=300, deadline=None)
@given(short, short)
def test_dice_is_one_iff_same_bigram_multiset(a, b):
    if len(a) >= 2 and len(b) >= 2:
        same = Counter(a[i:i + 2] for i in range(len(a) - 1)) == \
            Counter(b[i:i + 2] for i in range(len(b) - 1))
        assert (dice_ngram(a, b) == 1.0) == same


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(list(DICT) + ["roadwrk Ahead", "Sidewlk Closed", "pizza"]),
       st.lists(st.sampled_from([" ", "!", ".", "-", ":"]), max_size=4),
       st.randoms(use_true_random=False))
def test_match_invariant_under_case_and_punctuation(s, junk, rnd):
    perturbed = "".join(c.upper() if rnd.random() < 0.5 else c.lower() for c in s)
    for j in junk:
        i = rnd.randrange(len(perturbed) + 1)
        perturbed = perturbed[:i] + j + perturbed[i:]
    a, b = match_sign(text(s), DICT), match_sign(text(perturbed), DICT)
    assert (a is None) == (b is None)
    if a is not None:
        assert (a.matched_entry, a.score) == (b.matched_entry, b.score)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz ", min_size=1, max_size=20),
       st.lists(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=2, max_size=20),
                max_size=4, unique=True))
def test_growing_dictionary_keeps_matches(observed, extra):
    base = SignDictionary(DICT.entries)
    known = set(base.normalized)
    extra = [e for e in extra if normalize_text(e) not in known]
    grown = SignDictionary(DICT.entries + tuple(extra))
    if match_sign(text(observed), base) is not None:
        assert match_sign(text(observed), grown) is not None
