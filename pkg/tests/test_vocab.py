from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import iou_oracle, suppress_oracle
from sitewatch.frames import BoundingBox, Detection, FrameRecord
from sitewatch.vocab import (Category, CategoryKind, EvidenceCounts, Tallier, VocabularyConfig,
                             apply_band, canonicalize, dedup, default_vocabulary, iou, tally)

VOCAB = default_vocabulary()


def det(label, conf, x=0, y=0, w=40, h=40):
    return Detection(label, conf, BoundingBox(x, y, w, h))


def frame(*dets):
    return FrameRecord(0, 0, tuple(dets))


def spread(label, conf, n, w=40, h=40):
    return [det(label, conf, x=100 * i, w=w, h=h) for i in range(n)]


# -- canonicalize / bands -----------------------------------------------------

@pytest.mark.parametrize("label, expected", [
    ("green wall", ("construction_wall", CategoryKind.TARGET)),
    ("fire hydrant", ("null", CategoryKind.NULL)),
    ("  Green   WALL ", ("construction_wall", CategoryKind.TARGET)),
    ("scaffolding pole", ("scaffold_pole", CategoryKind.SCAFFOLD_VERTICAL)),
    ("horizontal scaffolding", ("scaffold_horizontal", CategoryKind.SCAFFOLD_HORIZONTAL)),
    ("unicycle", None),
])
def test_canonicalize(label, expected):
    assert canonicalize(label, VOCAB) == expected


@pytest.mark.parametrize("label, conf, keep", [
    ("construction wall", 0.006, True),
    ("construction wall", 0.005, True),
    ("construction wall", 0.004, False),
    ("traffic cone", 0.10, False),
    ("traffic cone", 0.12, True),
    ("traffic cone", 1.0, True),
    ("red traffic barrier", 0.05, False),
    ("white traffic barrier", 0.05, True),
    ("green wall", 0.01, False),
    ("construction barricade", 0.03, True),
    ("scaffolding pole", 0.2, False),
])
def test_apply_band(label, conf, keep):
    assert apply_band(det(label, conf), VOCAB) is keep


def test_apply_band_unknown_label():
    with pytest.raises(KeyError):
        apply_band(det("unicycle", 0.5), VOCAB)


def test_vocabulary_tables():
    assert VOCAB.entries["green wall"] == ("construction_wall", CategoryKind.TARGET)
    assert VOCAB.bands["traffic cone"] == (0.12, 1.0)
    assert VOCAB.bands["dark green wall"] == (0.005, 1.0)


def test_invalid_vocabulary():
    with pytest.raises(ValueError):
        VocabularyConfig((Category("a", CategoryKind.TARGET, ("x",), (0.5, 0.1)),))
    with pytest.raises(ValueError):
        VocabularyConfig((Category("a", CategoryKind.TARGET, ("x",)),
                          Category("b", CategoryKind.TARGET, ("X",))))


# -- iou / dedup --------------------------------------------------------------

def test_iou_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(20, 20, 5, 5)) == 0.0
    assert iou(a, BoundingBox(10, 0, 5, 5)) == 0.0
    assert iou(a, BoundingBox(0, 0, 10, 5)) == 0.5


boxes = st.builds(BoundingBox, st.integers(0, 60), st.integers(0, 60),
                  st.integers(1, 40), st.integers(1, 40))


@settings(max_examples=300, deadline=None)
@given(boxes, boxes)
def test_iou_matches_exact_oracle_and_is_symmetric(a, b):
    assert iou(a, b) == pytest.approx(float(iou_oracle(a, b)), abs=1e-12)
    assert iou(a, b) == iou(b, a)
    assert 0.0 <= iou(a, b) <= 1.0


def test_dedup_examples():
    a, b = det("traffic cone", 0.3), det("traffic cone", 0.2)
    assert dedup([b, a], VOCAB) == [a]
    far = det("traffic cone", 0.2, x=500)
    assert dedup([a, far], VOCAB) == [a, far]
    barrier = det("red traffic barrier", 0.3)
    assert dedup([a, barrier], VOCAB) == [a, barrier]


def test_dedup_merges_descriptors_of_one_category():
    assert len(dedup([det("green wall", 0.4), det("dark green wall", 0.3)], VOCAB)) == 1


def test_dedup_threshold_is_strict():
    # IoU exactly 0.8 survives
    a, b = det("traffic cone", 0.5, w=10, h=10), det("traffic cone", 0.4, w=10, h=8)
    assert iou(a.box, b.box) == 0.8
    assert len(dedup([a, b], VOCAB)) == 2


labels = st.sampled_from(["traffic cone", "construction barricade", "scaffolding pole",
                          "green wall", "car", "unicycle"])
detections = st.lists(st.builds(Detection, labels, st.floats(0, 1), boxes), max_size=12)


@settings(max_examples=300, deadline=None)
@given(detections)
def test_dedup_matches_oracle(ds):
    groups = {}
    for i, d in enumerate(ds):
        entry = canonicalize(d.label, VOCAB)
        groups.setdefault(entry[0] if entry else "?" + d.label, []).append(i)
    expected = []
    for idx in groups.values():
        kept = suppress_oracle([(ds[i].confidence, ds[i].box) for i in idx], 0.8)
        expected += [idx[k] for k in kept]
    assert dedup(ds, VOCAB) == [ds[i] for i in sorted(expected)]


@settings(max_examples=300, deadline=None)
@given(detections)
def test_dedup_idempotent_and_shrinking(ds):
    once = dedup(ds, VOCAB)
    assert dedup(once, VOCAB) == once
    assert len(once) <= len(ds)
    assert all(d in ds for d in once)


# -- tally --------------------------------------------------------------------

def test_tally_scaffold_mix():
    f = frame(*spread("scaffolding pole", 0.6, 3),
              *[det("horizontal scaffolding", 0.5, x=400 + 100 * i) for i in range(2)],
              det("fire hydrant", 0.9, x=900))
    c = tally(f, VOCAB)
    assert (c.scaffold_count, c.object_count) == (5, 0)


def test_tally_empty():
    assert tally(frame(), VOCAB) == EvidenceCounts(0, 0, {}, 0)


def test_tally_band_filter_on_cones():
    f = frame(*spread("traffic cone", 0.15, 4), det("traffic cone", 0.10, x=900))
    c = tally(f, VOCAB)
    assert c.object_count == 4 and dict(c.object_breakdown) == {"traffic_cone": 4}


def test_stacked_objects_counted_once():
    f = frame(det("construction barricade", 0.5), det("construction barricade", 0.4, x=1),
              det("red traffic barricade", 0.3, x=300))
    assert tally(f, VOCAB).object_count == 2


def test_evidence_counts_validation():
    with pytest.raises(ValueError):
        EvidenceCounts(0, 2, {"traffic_cone": 1}, 0)
    with pytest.raises(ValueError):
        EvidenceCounts(-1, 0, {}, 0)


def test_tallier_reuse_matches_tally():
    t = Tallier(VOCAB)
    f = frame(*spread("traffic cone", 0.3, 3))
    assert t(f) == t(f) == tally(f, VOCAB)


nulls = st.lists(st.builds(Detection, st.sampled_from(["car", "tree", "fire hydrant", "bench"]),
                           st.floats(0, 1), boxes), max_size=10)
unknowns = st.lists(st.builds(Detection, st.text(min_size=1, max_size=12), st.floats(0, 1), boxes),
                    max_size=10)


@settings(max_examples=200, deadline=None)
@given(detections, nulls, st.randoms(use_true_random=False))
def test_null_detections_never_change_counts(ds, extra, rnd):
    mixed = ds + extra
    rnd.shuffle(mixed)
    assert tally(frame(*mixed), VOCAB) == tally(frame(*ds), VOCAB)


@settings(max_examples=200, deadline=None)
@given(detections, unknowns)
def test_unknown_labels_never_change_counts(ds, extra):
    extra = [d for d in extra if canonicalize(d.label, VOCAB) is None]
    assert tally(frame(*(extra + ds)), VOCAB) == tally(frame(*ds), VOCAB)


@settings(max_examples=200, deadline=None)
@given(detections, st.sampled_from(["traffic_cone", "traffic_barricade", "construction_wall",
                                    "scaffold_pole"]),
       st.floats(0, 1), st.floats(0, 1))
def test_band_monotonicity(ds, category, lo1, lo2):
    lo_low, lo_high = sorted((lo1, lo2))
    low = tally(frame(*ds), VOCAB.with_band(category, (lo_low, 1.0)))
    high = tally(frame(*ds), VOCAB.with_band(category, (lo_high, 1.0)))

    def count(c):
        if category == "scaffold_pole":
            return c.scaffold_count
        return c.object_breakdown.get(category, 0)

    assert count(low) >= count(high)
