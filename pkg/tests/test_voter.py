from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import vote_oracle
from sitewatch.metrics import k_sweep
from sitewatch.sim import flip_noise
from sitewatch.voter import MajorityVoter, smooth_stream

P, N = True, False


def _last(pushes, k):
    v = MajorityVoter(k)
    out = None
    for r in pushes:
        out = v.push(r)
    return out


def test_examples():
    assert _last([P, P, N, P, N], 5) is P
    assert _last([N, N, P, P], 4) is N
    assert _last([P], 50) is P


def test_tie_holds_previous_positive():
    # window [P, P, N, N] after a positive run keeps P
    assert _last([P, P, P, P, N, N], 4) is P


def test_invalid_k():
    with pytest.raises(ValueError):
        MajorityVoter(0)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.booleans(), max_size=200), st.integers(1, 60))
def test_matches_recomputing_oracle(raw, k):
    assert smooth_stream(raw, k) == vote_oracle(raw, k)


@settings(max_examples=200, deadline=None)
@given(st.booleans(), st.integers(0, 300), st.integers(1, 100))
def test_constant_stream_fixpoint(value, n, k):
    assert smooth_stream([value] * n, k) == [value] * n


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 100), st.booleans(), st.integers(0, 3))
def test_bounded_lag_on_steps(k, start, extra):
    before = k + extra
    raw = [start] * before + [not start] * (2 * k)
    out = smooth_stream(raw, k)
    changed = next(i for i in range(before, len(raw)) if out[i] != start)
    assert changed - before <= -(-k // 2)
    assert all(o == (not start) for o in out[changed:])


def test_isolated_flips_removed_after_warm_up():
    k = 50
    truth = [P] * 1000
    raw = list(truth)
    for i in range(10, 1000, 60):
        raw[i] = not raw[i]
    assert smooth_stream(raw, k) == truth


def test_iid_noise_larger_window_is_more_accurate():
    truth = [N] * 10_000
    raw = flip_noise(truth, 0.10, seed=11)
    sweep = k_sweep(raw, truth, [10, 50])
    assert sweep[50].accuracy >= sweep[10].accuracy


def test_causal_window_lags_at_truth_changes():
    # each truth change costs about k/2 frames with a trailing window
    truth = [N] * 500 + [P] * 500
    sweep = k_sweep(truth, truth, [1, 11, 51])
    assert sweep[1].accuracy == 1.0
    assert sweep[11].matrix.fn == 5
    assert sweep[51].matrix.fn == 25
