import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldtwin.detectors import (
    LddmState,
    Signal,
    ThresholdConfig,
    WindowConfig,
    lddm_update,
    max_error,
    threshold_detect,
    window_detect,
)
from ldtwin.errors import ConfigError


def series_with_errors(n_errors, L=100, big=5.0):
    """Prediction/measurement pair with exactly ``n_errors`` samples off by ``big``."""
    S_m = np.zeros(L)
    S_p = np.zeros(L)
    S_p[:n_errors] = big
    return S_p, S_m


def test_signal_values():
    assert (int(Signal.DRIFT), int(Signal.WARNING), int(Signal.OK)) == (1, 0, -1)


def test_max_error_examples():
    assert max_error([1, 2, 3], [1, 2, 3]) == 0.0
    assert max_error([1, 0, 3], [1, 2, 3]) == 2.0
    with pytest.raises(ValueError):
        max_error([1, 2], [1, 2, 3])


@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=50))
def test_max_error_brute_force(pairs):
    S_p = [a for a, _ in pairs]
    S_m = [b for _, b in pairs]
    best = 0.0
    for a, b in pairs:
        best = max(best, abs(b - a))
    assert max_error(S_p, S_m) == best


@pytest.mark.parametrize("err,expected", [(5, Signal.DRIFT), (3, Signal.WARNING), (1, Signal.OK)])
def test_threshold_examples(err, expected):
    assert threshold_detect([0.0, err], [0.0, 0.0], ThresholdConfig(4, 2)) is expected


@settings(max_examples=200)
@given(
    st.lists(st.floats(-100, 100), min_size=1, max_size=20),
    st.floats(0.01, 50),
    st.floats(0.01, 50),
    st.floats(0.0, 50),
)
def test_threshold_monotone_in_theta_c(S_p, theta_w, theta_c, bump):
    theta_c = max(theta_c, theta_w)
    S_m = [0.0] * len(S_p)
    lo = threshold_detect(S_p, S_m, ThresholdConfig(theta_c, theta_w))
    hi = threshold_detect(S_p, S_m, ThresholdConfig(theta_c + bump, theta_w))
    assert hi <= lo
    assert threshold_detect(S_p, S_m, ThresholdConfig(theta_c, theta_w)) is lo


def test_threshold_config_invariants():
    with pytest.raises(ConfigError):
        ThresholdConfig(2.0, 3.0)
    with pytest.raises(ConfigError):
        ThresholdConfig(2.0, 0.0)


def test_lddm_first_call_clean():
    sig, st_ = lddm_update(LddmState(theta_d=1.0), *series_with_errors(0))
    assert sig is Signal.OK
    assert (st_.p_min, st_.s_min) == (0.0, 0.0)
    assert (st_.error_count, st_.sample_count) == (0, 100)


def test_lddm_std_formula():
    state = LddmState(theta_d=1.0, error_count=0, sample_count=0)
    sig, st_ = lddm_update(state, *series_with_errors(50))
    p = st_.error_count / st_.sample_count
    assert p == 0.5
    assert st_.s_min == pytest.approx(math.sqrt(0.25 / 100)) == pytest.approx(0.05)


def test_lddm_drift_against_registers():
    # registers (0.10, 0.01): drift once p + s >= 0.10 + 3*0.01 = 0.13
    state = LddmState(theta_d=1.0, error_count=10, sample_count=200, p_min=0.10, s_min=0.01, length=100)
    # p = 26/300 = 0.0867, s = 0.0162 -> 0.1029 (no drift);  p = 37/300 -> 0.1423 (drift)
    sig, _ = lddm_update(state, *series_with_errors(16))
    assert sig is Signal.OK
    sig, _ = lddm_update(state, *series_with_errors(27))
    assert sig is Signal.DRIFT


def test_lddm_hand_trace():
    """Error counts 0, 2, 60 out of L = 100; s floor 1/L = 0.01.

    call 1: p=0, s=0 -> registers (0, 0); 0 < 0.02 -> OK
    call 2: p=2/200=0.01, s=sqrt(.01*.99/200)=0.0070356 -> 0.0170356 < 0.02 -> OK
    call 3: p=62/300=0.2066667, s=sqrt(p(1-p)/300)=0.0233777 -> 0.2300444 >= 0.03 -> DRIFT
    """
    state = LddmState(theta_d=1.0)
    signals = []
    trace = []
    for n in (0, 2, 60):
        sig, state = lddm_update(state, *series_with_errors(n))
        signals.append(sig)
        trace.append((state.error_count, state.sample_count, state.p_min, state.s_min))
    assert signals == [Signal.OK, Signal.OK, Signal.DRIFT]
    assert trace[0] == (0, 100, 0.0, 0.0)
    assert trace[1] == (2, 200, 0.0, 0.0)
    assert trace[2] == (0, 0, math.inf, math.inf)  # reset after drift


def test_lddm_warning_band():
    # registers (0, 0), floor 0.01: warning iff 0.02 <= p + s < 0.03
    state = LddmState(theta_d=1.0)
    _, state = lddm_update(state, *series_with_errors(0))
    sig, _ = lddm_update(state, *series_with_errors(3))  # p=.015, s=.0086 -> .0236
    assert sig is Signal.WARNING


def test_lddm_reset_behaves_fresh():
    state = LddmState(theta_d=1.0)
    for n in (0, 2, 60):
        _, state = lddm_update(state, *series_with_errors(n))
    fresh = LddmState(theta_d=1.0)
    for n in (5, 9, 30):
        a, state = lddm_update(state, *series_with_errors(n))
        b, fresh = lddm_update(fresh, *series_with_errors(n))
        assert a is b
        assert (state.error_count, state.sample_count, state.p_min, state.s_min) == (
            fresh.error_count, fresh.sample_count, fresh.p_min, fresh.s_min)


def test_lddm_input_not_mutated():
    state = LddmState(theta_d=1.0)
    lddm_update(state, *series_with_errors(10))
    assert state == LddmState(theta_d=1.0)


def test_lddm_length_checks():
    _, state = lddm_update(LddmState(theta_d=1.0), *series_with_errors(0, L=100))
    with pytest.raises(ValueError):
        lddm_update(state, *series_with_errors(0, L=50))
    with pytest.raises(ValueError):
        lddm_update(state, *series_with_errors(0, L=100), L=99)


def test_lddm_global_denominator():
    state = LddmState(theta_d=1.0, denominator="global")
    for n in (0, 2, 60):
        _, state = lddm_update(state, *series_with_errors(n))
    assert state.experiments_seen == 3
    # after reset, s uses the global count 4*L rather than the reset count L
    _, state = lddm_update(state, *series_with_errors(20))
    assert state.s_min == pytest.approx(math.sqrt(0.2 * 0.8 / 400))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 100), min_size=1, max_size=12),
    st.floats(0.1, 100),
    st.integers(0, 10_000),
)
def test_lddm_scale_invariance(counts, scale, seed):
    rng = np.random.default_rng(seed)
    a = LddmState(theta_d=1.0)
    b = LddmState(theta_d=scale)
    for n in counts:
        resid = rng.uniform(0, 0.99, 100)
        resid[:n] = rng.uniform(1.01, 3.0, n)
        sa, a = lddm_update(a, resid, np.zeros(100))
        sb, b = lddm_update(b, resid * scale, np.zeros(100))
        assert sa is sb


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=1, max_size=15))
def test_lddm_register_monotone_between_resets(counts):
    state = LddmState(theta_d=1.0)
    level = math.inf
    for n in counts:
        sig, state = lddm_update(state, *series_with_errors(n))
        if sig is Signal.DRIFT:
            level = math.inf
            continue
        assert state.p_min + state.s_min <= level
        level = state.p_min + state.s_min


def test_window_examples():
    cfg = WindowConfig(5)
    assert window_detect(5, cfg) is Signal.DRIFT
    assert window_detect(7, cfg) is Signal.OK
    assert window_detect(7, cfg) is window_detect(7, cfg)
    assert all(window_detect(i, WindowConfig(1)) is Signal.DRIFT for i in range(1, 201))
    assert sum(window_detect(i, WindowConfig(10)) is Signal.DRIFT for i in range(1, 201)) == 20
    with pytest.raises(ConfigError):
        WindowConfig(0)
    with pytest.raises(ValueError):
        window_detect(0, cfg)
