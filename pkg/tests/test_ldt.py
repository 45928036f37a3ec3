import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ldtwin.ldt as ldt
from ldtwin.config import CampaignConfig, DetectorConfig, ModelConfig
from ldtwin.detectors import Signal
from ldtwin.errors import CampaignError
from ldtwin.hybrid import HybridModel
from ldtwin.ldt import (
    CampaignRow,
    compute_mme,
    compute_precision_recall,
    model_digest,
    per_e_table,
    run_baseline,
    run_campaign,
    sweep_thresholds,
)
from ldtwin.rotor_sim import ScheduleConfig, SignalConfig, generate_stream

SMALL = CampaignConfig(
    schedule=ScheduleConfig(n_experiments=12, segment_min=3, segment_max=5),
    signal=SignalConfig(length=400),
    model=ModelConfig(kind="linear"),
    detector=DetectorConfig(kind="threshold", theta_c=2.0),
    seed=5,
)


@pytest.fixture(scope="module")
def stream():
    return generate_stream(SMALL.rotor, SMALL.schedule, SMALL.signal, SMALL.seed)


def rows_from(n, onsets, drifts, errors=None):
    errors = errors or [0.0] * n
    return [
        CampaignRow(i, 0.0, i in onsets, errors[i - 1], Signal.DRIFT if i in drifts else Signal.OK, i in drifts)
        for i in range(1, n + 1)
    ]


def brute_precision_recall(onsets, drifts, window=5):
    if not onsets or not drifts:
        return 0.0, 0.0
    hit = 0
    for j in onsets:
        if any(j <= i <= j + window for i in drifts):
            hit += 1
    tp = 0
    for i in drifts:
        if any(i - window <= j <= i for j in onsets):
            tp += 1
    return tp / len(drifts), hit / len(onsets)


@pytest.mark.parametrize(
    "onsets,drifts,expected",
    [
        (set(), {3, 9}, (0.0, 0.0)),
        ({10}, set(), (0.0, 0.0)),
        ({10}, {12}, (1.0, 1.0)),
        ({10, 50}, {12, 30}, (0.5, 0.5)),
        ({10}, {15}, (1.0, 1.0)),  # closed window
        ({10}, {16}, (0.0, 0.0)),
        ({10}, {9}, (0.0, 0.0)),
    ],
)
def test_precision_recall_examples(onsets, drifts, expected):
    assert compute_precision_recall(rows_from(60, onsets, drifts)) == expected


@settings(max_examples=200)
@given(st.sets(st.integers(1, 80)), st.sets(st.integers(1, 80)))
def test_precision_recall_brute_force(onsets, drifts):
    got = compute_precision_recall(rows_from(80, onsets, drifts))
    assert got == pytest.approx(brute_precision_recall(onsets, drifts))


def test_mme_examples():
    assert compute_mme(rows_from(3, set(), set(), [1.0, 2.0, 6.0])) == 3.0
    assert compute_mme(rows_from(1, set(), set(), [0.5])) == 0.5
    with pytest.raises(ValueError):
        compute_mme([])


def test_infinite_threshold_never_adapts_and_matches_baseline(stream):
    cfg = SMALL.replace(model=ModelConfig(kind="hybrid"),
                        detector=DetectorConfig(kind="threshold", theta_c=math.inf))
    res = run_campaign(cfg, stream)
    assert res.adaptation_count == 0
    base = run_baseline(cfg, stream)
    assert [r.max_error for r in res.rows] == [r.max_error for r in base]
    assert len(set(res.model_digests)) == 1
    lddm = run_campaign(cfg.replace(detector=DetectorConfig(kind="lddm", theta_c=math.inf)), stream)
    assert lddm.adaptation_count == 0


def test_window_one_adapts_every_experiment(stream):
    res = run_campaign(SMALL.replace(detector=DetectorConfig(kind="window", window=1)), stream)
    assert res.adaptation_count == len(stream)
    assert res.memory.adaptations == list(range(1, len(stream) + 1))


def test_window_adapts_on_multiples(stream):
    res = run_campaign(SMALL.replace(detector=DetectorConfig(kind="window", window=4)), stream)
    assert res.memory.adaptations == [4, 8, 12]


def test_warning_buffer_lifecycle(stream, monkeypatch):
    """Adaptation data is the buffered warnings plus the current experiment."""
    calls = []
    real = ldt.adapt

    def spy(model, experiments, config):
        calls.append([e.index for e in experiments])
        return real(model, experiments, config)

    monkeypatch.setattr(ldt, "adapt", spy)
    cfg = SMALL.replace(detector=DetectorConfig(kind="threshold", theta_c=1.0, theta_w=0.05))
    res = run_campaign(cfg, stream)
    expected, buffer = [], []
    for row in res.rows:
        if row.signal == Signal.WARNING:
            buffer.append(row.i)
        elif row.signal == Signal.DRIFT:
            expected.append(buffer + [row.i])
            buffer = []
    assert calls == expected
    assert [r.i for r in res.rows if r.adapted] == [c[-1] for c in calls]
    assert any(len(c) > 1 for c in calls) or not any(r.signal == Signal.WARNING for r in res.rows)
    assert [e.index for e in res.memory.warning] == buffer


def test_causality_against_truncated_stream(stream):
    cfg = SMALL.replace(detector=DetectorConfig(kind="lddm", theta_c=0.5))
    full = run_campaign(cfg, stream)
    for k in (1, 5, 9):
        part = run_campaign(cfg, stream[:k])
        assert part.model_digests == full.model_digests[:k]
        assert part.rows == full.rows[:k]


def test_metrics_consistent_with_prediction_log(stream):
    res = run_campaign(SMALL, stream)
    log = res.memory.predictions
    assert len(log) == len(res.rows)
    for (S_p, S_m, err, sig), row, exp in zip(log, res.rows, stream):
        assert err == row.max_error == np.max(np.abs(S_m - S_p))
        assert sig is row.signal
        np.testing.assert_array_equal(S_m, exp.y)
    assert res.mme == pytest.approx(np.mean([np.max(np.abs(m - p)) for p, m, _, _ in log]))


def test_hybrid_physics_invariant():
    cfg = SMALL.replace(
        schedule=ScheduleConfig(n_experiments=6, e_start=0.03, e_end=0.05, segment_min=2, segment_max=3),
        signal=SignalConfig(length=250),
        model=ModelConfig(kind="hybrid", gp_cap=300),
        detector=DetectorConfig(kind="window", window=2),
    )
    res = run_campaign(cfg)
    original = HybridModel.original(cfg.rotor, cfg.signal.dt)
    assert res.adaptation_count == 3
    assert res.final_model.physical == original.physical
    assert res.final_model.data is not None
    # models in use before experiments 1, 3, 5; the last refit is only the final model
    assert len(set(res.model_digests)) == 3
    assert model_digest(res.final_model) not in res.model_digests


def test_sweep_single_point_matches_campaign(stream):
    cfg = SMALL.replace(detector=DetectorConfig(kind="lddm"))
    (swept,) = sweep_thresholds(cfg, [1.5], stream)
    direct = run_campaign(cfg.replace(detector=cfg.detector.at_threshold(1.5)), stream)
    assert swept.rows == direct.rows
    with pytest.raises(ValueError):
        sweep_thresholds(cfg, [], stream)


def test_deterministic(stream):
    a = run_campaign(SMALL, stream)
    b = run_campaign(SMALL)
    assert a.rows == b.rows and a.model_digests == b.model_digests


def test_per_e_table(stream):
    res = run_campaign(SMALL, stream)
    base = run_baseline(SMALL, stream)
    table = per_e_table(res.rows, base)
    assert sum(t["n_experiments"] for t in table) == len(stream)
    assert sum(t["adaptations"] for t in table) == res.adaptation_count
    assert [t["e"] for t in table] == sorted({e.e_true for e in stream})


def test_summary_fields(stream):
    res = run_campaign(SMALL, stream)
    s = res.summary(1.0)
    assert s["recall_defined"] == (s["n_drift_onsets"] > 0)
    assert s["mme_original"] == 1.0 and s["config"] == SMALL.to_dict()
    assert model_digest(res.final_model) == model_digest(res.final_model)


def test_failure_carries_index(stream, monkeypatch):
    from ldtwin.errors import RolloutDiverged

    def boom(model, exp):
        if exp.index == 4:
            raise RolloutDiverged("non-finite prediction")
        return exp.y.copy()

    monkeypatch.setattr(ldt, "predict", boom)
    with pytest.raises(CampaignError, match="4"):
        run_campaign(SMALL, stream)
