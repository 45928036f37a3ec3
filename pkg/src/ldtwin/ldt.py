"""The learning loop: memory, digital model, detector and adaptor over a stream.

For each experiment the current model is rolled out from the first measured
sample, the detector compares prediction and measurement, and

* ``WARNING`` appends the experiment to the warning buffer,
* ``DRIFT`` refits the model on the warning buffer plus the current
  experiment and clears the buffer.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .config import CampaignConfig
from .detectors import Signal, lddm_update, max_error, threshold_detect, window_detect
from .errors import CampaignError, LdtError
from .hybrid import HybridModel, retrain_hybrid, rollout_hybrid
from .rotor_sim import generate_stream
from .sysid import identify_linear, rollout_linear

__all__ = [
    "CampaignRow",
    "Memory",
    "CampaignResult",
    "DetectorRunner",
    "predict",
    "initial_model",
    "adapt",
    "run_campaign",
    "run_baseline",
    "compute_mme",
    "compute_precision_recall",
    "per_e_table",
    "sweep_thresholds",
    "RECALL_WINDOW",
]

RECALL_WINDOW = 5


@dataclass(frozen=True)
class CampaignRow:
    i: int
    e_true: float
    drift_onset: bool
    max_error: float
    signal: Signal
    adapted: bool


@dataclass
class Memory:
    """Warning buffer plus append-only prediction and adaptation logs."""

    warning: list = field(default_factory=list)
    predictions: list = field(default_factory=list)  # (S_p, S_m, max_error, signal)
    adaptations: list = field(default_factory=list)

    def log_prediction(self, S_p, S_m, err, signal):
        self.predictions.append((S_p, S_m, err, signal))


def compute_mme(rows):
    """Mean over experiments of the per-experiment maximum absolute error."""
    if len(rows) == 0:
        raise ValueError("no rows")
    return float(np.mean([r.max_error for r in rows]))


def compute_precision_recall(rows, window=RECALL_WINDOW):
    """Precision and recall of drift signals against the true onsets.

    An onset at ``j`` is detected if some ``DRIFT`` row lies in ``[j, j + window]``;
    a ``DRIFT`` at ``i`` is a true positive if some onset lies in
    ``[i - window, i]``.  An empty denominator yields 0.
    """
    onsets = np.array([r.i for r in rows if r.drift_onset], dtype=int)
    positives = np.array([r.i for r in rows if r.signal == Signal.DRIFT], dtype=int)
    if len(onsets) == 0 or len(positives) == 0:
        return 0.0, 0.0
    diff = positives[None, :] - onsets[:, None]  # onset x positive
    match = (diff >= 0) & (diff <= window)
    recall = float(match.any(axis=1).sum()) / len(onsets)
    precision = float(match.any(axis=0).sum()) / len(positives)
    return precision, recall


@dataclass
class CampaignResult:
    rows: list
    config: CampaignConfig
    memory: Memory | None = field(default=None, repr=False)
    model_digests: list = field(default_factory=list, repr=False)
    final_model: object = field(default=None, repr=False)

    @property
    def mme(self):
        return compute_mme(self.rows)

    @property
    def adaptation_count(self):
        return sum(r.adapted for r in self.rows)

    @property
    def precision_recall(self):
        return compute_precision_recall(self.rows)

    @property
    def precision(self):
        return self.precision_recall[0]

    @property
    def recall(self):
        return self.precision_recall[1]

    def summary(self, mme_original=None):
        n_onsets = sum(r.drift_onset for r in self.rows)
        n_pos = sum(r.signal == Signal.DRIFT for r in self.rows)
        precision, recall = self.precision_recall
        out = {
            "n_experiments": len(self.rows),
            "mme": self.mme,
            "adaptation_count": self.adaptation_count,
            "precision": precision,
            "recall": recall,
            "precision_defined": n_pos > 0,
            "recall_defined": n_onsets > 0,
            "n_drift_onsets": n_onsets,
            "n_drift_signals": n_pos,
            "seed": self.config.seed,
            "config": self.config.to_dict(),
        }
        if mme_original is not None:
            out["mme_original"] = mme_original
        return out

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "e_true", "drift_onset", "max_error", "signal", "adapted"])
            for r in self.rows:
                w.writerow([
                    r.i, "%.9g" % r.e_true, int(r.drift_onset), "%.9g" % r.max_error,
                    int(r.signal), int(r.adapted),
                ])

    def write_summary(self, path, mme_original=None):
        with open(path, "w", newline="\n") as fh:
            json.dump(self.summary(mme_original), fh, indent=2, sort_keys=True)
            fh.write("\n")


def per_e_table(rows, baseline_rows=None):
    """MME and adaptation count grouped by distinct eccentricity value."""
    table = []
    es = sorted({r.e_true for r in rows})
    for e in es:
        sel = [r for r in rows if r.e_true == e]
        entry = {
            "e": e,
            "n_experiments": len(sel),
            "mme": compute_mme(sel),
            "adaptations": sum(r.adapted for r in sel),
        }
        if baseline_rows is not None:
            entry["mme_original"] = compute_mme([r for r in baseline_rows if r.e_true == e])
        table.append(entry)
    return table


def write_per_e_csv(path, table):
    cols = list(table[0]) if table else ["e", "n_experiments", "mme", "adaptations"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for entry in table:
            w.writerow([v if isinstance(v, int) else "%.9g" % v for v in (entry[c] for c in cols)])


class DetectorRunner:
    """Adapts the three detector functions to one ``(i, S_p, S_m) -> Signal`` call."""

    def __init__(self, cfg):
        self.kind = cfg.kind
        self.window = cfg.window_config()
        self.threshold = cfg.threshold_config()
        self.state = cfg.lddm_state()

    def __call__(self, i, S_p, S_m):
        if self.kind == "window":
            return window_detect(i, self.window)
        if self.kind == "threshold":
            return threshold_detect(S_p, S_m, self.threshold)
        signal, self.state = lddm_update(self.state, S_p, S_m)
        return signal


def predict(model, experiment):
    """Closed-loop rollout over the experiment's input from its first measured sample."""
    if isinstance(model, HybridModel):
        return rollout_hybrid(model, experiment.u, experiment.y[0])
    return rollout_linear(model, experiment.u, experiment.y[0])


def adapt(model, experiments, config):
    """Re-identify (linear) or retrain the data part (hybrid) on ``experiments``."""
    if isinstance(model, HybridModel):
        return retrain_hybrid(model, experiments, config.model.gp_config())
    return identify_linear([(e.u, e.y) for e in experiments], config.model.order, config.signal.dt)


def initial_model(config, first_experiment):
    """Hybrid: physics only.  Linear: identified on the first experiment."""
    mc = config.model
    if mc.kind == "hybrid":
        return HybridModel.original(config.rotor, config.signal.dt, mc.residual_input)
    return identify_linear([(first_experiment.u, first_experiment.y)], mc.order, config.signal.dt)


def model_digest(model):
    return hashlib.sha256(json.dumps(model.to_dict(), sort_keys=True).encode()).hexdigest()


def run_campaign(config, stream=None, keep_memory=True):
    """Run the learning loop over experiments ``1..N`` in order.

    Parameters
    ----------
    config : CampaignConfig
    stream : list of Experiment, optional
        Pre-generated stream; generated from ``config`` when omitted.
    keep_memory : bool
        Keep the per-experiment prediction log (large).
    """
    if config.model is None:
        raise LdtError("campaign config needs a model section")
    if stream is None:
        stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
    memory = Memory()
    detector = DetectorRunner(config.detector)
    rows, digests = [], []
    model = None
    for exp in stream:
        try:
            if model is None:
                model = initial_model(config, exp)
            digests.append(model_digest(model))
            S_p = predict(model, exp)
            err = max_error(S_p, exp.y)
            signal = detector(exp.index, S_p, exp.y)
            adapted = False
            if signal == Signal.WARNING:
                memory.warning.append(exp)
            elif signal == Signal.DRIFT:
                model = adapt(model, memory.warning + [exp], config)
                memory.warning.clear()
                memory.adaptations.append(exp.index)
                adapted = True
        except LdtError as exc:
            raise CampaignError(str(exc), exp.index) from exc
        if keep_memory:
            memory.log_prediction(S_p, exp.y, err, signal)
        rows.append(CampaignRow(exp.index, exp.e_true, exp.drift_onset, err, signal, adapted))
    return CampaignResult(rows, config, memory if keep_memory else None, digests, model)


def run_baseline(config, stream=None):
    """The never-adapted original model (physics only) on the same stream."""
    if stream is None:
        stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
    model = HybridModel.original(config.rotor, config.signal.dt)
    rows = []
    for exp in stream:
        S_p = rollout_hybrid(model, exp.u, exp.y[0])
        rows.append(CampaignRow(exp.index, exp.e_true, exp.drift_onset, max_error(S_p, exp.y), Signal.OK, False))
    return rows


def sweep_thresholds(config, grid, stream=None):
    """One campaign per drift threshold, with ``theta_w = theta_c/2`` and ``theta_d = theta_c``."""
    if len(grid) == 0:
        raise ValueError("empty threshold grid")
    if stream is None:
        stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
    return [
        run_campaign(config.replace(detector=config.detector.at_threshold(th)), stream, keep_memory=False)
        for th in grid
    ]
