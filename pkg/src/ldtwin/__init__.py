"""Learning digital twin of a degrading eccentric rotor.

A simulated rotor rig streams experiments into a digital model (linear
state-space or physics + Gaussian-process hybrid).  Drift detectors compare
predictions with measurements and trigger model adaptation.
"""

from .config import CampaignConfig, DetectorConfig, ModelConfig, load_config
from .detectors import LddmState, Signal, ThresholdConfig, WindowConfig, lddm_update, max_error, threshold_detect, window_detect
from .gp import GpConfig, GpModel, gp_fit, gp_predict
from .hybrid import HybridModel, PhysicalModel, make_residual_dataset, physical_increment, rollout_hybrid
from .ldt import CampaignResult, compute_mme, compute_precision_recall, run_baseline, run_campaign, sweep_thresholds
from .rotor_sim import Experiment, RotorParams, RotorState, build_schedule, generate_stream, run_experiment, simulate
from .sysid import LinearModel, identify_linear, rollout_linear

__version__ = "0.1.0"
