"""
A short learning campaign
=========================

The eccentricity grows in hidden steps over a stream of experiments.  A
linear model and a hybrid model each watch the stream with the threshold
detector and refit themselves when told to.  The never-adapted physics model
is the reference.
"""

from ldtwin import CampaignConfig, DetectorConfig, ModelConfig, generate_stream, run_campaign
from ldtwin.ldt import compute_mme, run_baseline
from ldtwin.rotor_sim import ScheduleConfig, SignalConfig

config = CampaignConfig(
    schedule=ScheduleConfig(n_experiments=20, segment_min=3, segment_max=6),
    signal=SignalConfig(length=1000),
    detector=DetectorConfig(kind="threshold", theta_c=6.0),
    seed=3,
)
stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
print("eccentricity steps:", sorted({exp.e_true for exp in stream}))

print("original  MME %.2f" % compute_mme(run_baseline(config, stream)))
for kind in ("linear", "hybrid"):
    cfg = config.replace(model=ModelConfig(kind=kind, gp_cap=1000))
    res = run_campaign(cfg, stream, keep_memory=False)
    print("%-8s  MME %.2f  adaptations %d  precision %.2f  recall %.2f"
          % (kind, res.mme, res.adaptation_count, res.precision, res.recall))
