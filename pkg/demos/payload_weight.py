"""
Weighing a payload with the chain's own motion
==============================================

The chain carries a mass at its tip while the base vibrates at 4 Hz.
Readouts trained on one, two or five reference masses are then asked to
weigh fresh runs.
"""

import warnings

from origami_reservoir.perception import (PAYLOAD_MASSES, estimate_weight, simulate_labeled_run,
                                          train_weight_estimator)
from origami_reservoir.readout import RankDeficiencyWarning
from origami_reservoir.substrate import preset
from origami_reservoir.tasks import single_harmonic

cfg = preset("C5")
drive = single_harmonic(0.006, 4.0, 15.0, 600.0)

# one run per mass for training, a second with a new perturbation for testing
train = [simulate_labeled_run(cfg, drive, 15.0, m, repetition=0, noise=1e-5) for m in PAYLOAD_MASSES]
test = [simulate_labeled_run(cfg, drive, 15.0, m, repetition=1, noise=1e-5) for m in PAYLOAD_MASSES]

warnings.simplefilter("ignore", RankDeficiencyWarning)
for used in ((0.0,), (0.0, 170.0), PAYLOAD_MASSES):
    bundle = train_weight_estimator(train, used)
    estimates = [estimate_weight(bundle, r) for r in test]
    row = "  ".join(f"{e:7.1f}" for e in estimates)
    print(f"trained on {len(used)} mass(es): {row}")

# a single reference mass can only ever report that mass
print("true masses:          " + "  ".join(f"{m:7.1f}" for m in PAYLOAD_MASSES))
