"""
Reconstructing actuation and spotting a hammer
==============================================

Three actuator channels fire in turn on a mixed-stiffness arm. The same
states serve three readouts: one recovering each actuation command, one
estimating payload weight and one reading the hammer's orientation.
"""

import warnings

from origami_reservoir.perception import (HAMMER_WEIGHT, TASK3_WEIGHTS, classify_payload,
                                          reconstruct_inputs, simulate_labeled_run,
                                          train_orientation_readout, train_weight_estimator)
from origami_reservoir.readout import RankDeficiencyWarning
from origami_reservoir.substrate import preset
from origami_reservoir.tasks import pwm3

warnings.simplefilter("ignore", RankDeficiencyWarning)
cfg = preset("C7")
drive = pwm3(0.1, 0.2, 1.0, 30.0, 600.0)

bare = simulate_labeled_run(cfg, drive, 30.0, 0.0, noise=1e-5)
_, errors = reconstruct_inputs(bare)
print("actuation reconstruction MSE:", ", ".join(f"{e:.3f}" for e in errors))

# the hammer trains at front orientation for weight, all three for orientation
items = [simulate_labeled_run(cfg, drive, 30.0, m, 0 if m == HAMMER_WEIGHT else None, noise=1e-5)
         for m in TASK3_WEIGHTS]
hammer = [simulate_labeled_run(cfg, drive, 30.0, HAMMER_WEIGHT, o, noise=1e-5) for o in (-1, 0, 1)]
weigh = train_weight_estimator(items, TASK3_WEIGHTS)
orient = train_orientation_readout(hammer)

for m in TASK3_WEIGHTS[:-1]:
    run = simulate_labeled_run(cfg, drive, 30.0, m, repetition=1, noise=1e-5)
    grams, label = classify_payload(weigh, orient, run)
    print(f"{m:7.2f} g item -> {grams:7.2f} g, orientation {label}")
for o in (-1, 0, 1):
    run = simulate_labeled_run(cfg, drive, 30.0, HAMMER_WEIGHT, o, repetition=1, noise=1e-5)
    grams, label = classify_payload(weigh, orient, run)
    name = None if label is None else label.name
    print(f"hammer at {o:+d}  -> {grams:7.2f} g, orientation {name}")
