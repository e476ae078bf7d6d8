"""Ablation sweep over pipeline variants on a shared synthetic benchmark.

Runs a handful of the predefined ablation rows over the same 50 instances
and prints recall plus the MAC-n curve — the fraction of pairs whose
hypothesis pool contains at least n ground-truth-consistent poses. MAC-1 is
an upper bound on recall: if no correct hypothesis exists, no scoring rule
can recover the pose.
"""

from macreg import (
    ABLATION_ROWS,
    INDOOR_CRITERIA,
    SyntheticSpec,
    evaluate_batch,
    generate_synthetic,
)
from macreg.bench import MAC_N_LEVELS

N_PAIRS = 50
instances = [
    generate_synthetic(SyntheticSpec(20, 80, noise_sigma=0.5, seed=500 + s))[:2]
    for s in range(N_PAIRS)
]
print(f"benchmark: {N_PAIRS} pairs, 20% inliers, noise 0.5 pr\n")

levels = "  ".join(f"MAC-{n:<3d}" for n in MAC_N_LEVELS)
print(f"{'variant':<38} {'recall':>7}   {levels}")
for row in ("1", "3", "4", "6", "9"):
    label, config = ABLATION_ROWS[row]
    _, summary = evaluate_batch(instances, config, INDOOR_CRITERIA)
    curve = "  ".join(f"{summary.mac_n_recall_pct[n]:7.1f}" for n in MAC_N_LEVELS)
    print(f"{label:<38} {summary.recall_pct:6.1f}%   {curve}")
