"""
Heuristic versus estimated costs
================================

Experiment 1 compares heuristic paths with paths planned on static
estimates from an offline table. Experiment 2 compares heuristic paths
with dynamic estimates learnt online, for several bundle sizes and window
lengths. Both score the travel time actually driven.
"""

from ttplan.harness import ExperimentConfig, run_experiment1, run_experiment2

summary, _ = run_experiment1(ExperimentConfig())
for cell in summary.cells:
    print(f"exp1 {cell['map']} {cell['mode']:10s} mean {cell['mean']:6.2f} s  saving {cell['saving_pct']:5.2f}%")

###############################################################################
# A reduced sweep keeps this script quick; ``ttplan exp2`` runs the full one.

summary, _ = run_experiment2(ExperimentConfig(bundles=[20, 80], regression_nos=[2, 9]))
for cell in summary.cells:
    if cell["mode"] == "dynamic_kf":
        print(f"exp2 {cell['map']} bundle {cell['bundle']:2d} regression_no {cell['regression_no']}: "
              f"saving {cell['saving_pct']:5.2f}%")
