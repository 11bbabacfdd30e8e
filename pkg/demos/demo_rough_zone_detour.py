"""
Learning to avoid rough floor
=============================

On map1 the bottom aisle is made moderately rough and the aisle above it
lightly rough. The robot repeatedly travels between the two ends of the
bottom aisle. Heuristic planning never notices the floor; dynamic
estimation moves to the lighter aisle, and moves again once that aisle
becomes heavily rough.
"""

from ttplan.harness import ExperimentConfig, run_experiment2

plans = 30
config = ExperimentConfig(
    maps=["map1"],
    bundles=[plans],
    regression_nos=[2],
    pairs=[[0, 7]] * plans,
    zone_factors={"rough": 1.0, "aisle_a": 1.5, "aisle_b": 1.2},
    zone_overrides=[[15, "aisle_b", 2.0]],
)
summary, records = run_experiment2(config)

previous = {}
for rec in records:
    if previous.get(rec["mode"]) != rec["path"]:
        print(f"{rec['mode']:10s} plan {rec['plan']:2d}: {rec['path']}  ({rec['executed_cost']:.1f} s)")
        previous[rec["mode"]] = rec["path"]

for cell in summary.cells:
    print(f"{cell['mode']:10s} mean {cell['mean']:.2f} s, saving {cell['saving_pct']:.1f}%")
