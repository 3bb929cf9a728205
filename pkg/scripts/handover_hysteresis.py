"""Handover outcome counts as a function of hysteresis, averaged over seeds.

    python scripts/handover_hysteresis.py --seeds 5 --hysteresis 0 1 3 6
"""
import argparse

from nrmobility.config import ScenarioConfig, load_config
from nrmobility.engine import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--hysteresis", type=float, nargs="+", default=[0.0, 3.0])
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else ScenarioConfig().validate()

    print(f"{'hyst_db':>8} {'success':>8} {'pingpong':>9} {'failure':>8}")
    for h in args.hysteresis:
        totals = {"success": 0, "pingpong": 0, "failure": 0}
        for seed in range(args.seeds):
            counts = run(cfg.replace(rng_seed=seed).with_section("handover", hysteresis=h)).outcome_counts()
            for k in totals:
                totals[k] += counts[k]
        n = args.seeds
        print(f"{h:8.1f} {totals['success'] / n:8.1f} {totals['pingpong'] / n:9.1f} {totals['failure'] / n:8.1f}")


if __name__ == "__main__":
    main()
