"""Run the full check suite on every built-in configuration and print the verdicts.

    python3 scripts/run_examples.py [-L 6]
"""
import argparse
import time

from kleinmaskit.examples import EXAMPLE_IDS, builtin
from kleinmaskit.verify import CheckConfig, run_all


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-L", type=int, default=8, help="maximal normal-form length")
    args = ap.parse_args()
    for name in EXAMPLE_IDS:
        t0 = time.perf_counter()
        rep = run_all(builtin(name), CheckConfig(max_length=args.L))
        dt = time.perf_counter() - t0
        print(f"== {name} ({dt:.1f}s)")
        for r in rep.results:
            print(f"  {r.check:24s} {r.verdict.value}")
        print(f"  conclusion: {rep.info.get('proper_conclusion')}")


if __name__ == "__main__":
    main()
