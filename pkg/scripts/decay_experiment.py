"""Print chordal-diameter and isometric-radius series for the built-in examples.

    python3 scripts/decay_experiment.py
"""
from kleinmaskit.examples import builtin
from kleinmaskit.verify import diameter_decay, radii_decay


def show(title, r):
    print(f"{title}: {r.verdict.value}")
    for ell, v in r.series:
        print(f"  {ell:3d}  {v:.6e}")
    for note in r.notes:
        print(f"  note: {note}")


if __name__ == "__main__":
    for name in ("example1", "example2", "example3"):
        s = builtin(name)
        for side in ("G", "G1", "G2"):
            show(f"{name} diameters, side {side}", diameter_decay(s, side=side, obj="S", L=6))
        show(f"{name} isometric radii", radii_decay(s))
