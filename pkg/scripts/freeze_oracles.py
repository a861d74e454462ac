"""Recompute the oracle constants in tests/frozen.py.

Uses only tests/oracles.py (dense gamma-matrix algebra, complex 2x2 matrices,
circle sampling); the package itself is never imported here.

    python3 scripts/freeze_oracles.py
"""
from __future__ import annotations

import math
import pprint
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles as O  # noqa: E402


def blade(n_gen, *idx):
    c = np.zeros(1 << n_gen)
    mask = 0
    for i in idx:
        mask |= 1 << (i - 1)
    c[mask] = 1.0
    return c


def scalar(n_gen, s):
    c = np.zeros(1 << n_gen)
    c[0] = s
    return c


def dense(n_gen, a, b, c, d):
    return O.dense_block(np.array([[a, b], [c, d]]), n_gen)


def example(name):
    """Dense generators (j, g1, g2) typed in from the published matrices."""
    if name == "example1":
        n = 4
        k = n - 1
        ng = n - 1
        e = blade(ng, k)
        g1 = dense(ng, 0 * e, e, e, 0 * e)
        g2 = dense(ng, 0 * e, 2 * e, 0.5 * e, 0 * e)
    elif name == "example2":
        n = 3
        ng = n - 1
        g1 = dense(ng, *(scalar(ng, v) for v in (1, 0, 2, 1)))
        g2 = dense(ng, *(scalar(ng, v) for v in (1, 5, 0, 1)))
    else:
        n = 5
        ng = n - 1
        g1 = dense(ng, scalar(ng, 1), scalar(ng, 0), 2 * blade(ng, 3), scalar(ng, 1))
        g2 = dense(ng, scalar(ng, 1), 5 * blade(ng, n - 1), scalar(ng, 0), scalar(ng, 1))
    e12 = blade(ng, 1, 2)
    j = dense(ng, e12, 0 * e12, 0 * e12, e12)
    return ng, j, g1, g2


def elements_up_to(tokens, depth, eye):
    """Distinct products of at most `depth` tokens (dense matrices)."""
    out = [eye]
    frontier = [eye]
    for _ in range(depth):
        nxt = []
        for M in frontier:
            for T in tokens:
                P = M @ T
                if not any(np.abs(P - Q).max() < 1e-9 or np.abs(P + Q).max() < 1e-9 for Q in out):
                    out.append(P)
                    nxt.append(P)
        frontier = nxt
    return out


def in_list(M, lst):
    return any(np.abs(M - Q).max() < 1e-9 or np.abs(M + Q).max() < 1e-9 for Q in lst)


def count_forms_example2_L2():
    """Canonical normal forms of length <= 2 with letters of generator length <= 2."""
    ng, j, g1, g2 = example("example2")
    eye = np.eye(j.shape[0], dtype=complex)
    J = [eye, j]
    sides = []
    for g in (g1, g2):
        elems = elements_up_to([j, g, np.linalg.inv(g)], 2, eye)
        letters = [M for M in elems if not in_list(M, J)]
        reps = []
        for M in letters:
            if not any(in_list(M, [R @ x for x in J]) for R in reps):
                reps.append(M)
        sides.append((letters, reps))
    count = sum(len(a) for a, _ in sides)
    prods = []
    for m in (0, 1):
        for x1 in sides[m][0]:
            for x2 in sides[1 - m][1]:
                prods.append(x2 @ x1)
    count += len(prods)
    distinct = []
    for P in prods:
        if not in_list(P, distinct):
            distinct.append(P)
    assert len(distinct) == len(prods)
    return count, [len(a) for a, _ in sides], [len(r) for _, r in sides]


def min_separation(name, L, powers):
    """Min over J * (alternating words of length 1..L) of the distance to +/-I."""
    ng, j, g1, g2 = example(name)
    dim = j.shape[0] // 2
    eye = np.eye(2 * dim, dtype=complex)
    lets = ([np.linalg.matrix_power(g1, p) if p > 0 else np.linalg.matrix_power(np.linalg.inv(g1), -p)
             for p in powers],
            [np.linalg.matrix_power(g2, p) if p > 0 else np.linalg.matrix_power(np.linalg.inv(g2), -p)
             for p in powers])
    Js = [eye, j]
    best = math.inf

    def sep(M):
        # coefficient Frobenius norm = dense Frobenius / sqrt(dim)
        return min(np.linalg.norm(M - eye), np.linalg.norm(M + eye)) / math.sqrt(dim)

    def walk(M, side, depth):
        nonlocal best
        for T in lets[side]:
            P = M @ T
            for Jm in Js:
                best = min(best, sep(Jm @ P))
            if depth < L:
                walk(P, 1 - side, depth + 1)

    walk(eye, 0, 1)
    walk(eye, 1, 1)
    return best


def main():
    t0 = time.time()
    out = {}
    g1 = np.array([[1.0, 0.0], [2.0, 1.0]])
    g2 = np.array([[1.0, 5.0], [0.0, 1.0]])
    out["EXAMPLE2_DIAMETER_SERIES"] = O.diameter_series(g1, g2, 2.0, (1, -1, 2, -2), 6)
    print("diameters", time.time() - t0, file=sys.stderr)
    count, letters, reps = count_forms_example2_L2()
    out["EXAMPLE2_FORMS_L2"] = count
    out["EXAMPLE2_LETTERS_PER_SIDE"] = letters
    out["EXAMPLE2_REPS_PER_SIDE"] = reps
    # Example 1: J is central, so only g1, g2 themselves are letters
    out["EXAMPLE1_MIN_SEPARATION_L8"] = float(min_separation("example1", 8, (1,)))
    for name in ("example2", "example3"):
        out[f"{name.upper()}_MIN_SEPARATION_L8"] = float(min_separation(name, 8, (1, -1, 2, -2)))
        print(name, time.time() - t0, file=sys.stderr)
    # fixed points of z -> (a z + b)/(c z + d): c z^2 + (d - a) z - b = 0
    r = math.sqrt(35.0)
    out["G1G2_ATTRACTING"] = (r - 5) / 2   # (1,5;2,11): |2z+11| > 1 at this root
    out["G1G2_REPELLING"] = (-5 - r) / 2
    out["G2G1_ATTRACTING"] = (5 + r) / 2   # (11,5;2,1)
    for k in ("G1G2_ATTRACTING", "G1G2_REPELLING"):
        z = out[k]
        assert abs((z + 5) / (2 * z + 11) - z) < 1e-12
    assert abs(1 / (2 * out["G1G2_ATTRACTING"] + 11) ** 2) < 1
    lines = ['"""Oracle constants written by scripts/freeze_oracles.py; do not edit by hand."""', ""]
    for k, v in out.items():
        lines.append(f"{k} = {pprint.pformat(v, width=100)}")
    (ROOT / "tests" / "frozen.py").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
