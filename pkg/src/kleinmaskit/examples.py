"""Built-in group configurations: three free amalgams and one non-proper pair."""
from __future__ import annotations

import math

import numpy as np

from .amalgam import FiniteListOracle, Generator, GroupSpec, IntegerMatrixOracle
from .clifford import CliffordNumber, ContractError
from .geometry import BallPair, Plane, Sphere
from .moebius import VahlenMatrix

EXAMPLE_IDS = ("example1", "example2", "example3", "counterexample")
DEFAULT_DIM = {"example1": 4, "example2": 3, "example3": 5, "counterexample": 2}
MIN_DIM = {"example1": 4, "example2": 3, "example3": 5, "counterexample": 2}


def _e(n, i):
    return CliffordNumber.basis(n, i)


def rotation_j(n: int) -> VahlenMatrix:
    """diag(e1e2, e1e2): rotation by pi in the (x1, x2)-plane."""
    e12 = _e(n, 1) * _e(n, 2)
    return VahlenMatrix(e12, 0, 0, e12)


def example1(n: int = 4) -> GroupSpec:
    """Two finite groups {id, j, g_m, j g_m} amalgamated over <j>."""
    _check_dim("example1", n)
    en = _e(n, n - 1)
    g1 = VahlenMatrix(0, en, en, 0)
    g2 = VahlenMatrix(0, 2 * en, 0.5 * en, 0)
    return GroupSpec(
        n, [Generator("g1", g1)], [Generator("g2", g2)],
        FiniteListOracle((Generator("j", rotation_j(n)),)),
        BallPair(Sphere(np.zeros(n), math.sqrt(2.0)), "outside"),
        name="example1")


def example2(n: int = 3) -> GroupSpec:
    """Parabolics fixing 0 and infinity, amalgamated over <j>."""
    _check_dim("example2", n)
    g1 = VahlenMatrix(1, 0, 2, 1, dim_n=n)
    g2 = VahlenMatrix(1, 5, 0, 1, dim_n=n)
    return GroupSpec(
        n, [Generator("g1", g1)], [Generator("g2", g2)],
        FiniteListOracle((Generator("j", rotation_j(n)),)),
        BallPair(Sphere(np.zeros(n), 2.0), "outside"),
        name="example2")


def example3(n: int = 5) -> GroupSpec:
    """Like example2 with the parabolics pointing along e3 and e_{n-1}."""
    _check_dim("example3", n)
    g1 = VahlenMatrix(1, 0, 2 * _e(n, 3), 1)
    g2 = VahlenMatrix(1, 5 * _e(n, n - 1), 0, 1)
    return GroupSpec(
        n, [Generator("g1", g1)], [Generator("g2", g2)],
        FiniteListOracle((Generator("j", rotation_j(n)),)),
        BallPair(Sphere(np.zeros(n), 2.0), "outside"),
        name="example3")


def counterexample(letter_depth: int = 1) -> GroupSpec:
    """PSL(2,Z) with g1 = (i,0;0,-i), g2 = (0,i;i,0) in the plane (e1 plays i).

    An interactive pair that is not proper; g1 g2 g1 g2 is trivial.
    """
    n = 2
    i = _e(n, 1)
    T = VahlenMatrix(1, 1, 0, 1, dim_n=n)
    S = VahlenMatrix(0, 1, -1, 0, dim_n=n)
    g1 = VahlenMatrix(i, 0, 0, -i)
    g2 = VahlenMatrix(0, i, i, 0)
    return GroupSpec(
        n, [Generator("g1", g1)], [Generator("g2", g2)],
        IntegerMatrixOracle((Generator("T", T), Generator("S", S))),
        BallPair(Plane(np.array([0.0, 1.0]), 0.0), "below"),
        letter_depth=letter_depth,
        name="counterexample")


def _check_dim(name, n):
    if n < MIN_DIM[name]:
        raise ContractError(f"{name} needs n >= {MIN_DIM[name]}")


def builtin(name: str, n: int | None = None) -> GroupSpec:
    if name not in EXAMPLE_IDS:
        raise ContractError(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_IDS)}")
    if name == "counterexample":
        if n not in (None, 2):
            raise ContractError("counterexample lives in dimension 2")
        return counterexample()
    return {"example1": example1, "example2": example2, "example3": example3}[name](n or DEFAULT_DIM[name])
