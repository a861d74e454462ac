"""Clifford-matrix Moebius groups and combination-theorem checks for amalgamated products."""
from .clifford import CliffordNumber, ContractError, NotInvertible
from .moebius import INF, VahlenMatrix, apply, classify, compose, invert
from .geometry import Ball, BallPair, Plane, Sphere, Tri
from .amalgam import GroupSpec, NormalForm, enumerate_cosets, enumerate_normal_forms, kernel_search
from .verify import CheckConfig, Verdict, run_all
from .examples import builtin, counterexample, example1, example2, example3

__version__ = "0.1.0"
