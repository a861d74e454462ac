"""Oracle constants written by scripts/freeze_oracles.py; do not edit by hand."""

EXAMPLE2_DIAMETER_SERIES = [0.4120209620996837,
 0.09292279870493643,
 0.006441190427502708,
 0.0015114297592254623,
 0.00010385968542507097,
 2.4387418529187546e-05]
EXAMPLE2_FORMS_L2 = 60
EXAMPLE2_LETTERS_PER_SIDE = [6, 6]
EXAMPLE2_REPS_PER_SIDE = [4, 4]
EXAMPLE1_MIN_SEPARATION_L8 = 1.118033988749895
EXAMPLE2_MIN_SEPARATION_L8 = 2.0
EXAMPLE3_MIN_SEPARATION_L8 = 2.0
G1G2_ATTRACTING = 0.45803989154980806
G1G2_REPELLING = -5.458039891549808
G2G1_ATTRACTING = 5.458039891549808
