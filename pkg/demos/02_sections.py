"""Explicit cross-sections and closed-form orbit solving.

Each admissible matrix gets one of eight constructions.  The section is
a set meeting almost every orbit exactly once, so every point off a
null set has a unique orbit parameter carrying it there.
"""

import math

import numpy as np

from xsect import (
    build_continuous_section,
    build_discrete_section,
    contains,
    derive_discrete_section,
    solve_orbit,
)

# -- discrete: the doubling map on the line ---------------------------------
S = build_discrete_section([[2.0]])
print("A = [[2]]: S = {s : 1 <= |s| < 2}")
for x in (1.5, 2.0, -1.0, 8.0):
    print(f"  contains({x:4}) = {contains(S, [x])}")
sol = solve_orbit(S, [8.0])
print(f"  solve(8): tile k = {sol.parameter}, representative {sol.representative}")

# -- discrete: the spiral ----------------------------------------------------
S = build_discrete_section([[0.0, 2.0], [-2.0, 0.0]])
print("\nspiral A = [[0,2],[-2,0]]: radial span [1, 16), one quarter turn per step")
sol = solve_orbit(S, [0.0, 5.0])
print(f"  solve((0,5)): k = {sol.parameter}, representative {np.round(sol.representative, 12)}")

# -- discrete: the shear -----------------------------------------------------
S = build_discrete_section([[1.0, 1.0], [0.0, 1.0]])
print("\nshear: S = {(s, s t) : s != 0, 0 <= t < 1}")
sol = solve_orbit(S, [2.0, 7.0])
print(f"  solve((2,7)): k = {sol.parameter}, representative {sol.representative}")

# -- continuous: flow times --------------------------------------------------
S = build_continuous_section([[math.log(2.0)]])
sol = solve_orbit(S, [8.0])
print(f"\ncontinuous B = [[ln 2]]: flow time for 8 is t = {sol.parameter}  (8 * 2^t = 1)")

S = build_continuous_section([[1.0, 2 * math.pi], [-2 * math.pi, 1.0]])
sol = solve_orbit(S, [0.0, 1.0])
print(f"spiral flow: (0,1) reaches the section at t = {sol.parameter}  (e^0.75 = {math.exp(0.75):.6f})")

# Sweeping a continuous section over unit time gives a discrete one.
T = derive_discrete_section(build_continuous_section([[math.log(2.0)]]))
print("\nswept section of B = [[ln 2]] is the dyadic interval pair:")
for x in (1.0, 1.5, -1.5, 2.0):
    print(f"  contains({x:4}) = {contains(T, [x])}")
