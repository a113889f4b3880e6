"""Which matrices admit cross-sections?

A tour of the decision procedures: existence for the continuous and
discrete actions, finite-measure and bounded refinements, and the
similar-to-unitary criterion that rules everything out at once.
"""

import math

import numpy as np

from xsect import classify_continuous, classify_discrete, is_similar_to_unitary

matrices = {
    "doubling  [[2]]": [[2.0]],
    "halving   [[1/2]]": [[0.5]],
    "rotation by 90 deg": [[0.0, 1.0], [-1.0, 0.0]],
    "shear": [[1.0, 1.0], [0.0, 1.0]],
    "diag(2, 3)": [[2.0, 0.0], [0.0, 3.0]],
    "diag(2, 1/2)  (det = 1)": [[2.0, 0.0], [0.0, 0.5]],
    "spiral [[0,2],[-2,0]]": [[0.0, 2.0], [-2.0, 0.0]],
}

print("discrete action  gamma -> gamma A^k")
print(f"{'matrix':28s} exists  finite  bounded  ~unitary")
for name, m in matrices.items():
    v = classify_discrete(m)
    print(
        f"{name:28s} {str(v.exists):6s}  {str(v.finite_measure):6s}"
        f"  {str(v.bounded):7s}  {str(is_similar_to_unitary(m))}"
    )

# The continuous action is driven by a generator B with A = exp(B).
# A pure rotation generator admits no cross-section; add any scaling or
# a nilpotent part and one appears.
print("\ncontinuous action  gamma -> gamma exp(tB)")
generators = {
    "B = [[ln 2]]": [[math.log(2.0)]],
    "B = rotation rate pi/2": [[0.0, math.pi / 2], [-math.pi / 2, 0.0]],
    "B = nilpotent shear rate": [[0.0, 1.0], [0.0, 0.0]],
    "B = spiral (growth + rotation)": [[1.0, 2 * math.pi], [-2 * math.pi, 1.0]],
}
for name, b in generators.items():
    v = classify_continuous(b)
    print(f"{name:32s} exists={v.exists}  case={v.case}")

# Verdicts are conjugation-invariant: the action only sees the orbit
# geometry, not the basis it is written in.
rng = np.random.default_rng(0)
p = rng.normal(size=(2, 2))
conj = np.linalg.inv(p) @ np.array([[1.0, 1.0], [0.0, 1.0]]) @ p
print("\nconjugated shear classifies the same:", classify_discrete(conj).case)
