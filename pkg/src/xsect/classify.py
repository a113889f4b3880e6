"""Existence decisions for cross-sections of the two singly generated actions.

For the continuous action ``gamma -> gamma exp(tB)`` a cross-section
exists unless ``exp(B)`` is conjugate-orthogonal, i.e. every eigenvalue
of the generator ``B`` is purely imaginary (or zero) and ``B`` is
semisimple.  For the discrete action ``gamma -> gamma A^k`` the same
dichotomy reads: no cross-section iff ``A`` is diagonalizable over C
with all eigenvalue moduli equal to 1.  On top of bare existence, the
discrete action admits a finite-measure cross-section iff
``|det A| != 1`` and a bounded one iff the moduli sit entirely on one
side of 1.

Verdict cases follow a fixed priority: a nonzero real eigenvalue (or a
modulus != 1) wins over a complex pair, which wins over the nilpotent
modulus-one cases.  The witness block is the first qualifying Jordan
block in block order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BorderlineModulus
from .linalg import DEFAULT_TOL, RealJordanForm, as_matrix, real_jordan_form

CONTINUOUS_CASES = ("real_nonzero", "complex_nonzero", "zero_nilpotent", "imaginary_nilpotent")
DISCRETE_CASES = (
    "modulus_not_one",
    "complex_modulus_not_one",
    "real_modulus_one_nilpotent",
    "complex_modulus_one_nilpotent",
)


@dataclass(frozen=True)
class ContinuousVerdict:
    exists: bool
    case: str | None
    witness_block: int | None
    jordan: RealJordanForm

    def to_json(self) -> dict:
        return {
            "mode": "continuous",
            "exists": self.exists,
            "case": self.case,
            "witness_block": self.witness_block,
        }


@dataclass(frozen=True)
class DiscreteVerdict:
    exists: bool
    finite_measure: bool
    bounded: bool
    case: str | None
    witness_block: int | None
    det_modulus: float
    jordan: RealJordanForm

    def to_json(self) -> dict:
        return {
            "mode": "discrete",
            "exists": self.exists,
            "finite_measure": self.finite_measure,
            "bounded": self.bounded,
            "case": self.case,
            "witness_block": self.witness_block,
            "det_modulus": self.det_modulus,
        }


def _is_zero(x, tol, scale) -> bool:
    return abs(x) <= tol * scale


def classify_continuous(b, tol=DEFAULT_TOL) -> ContinuousVerdict:
    """Decide existence of a cross-section for ``gamma -> gamma exp(tB)``.

    The generator ``B`` may be singular (``exp(B)`` never is).  Cases are
    tried in priority order; ``exists`` is False exactly when every
    eigenvalue of ``B`` is purely imaginary or zero and no block carries
    a nilpotent part.
    """
    b = as_matrix(b)
    form = real_jordan_form(b, tol=tol, require_invertible=False)
    scale = max(float(np.linalg.norm(b, 2)), 1.0)

    def pick(pred):
        for idx, blk in enumerate(form.blocks):
            if pred(blk):
                return idx
        return None

    idx = pick(lambda blk: not blk.is_complex and not _is_zero(blk.alpha, tol, scale))
    if idx is not None:
        return ContinuousVerdict(True, "real_nonzero", idx, form)
    idx = pick(lambda blk: blk.is_complex and not _is_zero(blk.alpha, tol, scale))
    if idx is not None:
        return ContinuousVerdict(True, "complex_nonzero", idx, form)
    idx = pick(lambda blk: not blk.is_complex and blk.nilpotent)
    if idx is not None:
        return ContinuousVerdict(True, "zero_nilpotent", idx, form)
    idx = pick(lambda blk: blk.is_complex and blk.nilpotent)
    if idx is not None:
        return ContinuousVerdict(True, "imaginary_nilpotent", idx, form)
    return ContinuousVerdict(False, None, None, form)


def classify_discrete(a, tol=DEFAULT_TOL) -> DiscreteVerdict:
    """Decide cross-section existence/finite-measure/boundedness for
    ``gamma -> gamma A^k``.

    ``finite_measure`` compares ``|det A|`` to 1 at tolerance ``tol``;
    ``bounded`` requires every modulus strictly on one side of 1.  An
    eigenvalue modulus inside the gray zone around 1 whose block has no
    nilpotent part would flip the existence verdict either way, so it is
    reported as :class:`BorderlineModulus` instead of guessed.
    """
    a = as_matrix(a)
    form = real_jordan_form(a, tol=tol)
    det_modulus = abs(float(np.linalg.det(a)))

    def mod_dist(blk):
        return abs(blk.modulus - 1.0)

    def pick(pred):
        for idx, blk in enumerate(form.blocks):
            if pred(blk):
                return idx
        return None

    case = None
    witness = None
    idx = pick(lambda blk: not blk.is_complex and mod_dist(blk) > tol)
    if idx is not None:
        case, witness = "modulus_not_one", idx
    else:
        idx = pick(lambda blk: blk.is_complex and mod_dist(blk) > tol)
        if idx is not None:
            case, witness = "complex_modulus_not_one", idx
        else:
            idx = pick(lambda blk: not blk.is_complex and blk.nilpotent)
            if idx is not None:
                case, witness = "real_modulus_one_nilpotent", idx
            else:
                idx = pick(lambda blk: blk.is_complex and blk.nilpotent)
                if idx is not None:
                    case, witness = "complex_modulus_one_nilpotent", idx

    if case is None:
        # verdict would be "no cross-section"; make sure no semisimple block
        # is hiding a modulus genuinely different from 1 inside the gray zone
        for blk in form.blocks:
            if not blk.nilpotent and tol / 10 < mod_dist(blk) <= tol:
                raise BorderlineModulus(
                    f"eigenvalue modulus {blk.modulus!r} within tolerance of 1; "
                    "existence verdict would be unreliable"
                )

    moduli = [blk.modulus for blk in form.blocks]
    bounded = all(m > 1.0 + tol for m in moduli) or all(m < 1.0 - tol for m in moduli)
    finite = abs(det_modulus - 1.0) > tol
    return DiscreteVerdict(
        exists=case is not None,
        finite_measure=finite,
        bounded=bounded,
        case=case,
        witness_block=witness,
        det_modulus=det_modulus,
        jordan=form,
    )


def is_similar_to_unitary(a, tol=DEFAULT_TOL) -> bool:
    """True iff ``A`` is diagonalizable over C with every modulus 1.

    Equivalent to the nonexistence of a cross-section for the discrete
    action, and to the nonexistence of an orthonormal wavelet of
    infinite order.
    """
    return not classify_discrete(a, tol=tol).exists
