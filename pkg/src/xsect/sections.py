"""Explicit cross-sections for the eight existence cases, with membership
tests and closed-form orbit solving.

All sets are described in Jordan coordinates of the acting matrix; an
ambient point is mapped through the conjugator before any predicate is
evaluated, so the constructions are valid for arbitrary (non-canonical)
input matrices.  Only the coordinates of the witness block are ever
constrained; every other coordinate (including the higher chain
coordinates of the witness block itself) is free.

Parameter conventions of :func:`solve_orbit`:

* continuous mode returns the flow time ``t`` with ``gamma @ A^t in S``
  (so the representative is ``gamma @ A^t``);
* discrete mode returns the tile index ``k`` with ``gamma in S @ A^k``
  (representative ``gamma @ A^-k``).

Both are the unique parameter of their kind.  Interval bounds are
half-open exactly as constructed; the equality constraints that carve a
continuous section out of a hypersurface are tested at a small relative
tolerance (a float can sit on a measure-zero set only approximately),
while interval bounds are compared exactly with no epsilon-fattening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import classify_continuous, classify_discrete
from .errors import ExceptionalPoint, NoSection
from .linalg import (
    DEFAULT_TOL,
    RealJordanForm,
    integer_power,
    jordan_flow_batch,
    jordan_flow_matrix,
    matrix_from_json,
    matrix_to_json,
    one_parameter_power,
    one_parameter_power_batch,
)

TWO_PI = 2.0 * math.pi

CONTINUOUS_TAGS = ("real_nonzero", "complex_nonzero", "zero_nilpotent", "imaginary_nilpotent")
DISCRETE_TAGS = (
    "modulus_not_one",
    "complex_modulus_not_one",
    "real_modulus_one_nilpotent",
    "complex_modulus_one_nilpotent",
    "derived_from_continuous",
)


@dataclass(frozen=True)
class OrbitSolution:
    parameter: float
    representative: np.ndarray


def _angle(x, y):
    """Polar angle of row pairs, wrapped into [0, 2*pi)."""
    phi = np.arctan2(y, x)
    phi = np.where(phi < 0, phi + TWO_PI, phi)
    return np.where(phi >= TWO_PI, 0.0, phi)


def _rotate_rows(x, y, theta):
    """Apply the row rotation ``(x, y) @ [[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return x * c - y * s, x * s + y * c


@dataclass(frozen=True)
class CrossSection:
    """One of the explicit cross-section constructions.

    ``params`` carries the case data (eigenvalue parameters and the
    derived interval bounds); ``base`` is set only for mode='discrete',
    case='derived_from_continuous' and holds the continuous section the
    set was swept from.
    """

    mode: str
    case: str
    jordan: RealJordanForm
    block_index: int
    params: dict
    tol: float
    base: "CrossSection | None" = None

    @property
    def matrix(self) -> np.ndarray:
        """The acting matrix: A for discrete mode, the generator B for
        continuous mode.  A derived discrete section acts under exp(B)."""
        if self.case == "derived_from_continuous":
            return one_parameter_power(self.jordan, 1.0)
        return self.jordan.matrix

    @property
    def n(self) -> int:
        return self.jordan.n

    @property
    def block(self):
        return self.jordan.blocks[self.block_index]

    def null_set(self) -> dict:
        """The declared measure-zero exceptional set, as coordinate data."""
        off = self.block.offset
        if self.case in ("real_nonzero", "zero_nilpotent", "modulus_not_one", "real_modulus_one_nilpotent"):
            return {"kind": "coordinate_zero", "indices": [off]}
        if self.case == "derived_from_continuous":
            return self.base.null_set()
        return {"kind": "pair_zero", "indices": [off, off + 1]}

    # -- evaluation -------------------------------------------------------

    def membership(self, points):
        """Vectorized membership: (member, exceptional) boolean arrays.

        ``points`` is an (m, n) stack of ambient row vectors.  Points in
        the declared null set are flagged exceptional and reported as
        non-members; scalar wrappers turn that flag into an error.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        coords = self.jordan.to_jordan(pts)
        return _membership_core(self, coords)

    def solve(self, points):
        """Vectorized orbit solve: (parameter array, representatives, exceptional)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        coords = self.jordan.to_jordan(pts)
        return _solve_core(self, pts, coords)

    def power(self, t):
        """The acting power: ``A^t`` (continuous) or ``A^k`` (discrete)."""
        if self.mode == "continuous":
            return one_parameter_power(self.jordan, float(t))
        return integer_power(self.matrix, int(t))

    def sample(self, rng, count):
        """Draw points from the section (free coordinates standard normal)."""
        coords = rng.normal(size=(count, self.n))
        _sample_core(self, coords, rng)
        return self.jordan.from_jordan(coords)

    def to_json(self) -> dict:
        obj = {
            "mode": self.mode,
            "case": self.case,
            "matrix": matrix_to_json(self.matrix if self.base is None else self.base.matrix),
            "block_index": self.block_index,
            "params": {k: v for k, v in self.params.items()},
            "tol": self.tol,
        }
        if self.base is not None:
            obj["derived"] = True
        return obj


def build_continuous_section(b, tol=DEFAULT_TOL) -> CrossSection:
    """Construct a cross-section for ``gamma -> gamma exp(tB)``.

    Case real_nonzero pins the block's leading coordinate to +/-1;
    complex_nonzero takes the radial segment [1, Lambda) on the zero-angle
    ray of the leading pair (working with -B internally when the real
    part is negative, which reverses reported flow times but not the
    set); zero_nilpotent zeroes the second chain coordinate; the
    imaginary nilpotent case keeps the leading pair on angle zero and
    boxes the third coordinate into [0, 2*pi*p/beta).
    """
    verdict = classify_continuous(b, tol=tol)
    if not verdict.exists:
        raise NoSection("the exponential of this generator is conjugate-orthogonal")
    form = verdict.jordan
    blk = form.blocks[verdict.witness_block]
    params = {}
    if verdict.case == "real_nonzero":
        params["alpha"] = blk.alpha
    elif verdict.case == "complex_nonzero":
        mu = abs(blk.alpha)
        params.update(
            alpha=blk.alpha,
            beta=blk.beta,
            mu=mu,
            log_span=TWO_PI * mu / blk.beta,  # ln of the radial ratio Lambda
        )
    elif verdict.case == "imaginary_nilpotent":
        params["beta"] = blk.beta
    return CrossSection(
        mode="continuous",
        case=verdict.case,
        jordan=form,
        block_index=verdict.witness_block,
        params=params,
        tol=tol,
    )


def build_discrete_section(a, tol=DEFAULT_TOL) -> CrossSection:
    """Construct a cross-section for ``gamma -> gamma A^k``.

    When the witness eigenvalue has modulus below one the construction
    is applied along the inverse action (orbits are identical), so the
    stored radial data always describes the expanding direction.
    """
    verdict = classify_discrete(a, tol=tol)
    if not verdict.exists:
        raise NoSection("matrix is conjugate to an orthogonal matrix")
    form = verdict.jordan
    blk = form.blocks[verdict.witness_block]
    params = {}
    if verdict.case == "modulus_not_one":
        lam = blk.re
        big = max(abs(lam), 1.0 / abs(lam))
        params.update(lam=lam, log_span=math.log(big), expanding=abs(lam) > 1.0)
    elif verdict.case == "complex_modulus_not_one":
        r = blk.modulus
        beta = blk.argument
        expanding = r > 1.0
        mu = abs(math.log(r))
        omega = beta if expanding else TWO_PI - beta
        params.update(
            beta=beta,
            mu=mu,
            omega=omega,
            log_span=TWO_PI * mu / omega,
            expanding=expanding,
        )
    elif verdict.case == "real_modulus_one_nilpotent":
        params["lam"] = 1.0 if blk.re > 0 else -1.0
    elif verdict.case == "complex_modulus_one_nilpotent":
        params["beta"] = blk.argument
    return CrossSection(
        mode="discrete",
        case=verdict.case,
        jordan=form,
        block_index=verdict.witness_block,
        params=params,
        tol=tol,
    )


def derive_discrete_section(section: CrossSection) -> CrossSection:
    """The discrete cross-section swept from a continuous one:
    ``T = {gamma A^t : gamma in S, 0 <= t < 1}`` for ``A = exp(B)``."""
    if section.mode != "continuous":
        raise ValueError("derive_discrete_section expects a continuous section")
    return CrossSection(
        mode="discrete",
        case="derived_from_continuous",
        jordan=section.jordan,
        block_index=section.block_index,
        params=dict(section.params),
        tol=section.tol,
        base=section,
    )


# ---------------------------------------------------------------------------
# membership


def _pair_scale(coords):
    # an overflowing norm yields inf and the point is flagged exceptional
    with np.errstate(over="ignore"):
        return np.maximum(np.linalg.norm(coords, axis=1), 1.0)


def _eq_resolution_mask(section, coords, eq_scale):
    """True where the point's float representation is too coarse to decide
    the case's equality constraints at the working tolerance.

    An ambient vector resolves each Jordan coordinate only to about
    ``eps * cond(Q) * ||c||``; once that noise exceeds the equality
    tolerance the membership question is undecidable and is refused like
    a null-set point."""
    kappa = section.params.get("_conj_cond")
    if kappa is None:
        kappa = float(np.linalg.cond(section.jordan.conjugator_inverse))
        section.params["_conj_cond"] = kappa
    with np.errstate(over="ignore"):
        noise = 8.0 * kappa * np.finfo(float).eps * np.linalg.norm(coords, axis=1)
    return section.tol * eq_scale < noise


def _membership_core(section, coords):
    case = section.case
    off = section.block.offset
    tol = section.tol
    scale = _pair_scale(coords)
    x1 = coords[:, off]

    if case in ("real_nonzero", "zero_nilpotent", "modulus_not_one", "real_modulus_one_nilpotent"):
        exceptional = np.abs(x1) <= tol * scale
        if case == "real_nonzero":
            exceptional |= _eq_resolution_mask(section, coords, 1.0)
        elif case == "zero_nilpotent":
            exceptional |= _eq_resolution_mask(section, coords, np.maximum(np.abs(x1), 1.0))
    else:
        if case == "derived_from_continuous":
            return _derived_membership(section, coords)
        x2 = coords[:, off + 1]
        exceptional = np.hypot(x1, x2) <= tol * scale
        if case in ("complex_nonzero", "imaginary_nilpotent"):
            exceptional |= _eq_resolution_mask(
                section, coords, np.maximum(np.hypot(x1, x2), 1.0)
            )

    if case == "real_nonzero":
        member = np.abs(np.abs(x1) - 1.0) <= tol
    elif case == "zero_nilpotent":
        x2 = coords[:, off + 1]
        member = np.abs(x2) <= tol * np.maximum(np.abs(x1), 1.0)
    elif case == "complex_nonzero":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        on_ray = (np.abs(x2) <= tol * np.maximum(r, 1.0)) & (x1 > 0)
        with np.errstate(divide="ignore"):
            logr = np.log(np.where(r > 0, r, 1.0))
        member = on_ray & (logr >= 0.0) & (logr < section.params["log_span"])
    elif case == "imaginary_nilpotent":
        member = _case4_membership(section, coords)
    elif case == "modulus_not_one":
        a1 = np.abs(x1)
        member = (a1 >= 1.0) & (a1 < math.exp(section.params["log_span"]))
    elif case == "complex_modulus_not_one":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        phi = _angle(x1, x2)
        omega = section.params["omega"]
        mu = section.params["mu"]
        with np.errstate(divide="ignore"):
            logr = np.log(np.where(r > 0, r, 1.0))
        logs = logr - (phi / omega) * mu
        member = (phi < omega) & (logs >= 0.0) & (logs < section.params["log_span"])
    elif case == "real_modulus_one_nilpotent":
        x2 = coords[:, off + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(x1 != 0, x2 / np.where(x1 != 0, x1, 1.0), 0.0)
        member = (ratio >= 0.0) & (ratio < 1.0)
    elif case == "complex_modulus_one_nilpotent":
        u = _flow_time_mod1(section, coords)
        member = (u >= 0.0) & (u < 1.0)
    else:
        raise ValueError(f"unknown case {case!r}")
    return member & ~exceptional, exceptional


def _case4_membership(section, coords):
    off = section.block.offset
    beta = section.params["beta"]
    tol = section.tol
    x1, x2 = coords[:, off], coords[:, off + 1]
    x3 = coords[:, off + 2]
    r = np.hypot(x1, x2)
    on_ray = (np.abs(x2) <= tol * np.maximum(r, 1.0)) & (x1 > 0)
    return on_ray & (x3 >= 0.0) & (x3 < (TWO_PI / beta) * x1)


def _case4_flow_time(beta, x1, x2, x3, x4):
    """Unique flow time ``t`` with ``point @ M(t)`` inside the case-4 set,
    where ``M`` is the 4x4 rotation-with-shear flow of rate ``beta``."""
    p = np.hypot(x1, x2)
    phi = np.arctan2(x2, x1)
    t1 = -phi / beta
    y3, _ = _rotate_rows(x3, x4, beta * t1)
    span = TWO_PI * p / beta
    w = t1 * p + y3
    kk = -np.floor(w / span)
    return t1 + kk * (TWO_PI / beta)


def _flow_time_mod1(section, coords):
    """For the discrete modulus-one complex nilpotent case: ``-t_c`` where
    ``t_c`` is the flow time in the shear-corrected coordinates.  The
    point belongs to the section iff the result lies in [0, 1)."""
    off = section.block.offset
    beta = section.params["beta"]
    x1, x2 = coords[:, off], coords[:, off + 1]
    c3, c4 = coords[:, off + 2], coords[:, off + 3]
    # canonical Jordan coordinates differ from the flow coordinates by one
    # rotation of the second pair
    d3, d4 = _rotate_rows(c3, c4, beta)
    t_c = _case4_flow_time(beta, x1, x2, d3, d4)
    return -t_c


def _derived_membership(section, coords):
    ts, exceptional = _continuous_flow_times(section.base, coords)
    u = -ts
    member = (u >= 0.0) & (u < 1.0) & ~exceptional
    return member, exceptional


# ---------------------------------------------------------------------------
# orbit solving


def _continuous_flow_times(section, coords):
    """Flow times ``t`` with ``gamma @ A^t in S`` for a continuous section."""
    case = section.case
    off = section.block.offset
    tol = section.tol
    scale = _pair_scale(coords)
    x1 = coords[:, off]

    if case == "real_nonzero":
        exceptional = np.abs(x1) <= tol * scale
        alpha = section.params["alpha"]
        safe = np.where(exceptional, 1.0, np.abs(x1))
        t = -np.log(safe) / alpha
        return t, exceptional
    if case == "zero_nilpotent":
        exceptional = np.abs(x1) <= tol * scale
        x2 = coords[:, off + 1]
        t = -x2 / np.where(exceptional, 1.0, x1)
        return t, exceptional
    if case == "complex_nonzero":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        exceptional = r <= tol * scale
        alpha, beta, mu = section.params["alpha"], section.params["beta"], section.params["mu"]
        sigma = 1.0 if alpha > 0 else -1.0
        phi = _angle(x1, x2)
        logr = np.log(np.where(exceptional, 1.0, r))
        c0 = beta * logr / (TWO_PI * mu) - sigma * phi / TWO_PI
        m = -sigma * np.floor(c0)
        t = (-phi + TWO_PI * m) / beta
        return t, exceptional
    if case == "imaginary_nilpotent":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        exceptional = r <= tol * scale
        beta = section.params["beta"]
        x3, x4 = coords[:, off + 2], coords[:, off + 3]
        t = _case4_flow_time(beta, np.where(exceptional, 1.0, x1), x2, x3, x4)
        return t, exceptional
    raise ValueError(f"not a continuous case: {case!r}")


def _discrete_tile_indices(section, coords):
    """Tile indices ``k`` with ``gamma in S @ A^k`` for a discrete section."""
    case = section.case
    off = section.block.offset
    tol = section.tol
    scale = _pair_scale(coords)
    x1 = coords[:, off]

    if case == "modulus_not_one":
        exceptional = np.abs(x1) <= tol * scale
        span = section.params["log_span"]
        u = np.log(np.where(exceptional, 1.0, np.abs(x1))) / span
        # expanding: log|x1| - k*span in [0, span); contracting: + k*span
        k = np.floor(u) if section.params["expanding"] else -np.floor(u)
        return k.astype(int), exceptional
    if case == "complex_modulus_not_one":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        exceptional = r <= tol * scale
        mu, omega = section.params["mu"], section.params["omega"]
        phi = _angle(x1, x2)
        logr = np.log(np.where(exceptional, 1.0, r))
        m = np.floor((omega * logr / mu - phi) / TWO_PI)
        tau = (phi + TWO_PI * m) / omega
        j = np.floor(tau)
        k = j if section.params["expanding"] else -j
        return k.astype(int), exceptional
    if case == "real_modulus_one_nilpotent":
        exceptional = np.abs(x1) <= tol * scale
        lam = section.params["lam"]
        x2 = coords[:, off + 1]
        ratio = x2 / np.where(exceptional, 1.0, x1)
        k = lam * np.floor(ratio)
        return k.astype(int), exceptional
    if case == "complex_modulus_one_nilpotent":
        x2 = coords[:, off + 1]
        r = np.hypot(x1, x2)
        exceptional = r <= tol * scale
        u = _flow_time_mod1(section, coords)
        return np.floor(u).astype(int), exceptional
    if case == "derived_from_continuous":
        ts, exceptional = _continuous_flow_times(section.base, coords)
        return np.floor(-ts).astype(int), exceptional
    raise ValueError(f"not a discrete case: {case!r}")


def _solve_core(section, points, coords):
    if section.mode == "continuous":
        ts, exceptional = _continuous_flow_times(section, coords)
        # flow times whose exponentials leave the float range cannot yield a
        # representable representative: flag instead of overflowing the batch
        alpha_max = max(abs(b.alpha) for b in section.jordan.blocks)
        exceptional = exceptional | (np.abs(ts) * alpha_max > 700.0)
        ts = np.where(exceptional, np.nan, ts)
        reps = np.full_like(points, np.nan)
        ok = ~exceptional
        if np.any(ok):
            flows = jordan_flow_batch(section.jordan, ts[ok])
            rep_coords = np.einsum("sj,sjk->sk", coords[ok], flows)
            reps[ok] = section.jordan.from_jordan(rep_coords)
            _, rep_exc = _membership_core(section, rep_coords)
            if rep_exc.any():
                exceptional = exceptional.copy()
                exceptional[np.flatnonzero(ok)[rep_exc]] = True
        return ts, reps, exceptional
    ks, exceptional = _discrete_tile_indices(section, coords)
    # representatives through Jordan coordinates: the block-diagonal power
    # never mixes scales across blocks, so the constrained coordinates stay
    # accurate even when free blocks grow enormous
    if section.base is None:
        j = section.jordan.jordan_matrix()
        block_power = lambda k: integer_power(j, -int(k))
    else:
        block_power = lambda k: jordan_flow_matrix(section.jordan, -float(k))
    reps = np.full_like(points, np.nan)
    ok = ~exceptional
    for k in np.unique(ks[ok]):
        mask = ok & (ks == k)
        reps[mask] = section.jordan.from_jordan(coords[mask] @ block_power(k))
    # a representative whose own evaluation collapses (constrained block
    # dwarfed by free blocks beyond float resolution) is flagged just like
    # a null-set point: refuse rather than return an unusable answer
    if np.any(ok):
        _, rep_exc = _membership_core(section, section.jordan.to_jordan(reps[ok]))
        exceptional = exceptional.copy()
        exceptional[np.flatnonzero(ok)[rep_exc]] = True
    ks = np.where(exceptional, 0, ks)
    return ks.astype(float), reps, exceptional


def section_matrix(section: CrossSection) -> np.ndarray:
    """The matrix generating the discrete action the section tiles under."""
    if section.mode == "continuous":
        raise ValueError("continuous sections tile under the flow, not a single matrix")
    return section.matrix


# ---------------------------------------------------------------------------
# public scalar API


def contains(section: CrossSection, gamma) -> bool:
    """Exact membership test; raises ExceptionalPoint on the null set."""
    member, exceptional = section.membership(np.atleast_2d(gamma))
    if exceptional[0]:
        raise ExceptionalPoint("point lies in the declared measure-zero set")
    return bool(member[0])


def solve_orbit(section: CrossSection, gamma) -> OrbitSolution:
    """The unique orbit parameter carrying ``gamma`` to the section.

    Continuous: flow time t with ``gamma A^t in S``.  Discrete: tile
    index k with ``gamma in S A^k`` (representative ``gamma A^-k``).
    """
    params, reps, exceptional = section.solve(np.atleast_2d(gamma))
    if exceptional[0]:
        raise ExceptionalPoint("point lies in the declared measure-zero set")
    p = params[0]
    if section.mode == "discrete":
        p = int(p)
    return OrbitSolution(parameter=p, representative=reps[0])


# ---------------------------------------------------------------------------
# section sampling (used by probes and the bounded-shaping checks)


def _sample_core(section, coords, rng):
    case = section.case
    off = section.block.offset
    m = coords.shape[0]
    if case == "real_nonzero":
        coords[:, off] = rng.choice([-1.0, 1.0], size=m)
    elif case == "zero_nilpotent":
        coords[:, off] = _nonzero(rng, m)
        coords[:, off + 1] = 0.0
    elif case == "complex_nonzero":
        coords[:, off] = np.exp(rng.uniform(0.0, section.params["log_span"], m))
        coords[:, off + 1] = 0.0
    elif case == "imaginary_nilpotent":
        beta = section.params["beta"]
        p = np.abs(rng.normal(size=m)) + 0.1
        coords[:, off] = p
        coords[:, off + 1] = 0.0
        coords[:, off + 2] = rng.uniform(0.0, 1.0, m) * (TWO_PI / beta) * p
    elif case == "modulus_not_one":
        span = section.params["log_span"]
        coords[:, off] = rng.choice([-1.0, 1.0], size=m) * np.exp(rng.uniform(0.0, span, m))
    elif case == "complex_modulus_not_one":
        mu, omega = section.params["mu"], section.params["omega"]
        logs = rng.uniform(0.0, section.params["log_span"], m)
        t = rng.uniform(0.0, 1.0, m)
        r = np.exp(logs + t * mu)
        phi = t * omega
        coords[:, off] = r * np.cos(phi)
        coords[:, off + 1] = r * np.sin(phi)
    elif case == "real_modulus_one_nilpotent":
        s = _nonzero(rng, m)
        coords[:, off] = s
        coords[:, off + 1] = s * rng.uniform(0.0, 1.0, m)
    elif case == "complex_modulus_one_nilpotent":
        beta = section.params["beta"]
        p = np.abs(rng.normal(size=m)) + 0.1
        q = rng.uniform(0.0, 1.0, m) * (TWO_PI / beta) * p
        s = rng.normal(size=m)
        t = rng.uniform(0.0, 1.0, m)
        # flow coordinates, then undo the shear correction of the second pair
        theta = beta * t
        x1, x2 = _rotate_rows(p, np.zeros(m), theta)
        d3, d4 = _rotate_rows(q + t * p, s, theta)
        c3, c4 = _rotate_rows(d3, d4, -beta)
        coords[:, off], coords[:, off + 1] = x1, x2
        coords[:, off + 2], coords[:, off + 3] = c3, c4
    elif case == "derived_from_continuous":
        base = section.base
        _sample_core(base, coords, rng)
        ts = rng.uniform(0.0, 1.0, m)
        powers = one_parameter_power_batch(base.jordan, ts)
        ambient = base.jordan.from_jordan(coords)
        pushed = np.einsum("sj,sjk->sk", ambient, powers)
        coords[:] = base.jordan.to_jordan(pushed)
    else:
        raise ValueError(case)


def _nonzero(rng, m):
    v = rng.normal(size=m)
    return np.where(np.abs(v) < 1e-3, 1.0 + np.abs(v), v)


# ---------------------------------------------------------------------------
# JSON round trip


def section_to_json(section: CrossSection) -> dict:
    return section.to_json()


def section_from_json(obj, tol=None) -> CrossSection:
    if "matrix" not in obj and "section" in obj:
        obj = obj["section"]  # accept a whole emitted build document
    mode = obj.get("mode")
    matrix = matrix_from_json(obj["matrix"])
    tol = float(obj.get("tol", DEFAULT_TOL)) if tol is None else tol
    if mode == "continuous":
        section = build_continuous_section(matrix, tol=tol)
    elif mode == "discrete":
        if obj.get("derived") or obj.get("case") == "derived_from_continuous":
            section = derive_discrete_section(build_continuous_section(matrix, tol=tol))
        else:
            section = build_discrete_section(matrix, tol=tol)
    else:
        raise ValueError(f"unknown section mode {mode!r}")
    if "case" in obj and obj["case"] != section.case:
        raise ValueError(f"section JSON case {obj['case']!r} does not match rebuilt case {section.case!r}")
    return section
