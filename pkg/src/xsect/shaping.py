"""Reshape an infinite-measure cross-section into a finite-measure (<= 1)
or bounded one.

The construction slices the section along its free coordinates into
pieces ``S_k`` of finite measure (dyadic sup-norm shells), then pushes
each piece along its own orbit, ``S_k -> S_k A^{n_k}``.  Any choice of
integer shifts preserves the tiling property; the shifts are chosen so
that either the total measure stays below 1 (``delta^{n_k} <=
d_k/m(S_k)`` with weights ``d_k = 2^{-k}`` summing to 1) or every piece
lands inside the closed unit ball.

Membership in the reshaped set is computable: solve the base orbit,
read off which shell the representative lives in, and compare the tile
index with that shell's shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import classify_discrete
from .errors import DetOne, ExceptionalPoint, MixedModuli
from .linalg import integer_power
from .sections import CrossSection, OrbitSolution, build_discrete_section

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ShellPartition:
    """Dyadic sup-norm shells of a d-dimensional span.

    Shell 1 is the open unit sup-norm box; shell k >= 2 collects the
    points with sup-norm in [2^(k-2), 2^(k-1)).  With d = 0 there is a
    single degenerate shell of measure 1.
    """

    dim: int

    def index_of(self, values) -> np.ndarray:
        if self.dim == 0:
            return np.ones(np.asarray(values).shape[0], dtype=int)
        r = np.max(np.abs(values), axis=-1)
        with np.errstate(divide="ignore"):
            k = np.where(r < 1.0, 1, np.floor(np.log2(np.maximum(r, 1.0))).astype(int) + 2)
        return k

    def sup_radius(self, k: int) -> float:
        """Outer sup-norm radius of shell k."""
        if self.dim == 0:
            return 0.0
        return 1.0 if k == 1 else float(2 ** (k - 1))

    def volume(self, k: int) -> float:
        if self.dim == 0:
            return 1.0
        if k == 1:
            return 2.0**self.dim
        hi, lo = 2 ** (k - 1), 2 ** (k - 2)
        return float((2 * hi) ** self.dim - (2 * lo) ** self.dim)

    def sample(self, rng, k: int, count: int) -> np.ndarray:
        """Uniform sample from shell k (rejection from the bounding box)."""
        if self.dim == 0:
            return np.zeros((count, 0))
        hi = self.sup_radius(k)
        lo = 0.0 if k == 1 else hi / 2.0
        out = np.empty((count, self.dim))
        filled = 0
        while filled < count:
            cand = rng.uniform(-hi, hi, size=(count, self.dim))
            keep = np.max(np.abs(cand), axis=1) >= lo
            take = min(count - filled, int(keep.sum()))
            out[filled : filled + take] = cand[keep][:take]
            filled += take
        return out


def _slab_measure(section: CrossSection) -> float:
    """Measure of the constrained part of a case-1/2 discrete section, in
    Jordan coordinates.  The spiral uses an exact area integral times a
    safety factor of 2 (the shift inequality only needs an upper bound)."""
    if section.case == "modulus_not_one":
        lam_big = math.exp(section.params["log_span"])
        return 2.0 * (lam_big - 1.0)
    if section.case == "complex_modulus_not_one":
        mu, omega = section.params["mu"], section.params["omega"]
        lam_big = math.exp(section.params["log_span"])
        exact = (lam_big**2 - 1.0) * (omega / (4.0 * mu)) * (math.exp(2.0 * mu) - 1.0)
        return 2.0 * exact
    raise ValueError(f"no slab measure for case {section.case!r}")


def _euclid_radius(section: CrossSection, shell: ShellPartition, k: int) -> float:
    """Euclidean sup-radius of piece S_k in Jordan coordinates."""
    if section.case == "modulus_not_one":
        core = math.exp(section.params["log_span"])
    else:
        core = math.exp(section.params["log_span"] + section.params["mu"])
    return math.sqrt(core**2 + shell.dim * shell.sup_radius(k) ** 2)


@dataclass(frozen=True)
class ShapedSection:
    """A reshaped cross-section ``union_k S_k A^{n_k}``."""

    base: CrossSection
    target: str  # 'finite' | 'bounded'
    delta: float
    shell: ShellPartition
    free_dims: tuple
    _shifts: dict = field(default_factory=dict, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.base.matrix

    @property
    def n(self) -> int:
        return self.base.n

    def weight(self, k: int) -> float:
        return 2.0 ** (-k)

    def piece_measure_bound(self, k: int) -> float:
        """Upper bound for the ambient measure of S_k."""
        jac = abs(np.linalg.det(self.base.jordan.conjugator_inverse))
        return jac * _slab_measure(self.base) * self.shell.volume(k)

    def shift(self, k: int) -> int:
        """The orbit shift n_k applied to piece k."""
        k = int(k)
        if k not in self._shifts:
            self._shifts[k] = self._compute_shift(k)
        return self._shifts[k]

    def _compute_shift(self, k: int) -> int:
        if self.target == "finite":
            # largest (delta > 1) or smallest (delta < 1) integer with
            # delta^n <= d_k / m(S_k)
            log_target = math.log(self.weight(k)) - math.log(self.piece_measure_bound(k))
            log_delta = math.log(self.delta)
            n = log_target / log_delta
            out = math.floor(n) if self.delta > 1.0 else math.ceil(n)
            # guard against float boundary: enforce the inequality strictly
            while out * log_delta > log_target:
                out += -1 if self.delta > 1.0 else 1
            return int(out)
        # bounded: first shift (by increasing magnitude) pulling the piece
        # into the unit ball, iterating powers in the shrinking direction
        direction = -1 if all(b.modulus > 1.0 for b in self.base.jordan.blocks) else 1
        radius = _euclid_radius(self.base, self.shell, k) * np.linalg.norm(
            self.base.jordan.conjugator, 2
        )
        j = 0
        while True:
            bound = np.linalg.norm(integer_power(self.matrix, direction * j), 2) * radius
            if bound <= 1.0:
                return direction * j
            j += 1
            if j > 10_000:
                raise RuntimeError("no shift pulls the piece into the unit ball")

    # -- evaluation -------------------------------------------------------

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ks, reps, exc = self.base.solve(pts)
        member = np.zeros(pts.shape[0], dtype=bool)
        ok = ~exc
        if np.any(ok):
            rep_coords = self.base.jordan.to_jordan(reps[ok])
            shells = self.shell.index_of(rep_coords[:, list(self.free_dims)])
            wanted = np.array([self.shift(s) for s in shells])
            member[ok] = ks[ok].astype(int) == wanted
        return member, exc

    def solve(self, points):
        """Tile index j with ``gamma in S~ A^j`` and the representative."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ks, reps, exc = self.base.solve(pts)
        params = np.zeros(pts.shape[0])
        out_reps = np.full_like(pts, np.nan)
        ok = ~exc
        if np.any(ok):
            rep_coords = self.base.jordan.to_jordan(reps[ok])
            shells = self.shell.index_of(rep_coords[:, list(self.free_dims)])
            shifts = np.array([self.shift(s) for s in shells])
            params[ok] = ks[ok].astype(int) - shifts
            idx = np.flatnonzero(ok)
            for s in np.unique(shifts):
                push = integer_power(self.matrix, int(s))
                sel = idx[shifts == s]
                out_reps[sel] = reps[sel] @ push
        return params, out_reps, exc

    def sample_pieces(self, rng, count: int, max_shell: int = 12) -> np.ndarray:
        """Draw points from the reshaped set, mixing the first shells."""
        shells = rng.integers(1, max_shell + 1, size=count) if self.shell.dim else np.ones(count, dtype=int)
        out = np.empty((count, self.n))
        for k in np.unique(shells):
            sel = np.flatnonzero(shells == k)
            coords = np.zeros((len(sel), self.n))
            _fill_slab(self.base, coords, rng)
            coords[:, list(self.free_dims)] = self.shell.sample(rng, int(k), len(sel))
            ambient = self.base.jordan.from_jordan(coords)
            out[sel] = ambient @ integer_power(self.matrix, self.shift(int(k)))
        return out

    def bounding_box(self, max_shell: int = 30):
        """Axis-aligned box covering pieces 1..max_shell, plus the measure
        bound ``2^-max_shell`` for everything outside it."""
        lo = np.full(self.n, np.inf)
        hi = np.full(self.n, -np.inf)
        for k in range(1, max_shell + 1):
            box_lo, box_hi = self.piece_box(k)
            lo = np.minimum(lo, box_lo)
            hi = np.maximum(hi, box_hi)
        return lo, hi, self.weight(max_shell)

    def piece_box(self, k: int):
        """Tight axis-aligned box around piece ``S_k A^{n_k}`` (ambient)."""
        box_lo, box_hi = _piece_box(self.base, self.shell, self.free_dims, k)
        push = integer_power(self.matrix, self.shift(k))
        corners = _corners(box_lo, box_hi) @ self.base.jordan.conjugator @ push
        return corners.min(axis=0), corners.max(axis=0)

    def measure_estimate(self, samples: int, seed: int, max_shell: int = 24) -> "MeasureEstimate":
        """Stratified Monte Carlo estimate of the total measure.

        Each piece is sampled inside its own tight box (a global box
        would dwarf the set and make the estimate vacuous); the strata
        estimates and their Bernoulli variances add, and pieces beyond
        ``max_shell`` contribute the tail bound ``2^-max_shell``."""
        per = max(samples // max_shell, 1)
        total = 0.0
        var = 0.0
        rng = np.random.default_rng(seed)
        for k in range(1, max_shell + 1):
            lo, hi = self.piece_box(k)
            vol = float(np.prod(hi - lo))
            pts = rng.uniform(lo, hi, size=(per, self.n))
            member, exc = self.membership(pts)
            p = float(np.count_nonzero(member & ~exc)) / per
            total += p * vol
            var += (p * (1.0 - p) / per) * vol * vol
        return MeasureEstimate(
            estimate=total,
            bound=3.0 * math.sqrt(var),
            samples=per * max_shell,
            seed=seed,
            tail_bound=self.weight(max_shell),
        )

    def to_json(self) -> dict:
        shifts = {str(k): self.shift(k) for k in range(1, 13)}
        return {
            "target": self.target,
            "base": self.base.to_json(),
            "delta": self.delta,
            "weights": "2^-k",
            "shifts_prefix": shifts,
            "piece_measure_bounds": {str(k): self.piece_measure_bound(k) for k in range(1, 13)},
        }


def _fill_slab(section, coords, rng):
    off = section.block.offset
    m = coords.shape[0]
    if section.case == "modulus_not_one":
        lam_big = math.exp(section.params["log_span"])
        coords[:, off] = rng.choice([-1.0, 1.0], size=m) * rng.uniform(1.0, lam_big, m)
    else:
        mu, omega = section.params["mu"], section.params["omega"]
        s = rng.uniform(1.0, math.exp(section.params["log_span"]), m)
        t = rng.uniform(0.0, 1.0, m)
        r = s * np.exp(t * mu)
        coords[:, off] = r * np.cos(t * omega)
        coords[:, off + 1] = r * np.sin(t * omega)


def _piece_box(section, shell, free_dims, k):
    n = section.n
    lo, hi = np.zeros(n), np.zeros(n)
    off = section.block.offset
    if section.case == "modulus_not_one":
        lam_big = math.exp(section.params["log_span"])
        lo[off], hi[off] = -lam_big, lam_big
    else:
        r = math.exp(section.params["log_span"] + section.params["mu"])
        lo[off], hi[off] = -r, r
        lo[off + 1], hi[off + 1] = -r, r
    rad = shell.sup_radius(k)
    for d in free_dims:
        lo[d], hi[d] = -rad, rad
    return lo, hi


def _corners(lo, hi):
    n = len(lo)
    out = np.empty((2**n, n))
    for i in range(2**n):
        for d in range(n):
            out[i, d] = hi[d] if (i >> d) & 1 else lo[d]
    return out


def _free_dims(section: CrossSection):
    off = section.block.offset
    constrained = {off} if section.case == "modulus_not_one" else {off, off + 1}
    return tuple(d for d in range(section.n) if d not in constrained)


def to_finite_measure(section: CrossSection, a=None, tol=None) -> ShapedSection:
    """Reshape into a cross-section of measure at most 1.

    Requires ``|det A| != 1``; under that hypothesis the section built
    by :func:`build_discrete_section` is always one of the two sliceable
    cases (some eigenvalue modulus differs from 1).
    """
    section = _coerce_section(section, a)
    tol = section.tol if tol is None else tol
    delta = abs(float(np.linalg.det(section.matrix)))
    if abs(delta - 1.0) <= tol:
        raise DetOne(f"|det A| = {delta!r}: no finite-measure cross-section exists")
    if section.case not in ("modulus_not_one", "complex_modulus_not_one"):
        raise ValueError(f"finite-measure reshaping needs a sliceable section, got case {section.case!r}")
    free = _free_dims(section)
    return ShapedSection(
        base=section,
        target="finite",
        delta=delta,
        shell=ShellPartition(dim=len(free)),
        free_dims=free,
    )


def to_bounded(section: CrossSection, a=None, tol=None) -> ShapedSection:
    """Reshape into a cross-section inside the closed unit ball.

    Requires every eigenvalue modulus strictly on one side of 1."""
    section = _coerce_section(section, a)
    tol = section.tol if tol is None else tol
    verdict = classify_discrete(section.matrix, tol=tol)
    if not verdict.bounded:
        raise MixedModuli("eigenvalue moduli straddle 1: no bounded cross-section exists")
    free = _free_dims(section)
    return ShapedSection(
        base=section,
        target="bounded",
        delta=abs(float(np.linalg.det(section.matrix))),
        shell=ShellPartition(dim=len(free)),
        free_dims=free,
    )


def _coerce_section(section, a):
    if isinstance(section, CrossSection):
        if section.mode != "discrete" or section.case == "derived_from_continuous":
            raise ValueError("reshaping applies to the native discrete sections")
        if a is not None and not np.allclose(np.asarray(a, dtype=float), section.matrix):
            raise ValueError("matrix argument disagrees with the section's matrix")
        return section
    # allow passing the matrix directly
    return build_discrete_section(section if a is None else a)


def shaped_contains(shaped: ShapedSection, gamma) -> bool:
    member, exc = shaped.membership(np.atleast_2d(gamma))
    if exc[0]:
        raise ExceptionalPoint("point lies in the declared measure-zero set")
    return bool(member[0])


def shaped_solve_orbit(shaped: ShapedSection, gamma) -> OrbitSolution:
    params, reps, exc = shaped.solve(np.atleast_2d(gamma))
    if exc[0]:
        raise ExceptionalPoint("point lies in the declared measure-zero set")
    return OrbitSolution(parameter=int(params[0]), representative=reps[0])


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    bound: float  # 3-sigma Bernoulli half-width
    samples: int
    seed: int
    box_volume: float | None = None
    tail_bound: float = 0.0

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "bound_3sigma": self.bound,
            "samples": self.samples,
            "seed": self.seed,
            "box_volume": self.box_volume,
            "tail_bound": self.tail_bound,
        }


def estimate_measure(region, box_lo, box_hi, samples: int, seed: int, tail_bound=0.0) -> MeasureEstimate:
    """Unbiased Monte Carlo estimate of the measure of ``region`` inside a
    box, with a 3-sigma Bernoulli half-width.

    ``region`` needs a vectorized ``membership(points) -> (member, exc)``
    method; exceptional points count as misses (they form a null set).
    """
    lo = np.asarray(box_lo, dtype=float)
    hi = np.asarray(box_hi, dtype=float)
    vol = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    chunk = 200_000
    while done < samples:
        take = min(chunk, samples - done)
        pts = rng.uniform(lo, hi, size=(take, len(lo)))
        member, exc = region.membership(pts)
        hits += int(np.count_nonzero(member & ~exc))
        done += take
    p = hits / samples
    sigma = math.sqrt(max(p * (1.0 - p), 1e-300) / samples)
    return MeasureEstimate(
        estimate=p * vol,
        bound=3.0 * sigma * vol,
        samples=samples,
        seed=seed,
        box_volume=vol,
        tail_bound=tail_bound,
    )
