"""Lattice machinery and multi-wavelet set construction / partitioning.

A set K is a multi-wavelet set of order L for (A, Gamma) iff its
dual-lattice translates cover R^n with multiplicity L while its
A-dilates cover with multiplicity 1.  Verified sets are partitioned
into order-1 pieces by repeatedly extracting a coset selector U(K):
the first dual-lattice translate (in a fixed total order) carrying each
residue class into K.  Box-union geometry keeps every set operation
exact; analytic geometries (cones, dilation-shifted slabs) evaluate
pointwise with a lattice-local enumerator bounded by an explicit
radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import classify_discrete
from .errors import NoWavelet, SearchExhausted, SelectorMiss
from .linalg import as_matrix, integer_power, matrix_from_json, matrix_to_json
from .sections import build_discrete_section

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice ``Gamma = {z @ basis : z in Z^n}`` (rows generate).

    The dual lattice is generated by the rows of ``inv(basis).T``; its
    fundamental domain Y is the half-open parallelepiped of the dual
    basis.
    """

    basis: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "basis", as_matrix(self.basis))
        if abs(np.linalg.det(self.basis)) < 1e-300:
            raise ValueError("lattice basis must be invertible")

    def ordered_dual_points(self, count: int) -> np.ndarray:
        """The first ``count`` dual points in selector order, as an array."""
        have = self._cache.get("ordered")
        if have is None or len(have) < count:
            pts = [g for _, g in self.dual_points_in_order(max_points=count)]
            have = np.asarray(pts)
            self._cache["ordered"] = have
        return have[:count]

    def dual_points_within(self, radius: float) -> np.ndarray:
        """Dual points of norm <= radius, in selector order (cached)."""
        key = ("ball", float(radius))
        if key not in self._cache:
            pts = [g for _, g in self.dual_points_in_order(max_norm=radius)]
            self._cache[key] = np.asarray(pts) if pts else np.zeros((0, self.n))
        return self._cache[key]

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dual_basis(self) -> np.ndarray:
        return np.linalg.inv(self.basis).T

    def dual_point(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.dual_basis

    def wrap(self, xi):
        """Split ``xi = eta + gamma`` with eta in Y and gamma dual."""
        xi = np.asarray(xi, dtype=float)
        u = xi @ np.linalg.inv(self.dual_basis)
        z = np.floor(u)
        eta = (u - z) @ self.dual_basis
        return eta, z.astype(int)

    def domain_corners(self) -> np.ndarray:
        d = self.dual_basis
        n = self.n
        out = np.zeros((2**n, n))
        for i in range(2**n):
            for b in range(n):
                if (i >> b) & 1:
                    out[i] += d[b]
        return out

    def domain_diameter(self) -> float:
        corners = self.domain_corners()
        return max(
            float(np.linalg.norm(corners[i] - corners[j]))
            for i in range(len(corners))
            for j in range(i + 1, len(corners))
        )

    def dual_points_in_order(self, max_points=None, max_norm=None):
        """Dual lattice points ordered by increasing norm, ties broken
        lexicographically on the integer coordinates."""
        shell = 0
        emitted = 0
        pending = []
        while True:
            zs = _integer_shell(self.n, shell)
            for z in zs:
                g = self.dual_point(z)
                pending.append((float(np.linalg.norm(g)), tuple(z), g))
            # a shell of integer radius r yields dual norms >= r * s_min;
            # flush entries that can no longer be beaten by later shells
            smin = 1.0 / np.linalg.norm(np.linalg.inv(self.dual_basis), 2)
            safe = (shell + 1) * smin
            pending.sort(key=lambda e: (e[0], e[1]))
            while pending and pending[0][0] <= safe:
                norm, z, g = pending.pop(0)
                if max_norm is not None and norm > max_norm:
                    return
                yield np.asarray(z, dtype=int), g
                emitted += 1
                if max_points is not None and emitted >= max_points:
                    return
            shell += 1
            if max_norm is not None and shell * smin > max_norm and not pending:
                return

    def to_json(self) -> dict:
        return {"basis": matrix_to_json(self.basis)}

    @staticmethod
    def from_json(obj) -> "Lattice":
        return Lattice(matrix_from_json(obj["basis"]))

    @staticmethod
    def integers(n) -> "Lattice":
        return Lattice(np.eye(n))


def _integer_shell(n, r):
    """Integer vectors with sup-norm exactly r, lexicographic order."""
    if r == 0:
        return [np.zeros(n, dtype=int)]
    rng = range(-r, r + 1)
    out = []

    def rec(prefix):
        if len(prefix) == n:
            if max(abs(v) for v in prefix) == r:
                out.append(np.array(prefix, dtype=int))
            return
        for v in rng:
            rec(prefix + [v])

    rec([])
    return out


# ---------------------------------------------------------------------------
# region geometry


class RegionSet:
    """Base protocol: vectorized membership plus a lattice-local enumerator."""

    exact_reach = False  # True when the enumerator is complete (no truncation)

    def membership(self, points):
        raise NotImplementedError

    def contains(self, xi) -> bool:
        member, _ = self.membership(np.atleast_2d(xi))
        return bool(member[0])

    def candidate_dual_points(self, lattice: Lattice, xi, radius):
        """Dual points gamma with ``xi + gamma`` possibly inside the set.

        Complete within the radius: no false negatives among
        ``||gamma|| <= radius``."""
        return lattice.dual_points_within(radius)


@dataclass(frozen=True)
class BoxUnion(RegionSet):
    """Finite union of pairwise-disjoint half-open boxes [lo, hi)."""

    boxes: tuple  # tuple of (lo, hi) float tuple pairs

    exact_reach = True

    @staticmethod
    def build(boxes) -> "BoxUnion":
        norm = []
        for lo, hi in boxes:
            lo = tuple(float(v) for v in np.atleast_1d(lo))
            hi = tuple(float(v) for v in np.atleast_1d(hi))
            if len(lo) != len(hi):
                raise ValueError("box endpoints disagree in dimension")
            if any(h <= l for l, h in zip(lo, hi)):
                continue  # empty box
            norm.append((lo, hi))
        norm.sort()
        out = BoxUnion(boxes=tuple(norm))
        out._check_disjoint()
        return out

    def _check_disjoint(self):
        for i in range(len(self.boxes)):
            for j in range(i + 1, len(self.boxes)):
                if _boxes_overlap(self.boxes[i], self.boxes[j]):
                    raise ValueError(f"boxes {i} and {j} overlap")

    @property
    def n(self) -> int:
        return len(self.boxes[0][0]) if self.boxes else 0

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        member = np.zeros(pts.shape[0], dtype=bool)
        for lo, hi in self.boxes:
            inside = np.all((pts >= np.asarray(lo)) & (pts < np.asarray(hi)), axis=1)
            member |= inside
        return member, np.zeros(pts.shape[0], dtype=bool)

    def measure(self) -> float:
        return float(sum(np.prod(np.asarray(hi) - np.asarray(lo)) for lo, hi in self.boxes))

    def bounding_box(self):
        if not self.boxes:
            return None
        lo = np.min([b[0] for b in self.boxes], axis=0)
        hi = np.max([b[1] for b in self.boxes], axis=0)
        return lo, hi

    def candidate_dual_points(self, lattice: Lattice, xi, radius=None):
        """Exact: integer ranges solved per box through the dual basis."""
        xi = np.asarray(xi, dtype=float)
        dinv = np.linalg.inv(lattice.dual_basis)
        seen = {}
        for lo, hi in self.boxes:
            corners = _box_corners(np.asarray(lo) - xi, np.asarray(hi) - xi) @ dinv
            zlo = np.floor(corners.min(axis=0)).astype(int)
            zhi = np.ceil(corners.max(axis=0)).astype(int)
            for z in _integer_box(zlo, zhi):
                seen[tuple(z)] = lattice.dual_point(z)
        return np.asarray(list(seen.values())) if seen else np.zeros((0, lattice.n))

    def translate(self, offset) -> "BoxUnion":
        off = np.asarray(offset, dtype=float)
        return BoxUnion.build([(np.asarray(lo) + off, np.asarray(hi) + off) for lo, hi in self.boxes])

    def intersect(self, other: "BoxUnion") -> "BoxUnion":
        out = []
        for a in self.boxes:
            for b in other.boxes:
                piece = _box_intersect(a, b)
                if piece is not None:
                    out.append(piece)
        return BoxUnion.build(out)

    def difference(self, other: "BoxUnion") -> "BoxUnion":
        pieces = list(self.boxes)
        for b in other.boxes:
            nxt = []
            for a in pieces:
                nxt.extend(_box_subtract(a, b))
            pieces = nxt
        return BoxUnion.build(pieces)

    def union_disjoint(self, other: "BoxUnion") -> "BoxUnion":
        return BoxUnion.build(list(self.boxes) + list(other.difference(self).boxes))

    def is_empty(self) -> bool:
        return not self.boxes

    def to_json(self) -> dict:
        return {
            "kind": "boxes",
            "boxes": [{"lo": list(lo), "hi": list(hi)} for lo, hi in self.boxes],
        }


def _boxes_overlap(a, b):
    return all(al < bh and bl < ah for al, ah, bl, bh in zip(a[0], a[1], b[0], b[1]))


def _box_intersect(a, b):
    lo = tuple(max(al, bl) for al, bl in zip(a[0], b[0]))
    hi = tuple(min(ah, bh) for ah, bh in zip(a[1], b[1]))
    if any(h <= l for l, h in zip(lo, hi)):
        return None
    return (lo, hi)


def _box_subtract(a, b):
    """a minus b as a list of disjoint half-open boxes."""
    if _box_intersect(a, b) is None:
        return [a]
    out = []
    lo = list(a[0])
    hi = list(a[1])
    core_lo = [max(al, bl) for al, bl in zip(a[0], b[0])]
    core_hi = [min(ah, bh) for ah, bh in zip(a[1], b[1])]
    for d in range(len(lo)):
        if lo[d] < core_lo[d]:
            piece_lo, piece_hi = list(lo), list(hi)
            piece_hi[d] = core_lo[d]
            out.append((tuple(piece_lo), tuple(piece_hi)))
            lo[d] = core_lo[d]
        if core_hi[d] < hi[d]:
            piece_lo, piece_hi = list(lo), list(hi)
            piece_lo[d] = core_hi[d]
            out.append((tuple(piece_lo), tuple(piece_hi)))
            hi[d] = core_hi[d]
    return out


def _box_corners(lo, hi):
    n = len(lo)
    out = np.empty((2**n, n))
    for i in range(2**n):
        for d in range(n):
            out[i, d] = hi[d] if (i >> d) & 1 else lo[d]
    return out


def _integer_box(zlo, zhi):
    ranges = [range(int(l), int(h) + 1) for l, h in zip(zlo, zhi)]
    out = [[]]
    for r in ranges:
        out = [prefix + [v] for prefix in out for v in r]
    return [np.asarray(v, dtype=int) for v in out]


@dataclass(frozen=True)
class PredicateRegion(RegionSet):
    """Analytic region: membership closure plus an optional bounded reach.

    Composed regions (partition residuals) get queried repeatedly on the
    same probe arrays, so results are memoized on the array bytes.
    """

    fn: object
    name: str = "analytic"
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        key = (pts.shape, hash(pts.tobytes()))
        member = self._memo.get(key)
        if member is None:
            member = np.asarray(self.fn(pts), dtype=bool)
            if len(self._memo) > 32:
                self._memo.clear()
            self._memo[key] = member
        return member, np.zeros(pts.shape[0], dtype=bool)

    def to_json(self) -> dict:
        return {"kind": "analytic", "name": self.name}


# ---------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class TranslationCount:
    value: int
    truncated: bool

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, TranslationCount):
            return (self.value, self.truncated) == (other.value, other.truncated)
        return not self.truncated and self.value == other

    def __ge__(self, other):
        return self.value >= other


def translation_count(region: RegionSet, lattice: Lattice, xi, radius=100.0) -> TranslationCount:
    """``#{gamma in dual : xi + gamma in region}``.

    Exact for box unions (their enumerator is complete); for analytic
    regions the count is over dual points within the radius and flagged
    truncated."""
    xi = np.asarray(xi, dtype=float)
    if region.exact_reach:
        cands = region.candidate_dual_points(lattice, xi)
        truncated = False
    else:
        cands = region.candidate_dual_points(lattice, xi, radius)
        truncated = True
    if len(cands) == 0:
        return TranslationCount(0, truncated)
    member, exc = region.membership(xi + cands)
    return TranslationCount(int(np.count_nonzero(member & ~exc)), truncated)


def translation_counts(region: RegionSet, lattice: Lattice, xis, radius=100.0, chunk=64) -> np.ndarray:
    """Vectorized :func:`translation_count` over a stack of points, using a
    shared candidate ball (moderate chunks keep recursive membership cheap)."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    cands = lattice.dual_points_within(radius)
    out = np.empty(len(xis), dtype=int)
    for start in range(0, len(xis), chunk):
        part = xis[start : start + chunk]
        probe = (part[:, None, :] + cands[None, :, :]).reshape(-1, xis.shape[1])
        member, exc = region.membership(probe)
        out[start : start + chunk] = (member & ~exc).reshape(len(part), len(cands)).sum(axis=1)
    return out


def dilation_count(region: RegionSet, a, xi, k_range=(-60, 60)) -> int:
    """``#{j in k_range : xi A^j in region}``."""
    a = as_matrix(a)
    xi = np.asarray(xi, dtype=float)
    pts = np.vstack([xi @ integer_power(a, j) for j in range(k_range[0], k_range[1] + 1)])
    member, exc = region.membership(pts)
    return int(np.count_nonzero(member & ~exc))


def dimension_function(region: RegionSet, xi, radius=100.0) -> TranslationCount:
    """Integer-lattice translation count ``#{k in Z^n : xi + k in region}``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return translation_count(region, Lattice.integers(len(xi)), xi, radius=radius)


def is_multiwavelet_set(region: RegionSet, a, lattice: Lattice, order, *,
                        samples=1000, seed=0, k_range=(-60, 60), radius=100.0,
                        min_count=10):
    """Sampled test of the order-L characterization: translation counts
    all equal L (or >= min_count when L is infinite) and dilation counts
    all equal 1."""
    from .verify import TilingReport  # local import to avoid a cycle

    a = as_matrix(a)
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(samples, a.shape[0]))
    failures = []
    hist = {}
    for xi in pts:
        tc = translation_count(region, lattice, xi, radius=radius)
        dc = dilation_count(region, a, xi, k_range=k_range)
        ok_t = (tc.value >= min_count) if order == math.inf else (not tc.truncated and tc.value == order)
        key = (tc.value, dc)
        hist[key] = hist.get(key, 0) + 1
        if not (ok_t and dc == 1):
            if len(failures) < 20:
                failures.append(
                    {"point": [float(v) for v in xi], "translation": tc.value, "dilation": dc}
                )
    passed = not failures
    histogram = {f"t{t}_d{d}": c for (t, d), c in sorted(hist.items())}
    return TilingReport(
        kind="multiwavelet",
        samples=samples,
        seed=seed,
        passed=passed,
        histogram=histogram,
        failures=failures,
        scan={"k_lo": k_range[0], "k_hi": k_range[1], "radius": radius,
              "order": "inf" if order == math.inf else int(order)},
    )


# ---------------------------------------------------------------------------
# saturation and the coset selector


@dataclass(frozen=True)
class SaturatedRegion(RegionSet):
    """``M^t = union of (M + gamma)`` over the dual lattice."""

    base: RegionSet
    lattice: Lattice
    radius: float = 100.0

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        member = np.zeros(pts.shape[0], dtype=bool)
        for i, xi in enumerate(pts):
            cands = (
                self.base.candidate_dual_points(self.lattice, xi)
                if self.base.exact_reach
                else self.base.candidate_dual_points(self.lattice, xi, self.radius)
            )
            if len(cands):
                m, exc = self.base.membership(xi + cands)
                member[i] = bool(np.any(m & ~exc))
        return member, np.zeros(pts.shape[0], dtype=bool)


def saturate(region: RegionSet, lattice: Lattice, radius=100.0) -> RegionSet:
    return SaturatedRegion(base=region, lattice=lattice, radius=radius)


def coset_selector_U(region: RegionSet, lattice: Lattice, *, search_points=4000) -> RegionSet:
    """The selector U(K): keep, in each dual-coset, the first point of K in
    the fixed dual order (increasing norm, lexicographic ties).

    Exact box-union geometry when K is a box union; otherwise a
    pointwise selector with a bounded search."""
    if isinstance(region, BoxUnion):
        return _selector_boxes(region, lattice, search_points)
    return _SelectorRegion(base=region, lattice=lattice, search_points=search_points)


def _selector_boxes(region: BoxUnion, lattice: Lattice, search_points) -> BoxUnion:
    # Y as a box needs an axis-aligned dual basis with positive diagonal;
    # general lattices fall back to the pointwise selector
    if not _is_axis_aligned(lattice.dual_basis):
        return _SelectorRegion(base=region, lattice=lattice, search_points=search_points)
    n = lattice.n
    y = BoxUnion.build([(np.zeros(n), np.diag(lattice.dual_basis))])
    covered = BoxUnion.build([])
    selected = []
    bbox = region.bounding_box()
    if bbox is None:
        raise SelectorMiss("selector of an empty region", radius=0.0)
    reach = float(np.max(np.abs(np.concatenate(bbox)))) + float(np.max(np.diag(lattice.dual_basis))) + 1.0
    for z, g in lattice.dual_points_in_order(max_norm=reach):
        pulled = region.translate(-g).intersect(y)
        fresh = pulled.difference(covered)
        if not fresh.is_empty():
            selected.append(fresh.translate(g))
            covered = covered.union_disjoint(fresh)
        if covered.measure() >= y.measure() - 1e-12:
            break
    else:
        raise SelectorMiss(
            f"selector did not cover the fundamental domain within radius {reach}",
            radius=reach,
        )
    out = BoxUnion.build([])
    for piece in selected:
        out = out.union_disjoint(piece)
    return out


def _is_axis_aligned(m):
    return np.allclose(m, np.diag(np.diag(m))) and np.all(np.diag(m) > 0)


@dataclass(frozen=True)
class _SelectorRegion(RegionSet):
    base: RegionSet
    lattice: Lattice
    search_points: int

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        member = np.zeros(pts.shape[0], dtype=bool)
        base_m, base_exc = self.base.membership(pts)
        active = np.flatnonzero(base_m & ~base_exc)
        if active.size == 0:
            return member, np.zeros(pts.shape[0], dtype=bool)
        u = pts[active] @ np.linalg.inv(self.lattice.dual_basis)
        etas = (u - np.floor(u)) @ self.lattice.dual_basis
        firsts = _first_hit_batch(self.base, self.lattice, etas, self.search_points)
        member[active] = np.all(np.abs(etas + firsts - pts[active]) <= 1e-9, axis=1)
        return member, np.zeros(pts.shape[0], dtype=bool)


def _first_hit(region, lattice, eta, search_points):
    out = _first_hit_batch(region, lattice, np.atleast_2d(eta), search_points)
    return out[0]


def _first_hit_batch(region, lattice, etas, search_points):
    """First dual point (selector order) hitting the region, per row of
    ``etas``; all rows are resolved against shared candidate blocks."""
    m_pts = etas.shape[0]
    firsts = np.full((m_pts, etas.shape[1]), np.nan)
    unresolved = np.arange(m_pts)
    cands = lattice.ordered_dual_points(search_points)
    # geometrically growing blocks: most rows resolve among the first few
    # candidates, so the wide (expensive) probes see few unresolved rows
    start, block_size = 0, 8
    while start < len(cands):
        block = cands[start : start + block_size]
        probe = (etas[unresolved][:, None, :] + block[None, :, :]).reshape(-1, etas.shape[1])
        member, exc = region.membership(probe)
        hits = (member & ~exc).reshape(len(unresolved), len(block))
        any_hit = hits.any(axis=1)
        if np.any(any_hit):
            first_idx = np.argmax(hits[any_hit], axis=1)
            firsts[unresolved[any_hit]] = block[first_idx]
            unresolved = unresolved[~any_hit]
        if unresolved.size == 0:
            return firsts
        start += len(block)
        block_size = min(4 * block_size, 4096)
    miss = etas[unresolved[0]]
    raise SelectorMiss(
        f"no dual translate within {search_points} candidates hits the region",
        point=[float(v) for v in miss],
        radius=float(search_points),
    )


# ---------------------------------------------------------------------------
# partitioning


def partition_multiwavelet_set(region: RegionSet, lattice: Lattice, order, *,
                               pieces=None, search_points=4000):
    """Split a multi-wavelet set of order L into order-1 pieces.

    Finite L: L selector extractions (no seeding partition is needed).
    Infinite L: seed piece i with the translate Y + gamma_i of the dual
    fundamental domain (selector order), add the selector of what is
    left, and subtract the saturation overlap; ``pieces`` many pieces
    are produced.
    """
    if order == math.inf:
        if pieces is None:
            raise ValueError("pieces= is required for infinite order")
        return _partition_infinite(region, lattice, pieces, search_points)
    out = []
    residual = region
    for _ in range(int(order)):
        u = coset_selector_U(residual, lattice, search_points=search_points)
        out.append(u)
        residual = _region_difference(residual, u)
    return out


def _region_difference(a, b):
    if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
        return a.difference(b)
    return PredicateRegion(
        fn=lambda pts, a=a, b=b: a.membership(pts)[0] & ~b.membership(pts)[0],
        name="difference",
    )


def _partition_infinite(region, lattice, pieces, search_points):
    gammas = [g for _, g in lattice.dual_points_in_order(max_points=pieces)]
    out = []
    residual = region
    for i in range(pieces):
        v_i = _domain_translate(lattice, gammas[i])
        inter = _region_intersect(v_i, residual)
        u = coset_selector_U(residual, lattice, search_points=search_points)
        # saturation of V_i cap L: every point has exactly one dual translate
        # inside V_i, namely its wrap plus gamma_i
        sat = _DomainPieceSaturation(residual=residual, lattice=lattice, gamma=gammas[i])
        piece = _region_union(inter, _region_difference(u, sat))
        out.append(piece)
        residual = _region_difference(residual, piece)
    return out


@dataclass(frozen=True)
class _DomainPieceSaturation(RegionSet):
    """``(V cap L)^t`` for a fundamental-domain translate ``V = Y + gamma``:
    membership reduces to one residual query at the wrapped point."""

    residual: RegionSet
    lattice: Lattice
    gamma: np.ndarray

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        u = pts @ np.linalg.inv(self.lattice.dual_basis)
        etas = (u - np.floor(u)) @ self.lattice.dual_basis
        member, exc = self.residual.membership(etas + self.gamma)
        return member & ~exc, np.zeros(pts.shape[0], dtype=bool)


def _domain_translate(lattice, gamma):
    if _is_axis_aligned(lattice.dual_basis):
        return BoxUnion.build([(gamma, gamma + np.diag(lattice.dual_basis))])
    return PredicateRegion(
        fn=lambda pts, lat=lattice, g=gamma: np.array(
            [np.allclose(lat.wrap(p)[0] + g, p, atol=1e-9) for p in np.atleast_2d(pts)]
        ),
        name="fundamental_translate",
    )


def _region_intersect(a, b):
    if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
        return a.intersect(b)
    return PredicateRegion(
        fn=lambda pts, a=a, b=b: a.membership(pts)[0] & b.membership(pts)[0],
        name="intersection",
    )


def _region_union(a, b):
    if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
        return a.union_disjoint(b)
    return PredicateRegion(
        fn=lambda pts, a=a, b=b: a.membership(pts)[0] | b.membership(pts)[0],
        name="union",
    )


# ---------------------------------------------------------------------------
# order-infinity wavelet sets


@dataclass(frozen=True)
class DilationShiftedSection(RegionSet):
    """``union_i S_i A^{k_i}`` over ALL dyadic radial slices of an expanding
    cross-section, each pushed far enough out to swallow a dual-domain
    translate.  Shifts are computed lazily per slab index; the first
    ``pieces`` slabs carry explicit dual-point certificates."""

    section: object  # CrossSection for the expanding action
    lattice: Lattice
    pieces: int
    max_power: int = 400
    _shifts: dict = field(default_factory=dict, repr=False)
    _certs: dict = field(default_factory=dict, repr=False)

    @property
    def matrix(self):
        return self.section.matrix

    def shift(self, i: int) -> int:
        i = int(i)
        if i not in self._shifts:
            self._shifts[i] = _slab_shift(self.section, self.lattice, i, self.max_power)
        return self._shifts[i]

    def certificate(self, i: int):
        """(power, dual point) with ``Y + gamma`` inside piece i."""
        i = int(i)
        if i not in self._certs:
            k = self.shift(i)
            lo, hi = _slab_bounds(self.section, i)
            growth = _slab_growth(self.section)
            gamma = _dual_point_in_slab(
                self.section, self.lattice, lo * growth**k, hi * growth**k,
                None if self.section.case == "modulus_not_one" else k,
            )
            if gamma is None:
                raise SearchExhausted(f"no certified dual translate for piece {i}", radius=k)
            self._certs[i] = (k, tuple(float(v) for v in gamma))
        return self._certs[i]

    @property
    def certificates(self):
        return tuple((i,) + tuple(self.certificate(i)) for i in range(1, self.pieces + 1))

    def membership(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ks, reps, exc = self.section.solve(pts)
        member = np.zeros(pts.shape[0], dtype=bool)
        ok = ~exc
        if np.any(ok):
            coords = self.section.jordan.to_jordan(reps[ok])
            sval = _radial_coordinate(self.section, coords)
            idx = _dyadic_slab_index(self.section, sval)
            wanted = np.array([self.shift(i) for i in idx], dtype=np.int64)
            member[ok] = ks[ok].astype(np.int64) == wanted
        return member, exc

    def piece_boxes_1d(self, i: int):
        """For the scalar case: the pushed slab ±[lo, hi) * growth^k."""
        lo, hi = _slab_bounds(self.section, i)
        g = _slab_growth(self.section) ** self.shift(i)
        return (lo * g, hi * g)

    def to_json(self) -> dict:
        return {
            "kind": "dilation_shifted_section",
            "pieces": self.pieces,
            "certificates": [
                {"piece": int(i), "power": int(k), "dual_point": list(g)}
                for i, k, g in self.certificates
            ],
        }


def _radial_coordinate(section, coords):
    """The expanding radial coordinate of the representative: |x1| for a
    real witness, the spiral radial index for a complex pair."""
    off = section.block.offset
    if section.case == "modulus_not_one":
        return np.abs(coords[:, off])
    x1, x2 = coords[:, off], coords[:, off + 1]
    phi = np.mod(np.arctan2(x2, x1), TWO_PI)
    r = np.hypot(x1, x2)
    return np.exp(np.log(np.maximum(r, 1e-300)) - (phi / section.params["omega"]) * section.params["mu"])


def _dyadic_slab_index(section, sval):
    """Index of the dyadic slab [Lam - (Lam-1) 2^{1-i}, Lam - (Lam-1) 2^{-i})."""
    lam_big = math.exp(section.params["log_span"])
    frac = (lam_big - sval) / (lam_big - 1.0)
    with np.errstate(divide="ignore"):
        i = np.floor(-np.log2(np.maximum(frac, 1e-300))).astype(int) + 1
    return np.clip(i, 0, None)


def _slab_bounds(section, i):
    lam_big = math.exp(section.params["log_span"])
    lo = lam_big - (lam_big - 1.0) * 2.0 ** (1 - i)
    hi = lam_big - (lam_big - 1.0) * 2.0 ** (-i)
    return lo, hi


def _slab_growth(section):
    """Scaling of the radial coordinate per step of the expanding action."""
    if section.case == "modulus_not_one":
        return math.exp(section.params["log_span"])
    return math.exp(section.params["mu"])


def _slab_shift(section, lattice, i, max_power):
    """Power pushing slab i over a whole dual-domain translate.

    For a real witness the width rule suffices: once the pushed slab is
    at least twice the domain diameter wide, the tile of its midpoint
    fits.  The spiral additionally needs the conservative geometric test
    to succeed."""
    lo, hi = _slab_bounds(section, i)
    diam = lattice.domain_diameter()
    growth = _slab_growth(section)
    k_min = max(1, math.ceil(math.log(2.0 * diam / (hi - lo)) / math.log(growth)))
    if section.case == "modulus_not_one":
        return int(k_min)
    for k in range(int(k_min), max_power + 1):
        if _dual_point_in_slab(section, lattice, lo * growth**k, hi * growth**k, k) is not None:
            return k
    raise SearchExhausted(f"no admissible push for slab {i} within {max_power} powers", radius=max_power)


def build_order_infinity_set(a, lattice: Lattice, *, pieces=8, tol=1e-9,
                             max_power=200, search_radius=100.0) -> RegionSet:
    """A set whose dilates tile once and whose dual translates cover with
    infinite multiplicity (certified for finitely many translates).

    With an eigenvalue off the unit circle, dyadic radial slices of the
    expanding cross-section are pushed outward until each provably
    contains a dual-domain translate (the certificate).  With all
    moduli on the unit circle the nilpotent cone section itself works:
    far enough out along an interior ray, whole dual-domain translates
    fit inside it.
    """
    a = as_matrix(a)
    if a.shape[0] != lattice.n:
        raise ValueError("matrix and lattice dimensions disagree")
    if a.shape[0] > 3:
        raise ValueError("the lattice search is supported for n <= 3")
    verdict = classify_discrete(a, tol=tol)
    if not verdict.exists:
        raise NoWavelet("matrix is similar to a unitary matrix")
    moduli = [b.modulus for b in verdict.jordan.blocks]
    if any(abs(m - 1.0) > tol for m in moduli):
        work = a
        if max(moduli) <= 1.0 + tol:
            work = np.linalg.inv(a)  # orbits agree; build along the expanding side
        section = build_discrete_section(work, tol=tol)
        return _build_case_moduli(section, lattice, pieces, max_power)
    return _certify_cone(a, lattice, tol=tol, min_translates=pieces, search_radius=search_radius)


def _build_case_moduli(section, lattice, pieces, max_power):
    if section.case not in ("modulus_not_one", "complex_modulus_not_one"):
        raise NoWavelet("no eigenvalue with modulus away from 1")
    out = DilationShiftedSection(section=section, lattice=lattice, pieces=pieces, max_power=max_power)
    for i in range(1, pieces + 1):
        out.certificate(i)  # force the certificate search now
    return out


def _dual_point_in_slab(section, lattice, slab_lo, slab_hi, spiral_k):
    """A dual point whose whole domain translate fits inside the pushed
    slab region; the smallest in selector order among the candidates
    examined (both sign branches for a real witness)."""
    off = section.block.offset
    corners = lattice.domain_corners()
    if spiral_k is None:
        # region: |x_{off}| in [slab_lo, slab_hi), all other coordinates
        # free.  Candidate tiles come from points along both branches.
        best = None
        for sign in (1.0, -1.0):
            center = np.zeros(lattice.n)
            center[off] = sign * 0.5 * (slab_lo + slab_hi)
            _, z = lattice.wrap(center)
            for dz in _integer_box(-2 * np.ones(lattice.n, dtype=int), 2 * np.ones(lattice.n, dtype=int)):
                g = lattice.dual_point(z + dz)
                vals = corners[:, off] + g[off]
                lo_v, hi_v = float(vals.min()), float(vals.max())
                ok = (slab_lo <= lo_v and hi_v < slab_hi) or (slab_lo <= -hi_v and -lo_v < slab_hi)
                if ok:
                    key = (float(np.linalg.norm(g)), tuple(g))
                    if best is None or key < best[0]:
                        best = (key, g)
        return None if best is None else best[1]
    # spiral region: radial index s(x) in [slab_lo, slab_hi) and flow phase
    # tau(x) in [k, k+1); conservative corner/interval arithmetic
    mu, omega = section.params["mu"], section.params["omega"]
    target_r = math.sqrt(slab_lo * slab_hi) * math.exp(mu * (spiral_k + 0.5))
    angle = omega * (spiral_k + 0.5)
    center = np.zeros(lattice.n)
    center[off] = target_r * math.cos(angle)
    center[off + 1] = target_r * math.sin(angle)
    _, z = lattice.wrap(center)
    for dz in _integer_box(-2 * np.ones(lattice.n, dtype=int), 2 * np.ones(lattice.n, dtype=int)):
        g = lattice.dual_point(z + dz)
        box = corners + g
        if _box_inside_spiral(section, box, off, slab_lo, slab_hi, spiral_k):
            return g
    return None


def _box_inside_spiral(section, box_corners, off, slab_lo, slab_hi, k):
    mu, omega = section.params["mu"], section.params["omega"]
    x = box_corners[:, off]
    y = box_corners[:, off + 1]
    r_lo = _box_min_radius(x, y)
    if r_lo <= 0:
        return False
    r_hi = float(np.max(np.hypot(x, y)))
    # angles measured around the box center (safe once the box subtends
    # less than a half turn as seen from the origin)
    phi_c = math.atan2(float(np.mean(y)), float(np.mean(x)))
    deltas = np.mod(np.arctan2(y, x) - phi_c + math.pi, TWO_PI) - math.pi
    if float(np.max(np.abs(deltas))) >= math.pi / 2:
        return False
    phi_lo = phi_c + float(np.min(deltas))
    phi_hi = phi_c + float(np.max(deltas))
    # interval arithmetic for tau = (phi + 2 pi m)/omega and the radial index
    for m in range(-2, int(omega * (k + 1) / TWO_PI) + 3):
        tau_lo = (phi_lo + TWO_PI * m) / omega
        tau_hi = (phi_hi + TWO_PI * m) / omega
        if tau_hi < k or tau_lo >= k + 1:
            continue
        if not (k <= tau_lo and tau_hi < k + 1):
            return False
        s_lo = r_lo * math.exp(-mu * tau_hi)
        s_hi = r_hi * math.exp(-mu * tau_lo)
        return slab_lo <= s_lo and s_hi < slab_hi
    return False


def _box_min_radius(x, y):
    lox, hix = float(np.min(x)), float(np.max(x))
    loy, hiy = float(np.min(y)), float(np.max(y))
    cx = min(max(0.0, lox), hix)
    cy = min(max(0.0, loy), hiy)
    return math.hypot(cx, cy)


@dataclass(frozen=True)
class ConeSection(RegionSet):
    """The nilpotent cone section, certified to contain dual-domain
    translates (so its translation multiplicity is infinite)."""

    section: object
    certificates: tuple

    def membership(self, points):
        return self.section.membership(points)

    def solve(self, points):
        return self.section.solve(points)

    @property
    def matrix(self):
        return self.section.matrix

    def to_json(self) -> dict:
        return {
            "kind": "cone_section",
            "certificates": [[float(v) for v in g] for g in self.certificates],
        }


def _certify_cone(a, lattice, *, tol, min_translates, search_radius):
    section = build_discrete_section(a, tol=tol)
    if section.case != "real_modulus_one_nilpotent":
        raise NoWavelet(
            "unit-modulus case needs a real nilpotent block in dimension <= 3"
        )
    off = section.block.offset
    corners = lattice.domain_corners()
    found = []
    for _, g in lattice.dual_points_in_order(max_norm=search_radius):
        box = corners + g
        x1 = box[:, off]
        x2 = box[:, off + 1]
        # guaranteed ratio bounds of x2/x1 over the box, per sign branch
        if (x1 > 0).all() and (x2 >= 0).all():
            lo_ratio = float(np.min(x2)) / float(np.max(x1))
            hi_ratio = float(np.max(x2)) / float(np.min(x1))
        elif (x1 < 0).all() and (x2 <= 0).all():
            lo_ratio = float(np.max(x2)) / float(np.min(x1))
            hi_ratio = float(np.min(x2)) / float(np.max(x1))
        else:
            continue
        if 0.0 <= lo_ratio and hi_ratio < 1.0:
            found.append(g)
            if len(found) >= min_translates:
                return ConeSection(section=section, certificates=tuple(tuple(v) for v in found))
    raise SearchExhausted(
        f"only {len(found)} dual translates certified within radius {search_radius}",
        radius=search_radius,
        certificate=found,
    )
