"""Seeded numerical verification of tiling identities and orbit integration.

The discrete check counts, for Gaussian-sampled points, how many powers
``xi A^k`` land in the candidate set; a cross-section gives multiplicity
exactly 1.  The continuous check exploits that sweeping a continuous
section over unit time yields a discrete cross-section: the time set
``{t : xi A^t in T}`` is an interval of length exactly 1, whose endpoints
come from the closed-form solve and are cross-checked by bisection
refinement of the membership indicator.

Orbit integration evaluates ``integral of f over R^n`` in the section's
flow coordinates, with the closed-form Jacobian weight of the
parametrization (``-s delta^t`` and ``-beta p delta^t`` for the two
nilpotent cases; the analogous weights ``alpha delta^t`` and
``-s beta delta^t`` for the scaling cases are validated against central
finite differences by :func:`jacobian_check`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import BudgetExceeded, QuadratureDivergence
from .linalg import integer_power, one_parameter_power, one_parameter_power_batch
from .sections import CrossSection, derive_discrete_section

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TilingReport:
    kind: str
    samples: int
    seed: int
    passed: bool
    histogram: dict
    failures: list = field(default_factory=list)
    scan: dict = field(default_factory=dict)
    skipped_null: int = 0
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "histogram": {str(k): int(v) for k, v in sorted(self.histogram.items())},
            "failures": self.failures[:20],
            "scan": self.scan,
            "skipped_null": self.skipped_null,
            "extras": self.extras,
        }


def _gaussian_samples(rng, count, dim):
    return rng.normal(size=(count, dim))


def check_discrete_tiling(region, a=None, *, samples=10_000, seed=0, k_range=None) -> TilingReport:
    """Count orbit hits ``#{k : xi A^k in region}`` over Gaussian samples.

    ``region`` needs a vectorized ``membership`` method; cross-sections
    and reshaped sections also provide ``solve``, whose predicted tile
    indices extend the scan: every sample is scanned over the base
    window plus, for heavy-tailed predictions outside it, a 60-wide
    window around its own predicted index.  Failures (multiplicity !=
    1) are reported in-band, never raised.
    """
    if a is None:
        a = region.matrix
    a = np.asarray(a, dtype=float)
    dim = a.shape[0]
    rng = np.random.default_rng(seed)
    pts = _gaussian_samples(rng, samples, dim)

    k_lo, k_hi = k_range if k_range is not None else (-60, 60)
    skipped = 0
    predictions = None
    if hasattr(region, "solve"):
        ks, _, exc = region.solve(pts)
        if exc.any():
            skipped = int(exc.sum())
            pts, ks = pts[~exc], ks[~exc]
        predictions = ks.astype(int)

    counts = np.zeros(len(pts), dtype=int)
    shifted = pts @ integer_power(a, k_lo)
    for k in range(k_lo, k_hi + 1):
        member, exc = region.membership(shifted)
        counts += (member & ~exc).astype(int)
        if k < k_hi:
            shifted = shifted @ a
    outliers = 0
    if predictions is not None:
        # the scan counts hits of xi A^k; the solver's tile index kp means a
        # hit at k = -kp, so heavy-tailed samples get a window around -kp
        for i in np.flatnonzero((-predictions < k_lo + 2) | (-predictions > k_hi - 2)):
            outliers += 1
            kc = -int(predictions[i])
            extra = [k for k in range(kc - 60, kc + 61) if not k_lo <= k <= k_hi]
            points_k = np.vstack([pts[i] @ integer_power(a, k) for k in extra])
            member, exc = region.membership(points_k)
            counts[i] += int(np.count_nonzero(member & ~exc))
    histogram = {int(c): int(np.count_nonzero(counts == c)) for c in np.unique(counts)}
    bad = np.flatnonzero(counts != 1)
    failures = [
        {"point": [float(x) for x in pts[i]], "count": int(counts[i])} for i in bad[:20]
    ]
    return TilingReport(
        kind="discrete_tiling",
        samples=samples,
        seed=seed,
        passed=bool(len(bad) == 0),
        histogram=histogram,
        failures=failures,
        scan={"k_lo": int(k_lo), "k_hi": int(k_hi), "outlier_windows": int(outliers)},
        skipped_null=skipped,
    )


def _batch_flow(section, points, ts):
    powers = one_parameter_power_batch(section.jordan, ts)
    return np.einsum("sj,sjk->sk", points, powers)


def _bisect(derived, points, t_false, t_true, iters=46):
    """Bisect between a non-member time and a member time, per sample."""
    a = t_false.copy()
    b = t_true.copy()
    for _ in range(iters):
        mid = 0.5 * (a + b)
        member, _ = derived.membership(_batch_flow(derived, points, mid))
        a = np.where(member, a, mid)
        b = np.where(member, mid, b)
    return 0.5 * (a + b)


def check_continuous_tiling(section: CrossSection, *, samples=10_000, seed=0,
                            window=5.0, grid_step=1e-3, grid_subsample=200,
                            quad_tol=1e-6) -> TilingReport:
    """Verify the unit-time sweep identity and uniqueness of flow times.

    For each Gaussian sample the set ``{t : xi A^t in T}`` (``T`` the
    swept discrete section) is the interval ``[t_c, t_c + 1)`` with
    ``t_c`` the closed-form flow time.  Both endpoints are re-found by
    bisection of the membership indicator and the refined length must be
    1 within ``quad_tol``, else :class:`QuadratureDivergence` is raised.
    Uniqueness of the section hit is checked on every sample through the
    case's branch candidates inside the window, and by a dense
    membership grid on a subsample.
    """
    if section.mode != "continuous":
        raise ValueError("check_continuous_tiling expects a continuous section")
    derived = derive_discrete_section(section)
    rng = np.random.default_rng(seed)
    pts = _gaussian_samples(rng, samples, section.n)
    ts, _, exc = section.solve(pts)
    skipped = int(exc.sum())
    pts, ts = pts[~exc], ts[~exc]

    # flowing by t leaves remaining flow time t_c - t, so the swept-set hit
    # interval is [t_c, t_c + 1): closed left edge, open right edge
    left = ts
    right = ts + 1.0
    eps = 1e-3
    # bisection brackets around each edge
    left_found = _bisect(derived, pts, left - eps, left + eps)
    right_found = _bisect(derived, pts, right + eps, right - eps)
    lengths = right_found - left_found
    length_dev = float(np.max(np.abs(lengths - 1.0))) if len(lengths) else 0.0
    edge_dev = float(max(np.max(np.abs(left_found - left)), np.max(np.abs(right_found - right)))) if len(pts) else 0.0
    if length_dev > quad_tol:
        raise QuadratureDivergence(
            f"refined sweep length deviates from 1 by {length_dev:.3e} (> {quad_tol})"
        )

    # uniqueness: branch candidates within the window
    counts = _branch_candidate_counts(section, pts, ts, window)
    histogram = {int(c): int(np.count_nonzero(counts == c)) for c in np.unique(counts)}
    bad = np.flatnonzero(counts != 1)
    failures = [
        {"point": [float(x) for x in pts[i]], "count": int(counts[i])} for i in bad[:20]
    ]

    # dense grid on a subsample: the swept membership must form one run
    runs_bad = 0
    sub = pts[: min(grid_subsample, len(pts))]
    sub_t = ts[: len(sub)]
    grid = np.arange(-window, window + grid_step / 2, grid_step)
    for i in range(len(sub)):
        times = sub_t[i] + grid
        member, _ = derived.membership(_batch_flow(derived, np.repeat(sub[i : i + 1], len(times), axis=0), times))
        transitions = int(np.count_nonzero(np.diff(member.astype(int)) != 0))
        if transitions > 2 or not member.any():
            runs_bad += 1
    passed = bool(len(bad) == 0 and runs_bad == 0)
    return TilingReport(
        kind="continuous_tiling",
        samples=samples,
        seed=seed,
        passed=passed,
        histogram=histogram,
        failures=failures,
        scan={"window": window, "grid_step": grid_step, "grid_subsample": len(sub)},
        skipped_null=skipped,
        extras={
            "max_length_deviation": length_dev,
            "max_edge_deviation": edge_dev,
            "grid_runs_bad": runs_bad,
        },
    )


def _branch_candidate_counts(section, pts, ts, window):
    """Count window times carrying each sample into the section.

    Rotation-free cases have a single candidate (the hit function is
    strictly monotone in t); rotating cases admit one candidate per
    angular period and the radial interval must select exactly one."""
    if section.case in ("real_nonzero", "zero_nilpotent"):
        offsets = np.array([0.0])
    else:
        beta = section.params["beta"]
        period = TWO_PI / beta
        m_max = int(math.floor(window / period))
        offsets = np.arange(-m_max, m_max + 1) * period
    counts = np.zeros(len(pts), dtype=int)
    for off in offsets:
        member, _ = section.membership(_batch_flow(section, pts, ts + off))
        counts += member.astype(int)
    return counts


# ---------------------------------------------------------------------------
# orbit integration (change of variables along the flow)


def orbit_integral(f, section: CrossSection, *, decay_radius, budget=10**7,
                   epsabs=1e-8, epsrel=1e-6) -> float:
    """Integrate ``f`` over R^n in the section's flow coordinates.

    ``f`` maps an ambient row vector to a scalar and must be negligible
    outside the ball of radius ``decay_radius``; the parameter domains
    are truncated accordingly.  Raises :class:`BudgetExceeded` when the
    evaluation budget runs out.
    """
    if section.mode != "continuous":
        raise ValueError("orbit_integral expects a continuous section")
    b = section.matrix
    trace = float(np.trace(b))
    form = section.jordan
    off = section.block.offset
    n = section.n
    R = float(decay_radius)
    conj_det = abs(float(np.linalg.det(form.conjugator)))

    evals = [0]
    flow_cache = {}

    def flow(tvar):
        if tvar not in flow_cache:
            if len(flow_cache) > 65536:
                flow_cache.clear()
            flow_cache[tvar] = one_parameter_power(form, tvar)
        return flow_cache[tvar]

    def point(tvar, coords):
        c = np.zeros(n)
        for d, v in coords.items():
            c[d] = v
        return form.from_jordan(c) @ flow(tvar)

    def guard():
        evals[0] += 1
        if evals[0] > budget:
            raise _Budget()

    q_norm = float(np.linalg.norm(form.conjugator_inverse, 2))

    def coord_bound(d, tvar):
        # preimage of the decay ball: |c_d| <= R * ||column d of exp(-tB) Q||
        col = np.linalg.norm((flow(-tvar) @ form.conjugator_inverse)[:, d])
        return R * col + 1.0

    if section.case == "real_nonzero":
        alpha = section.params["alpha"]
        others = [d for d in range(n) if d != off]

        def integrand(*args):
            guard()
            a, tvar = args[:-1], args[-1]
            total = 0.0
            for eps_sign in (1.0, -1.0):
                coords = {off: eps_sign}
                coords.update({d: v for d, v in zip(others, a)})
                total += f(point(tvar, coords))
            return total * abs(alpha) * math.exp(trace * tvar) * conj_det

        t_bounds = sorted((math.log(1e-5) / alpha, math.log(1.5 * R * q_norm) / alpha))
        ranges = [
            (lambda d: (lambda *args: (-coord_bound(d, args[-1]), coord_bound(d, args[-1]))))(d)
            for d in others
        ] + [tuple(t_bounds)]
    elif section.case == "complex_nonzero":
        alpha, beta = section.params["alpha"], section.params["beta"]
        lam_big = math.exp(section.params["log_span"])
        others = [d for d in range(n) if d not in (off, off + 1)]

        def integrand(*args):
            guard()
            a, svar, tvar = args[:-2], args[-2], args[-1]
            coords = {off: svar, off + 1: 0.0}
            coords.update({d: v for d, v in zip(others, a)})
            return f(point(tvar, coords)) * svar * beta * math.exp(trace * tvar) * conj_det

        t_bounds = sorted((math.log(1e-5) / alpha, math.log(1.5 * R * q_norm) / alpha))
        ranges = [
            (lambda d: (lambda *args: (-coord_bound(d, args[-1]), coord_bound(d, args[-1]))))(d)
            for d in others
        ] + [(1.0, lam_big), tuple(t_bounds)]
    elif section.case == "zero_nilpotent":
        # pure 2x2 block (trace 0, so delta^t = 1); substituting u = t*s
        # fixes the inner domain and cancels the |s| weight exactly
        if n != 2:
            raise ValueError("orbit_integral supports the shear case for the pure 2x2 block")

        def integrand(uvar, svar):
            guard()
            if svar == 0.0:
                # continuous limit of the substituted parametrization:
                # (s, 0) A^{u/s} = (s, u) -> (0, u)
                c = np.zeros(n)
                c[off + 1] = uvar
                return f(form.from_jordan(c)) * conj_det
            tvar = uvar / svar
            return f(point(tvar, {off: svar, off + 1: 0.0})) * conj_det

        u_cap = 1.5 * R + 1.0
        ranges = [(-u_cap, u_cap), (-1.5 * R, 1.5 * R)]
    elif section.case == "imaginary_nilpotent":
        beta = section.params["beta"]
        # pure 4x4 block (trace 0); substituting u = t*p fixes the inner
        # domain and reduces the weight to the constant beta
        if n != 4:
            raise ValueError("orbit_integral supports the rotating shear case for the pure 4x4 block")
        conj = form.conjugator
        canonical = np.allclose(conj, np.eye(4), atol=1e-12)

        def integrand(uvar, qvar, svar, pvar):
            guard()
            theta = beta * uvar / pvar
            c, sn = math.cos(theta), math.sin(theta)
            w = uvar + qvar
            x = (pvar * c, pvar * sn, w * c - svar * sn, w * sn + svar * c)
            if not canonical:
                x = np.asarray(x) @ conj
            return f(np.asarray(x)) * beta * conj_det

        def q_range(svar, pvar):
            return (0.0, TWO_PI * pvar / beta)

        def u_range(qvar, svar, pvar):
            # support of f: (u+q)^2 + s^2 + p^2 <= (decay radius)^2
            slack = (1.2 * R) ** 2 - svar**2 - pvar**2
            if slack <= 0.0:
                return (0.0, 0.0)
            w = math.sqrt(slack) + 0.5
            return (-qvar - w, -qvar + w)

        ranges = [u_range, q_range, (-1.5 * R, 1.5 * R), (1e-12, 1.5 * R)]
    else:
        raise ValueError(f"unsupported case {section.case!r}")

    try:
        value, _ = integrate.nquad(
            integrand, ranges, opts={"epsabs": epsabs, "epsrel": epsrel, "limit": 80}
        )
    except _Budget:
        raise BudgetExceeded(
            f"orbit integral exceeded the evaluation budget ({budget})",
            evaluations=evals[0],
        ) from None
    return float(value)


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# Jacobian validation


def jacobian_check(section: CrossSection, *, points=100, seed=0, step=1e-5) -> float:
    """Max relative deviation between the closed-form Jacobian of the flow
    parametrization and a central finite-difference determinant.

    Evaluated in Jordan coordinates, where the closed forms are
    ``alpha * delta^t`` (scaling), ``-s beta delta^t`` (rotating),
    ``-s delta^t`` (shear) and ``-beta p delta^t`` (rotating shear).
    """
    if section.mode != "continuous":
        raise ValueError("jacobian_check expects a continuous section")
    rng = np.random.default_rng(seed)
    form = section.jordan
    n = section.n
    off = section.block.offset
    trace = float(np.trace(section.matrix))
    jordan_flow = lambda c, t: form.to_jordan(form.from_jordan(c) @ one_parameter_power(form, t))

    def params_to_point(p):
        tvar = p[0]
        c = np.zeros(n)
        if section.case == "real_nonzero":
            c[off] = 1.0
            rest = [d for d in range(n) if d != off]
            c[rest] = p[1:]
        elif section.case in ("complex_nonzero", "zero_nilpotent"):
            c[off] = p[1]
            rest = [d for d in range(n) if d not in (off, off + 1)]
            c[rest] = p[2:]
        else:
            c[off], c[off + 2], c[off + 3] = p[1], p[2], p[3]
            rest = [d for d in range(n) if d not in (off, off + 1, off + 2, off + 3)]
            c[rest] = p[4:]
        return jordan_flow(c, tvar)

    def closed_form(p):
        tvar = p[0]
        delta_t = math.exp(trace * tvar)
        if section.case == "real_nonzero":
            return section.params["alpha"] * delta_t
        if section.case == "complex_nonzero":
            return -p[1] * section.params["beta"] * delta_t
        if section.case == "zero_nilpotent":
            return -p[1] * delta_t
        return -section.params["beta"] * p[1] * delta_t

    # every case parametrizes R^n with exactly n parameters:
    # (t, free...) / (t, s, free...) / (t, p, q, s, free...)
    worst = 0.0
    for _ in range(points):
        p = rng.uniform(-2.0, 2.0, n)
        if section.case == "complex_nonzero":
            p[1] = rng.uniform(1.0, math.exp(section.params["log_span"]))
        elif section.case == "zero_nilpotent":
            p[1] = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        elif section.case == "imaginary_nilpotent":
            p[1] = rng.uniform(0.5, 2.0)
            p[2] = rng.uniform(0.0, TWO_PI * p[1] / section.params["beta"])
        jac = np.empty((n, n))
        for i in range(n):
            up, dn = p.copy(), p.copy()
            up[i] += step
            dn[i] -= step
            jac[i] = (params_to_point(up) - params_to_point(dn)) / (2 * step)
        fd = float(np.linalg.det(jac))
        cf = closed_form(p)
        worst = max(worst, abs(fd - cf) / max(abs(cf), 1e-300))
    return worst
