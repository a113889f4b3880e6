"""Command-line surface.

Every command prints a single JSON document (floats rendered with 17
significant digits) carrying a run manifest: the argv, SHA-256 digests
of the input files, seed, tolerance and package version.  Outputs are
byte-identical across reruns of the same manifest.

Exit codes: 0 success / verification PASS; 2 mathematical nonexistence
(no section, no wavelet, determinant one, mixed moduli); 1 usage, I/O
or conditioning errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .classify import classify_continuous, classify_discrete, is_similar_to_unitary
from .errors import (
    DetOne,
    DimensionTooHigh,
    MixedModuli,
    NoSection,
    NoWavelet,
    UsageError,
    XsectError,
)
from .linalg import DEFAULT_TOL, matrix_from_json
from .sections import (
    build_continuous_section,
    build_discrete_section,
    derive_discrete_section,
    section_from_json,
    solve_orbit,
)
from .shaping import to_bounded, to_finite_measure
from .verify import check_continuous_tiling, check_discrete_tiling, jacobian_check, orbit_integral
from .wavelet import (
    BoxUnion,
    Lattice,
    build_order_infinity_set,
    dimension_function,
    is_multiwavelet_set,
    partition_multiwavelet_set,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONEXISTENCE = 2
_NONEXISTENCE = (NoSection, NoWavelet, DetOne, MixedModuli)


def render_json(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    out = []
    _render(obj, out)
    return "".join(out)


def _render(obj, out):
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        out.append(f"{v:.17g}" if math.isfinite(v) else json.dumps(str(v)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _render(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, item in enumerate(seq):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot render {type(obj)!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _manifest(args, inputs) -> dict:
    return {
        "command": list(getattr(args, "_argv", [])),
        "inputs": {path: _digest(path) for path in inputs if path},
        "seed": getattr(args, "seed", None),
        "tol": getattr(args, "tol", DEFAULT_TOL),
        "version": __version__,
    }


def _region_from_json(obj):
    if obj.get("kind") == "boxes":
        return BoxUnion.build([(b["lo"], b["hi"]) for b in obj["boxes"]])
    raise UsageError(f"unsupported region kind {obj.get('kind')!r}")


def _parse_point(text) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"malformed point {text!r}") from exc


def _emit(payload, args, inputs, out_path=None):
    payload = dict(payload)
    payload["manifest"] = _manifest(args, inputs)
    text = render_json(payload)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    sys.stdout.write(text + "\n")


def export_samples(region_like, points, path, parameters=None):
    """CSV rows of (coordinates..., member, parameter) for external plotting."""
    member, exc = region_like.membership(points)
    n = points.shape[1]
    with open(path, "w") as fh:
        header = ",".join([f"x{i + 1}" for i in range(n)] + ["member", "parameter"])
        fh.write(header + "\n")
        for i, pt in enumerate(points):
            coords = ",".join(f"{v:.17g}" for v in pt)
            flag = "" if exc[i] else str(int(member[i]))
            par = ""
            if parameters is not None and not exc[i] and math.isfinite(parameters[i]):
                par = f"{parameters[i]:.17g}"
            fh.write(f"{coords},{flag},{par}\n")


def _grid_points(n, extent, count):
    if n > 3:
        raise DimensionTooHigh("grid export supports n <= 3")
    axes = [np.linspace(-extent, extent, count) for _ in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classify(args):
    obj = _load_json(args.matrix)
    m = matrix_from_json(obj)
    if args.mode == "discrete":
        verdict = classify_discrete(m, tol=args.tol)
        payload = verdict.to_json()
        payload["similar_to_unitary"] = is_similar_to_unitary(m, tol=args.tol)
        payload["jordan_blocks"] = [b.to_json() for b in verdict.jordan.blocks]
    else:
        verdict = classify_continuous(m, tol=args.tol)
        payload = verdict.to_json()
        payload["jordan_blocks"] = [b.to_json() for b in verdict.jordan.blocks]
    _emit(payload, args, [args.matrix])
    return EXIT_OK


def _cmd_build(args):
    path = args.matrix or args.generator
    m = matrix_from_json(_load_json(path))
    if args.mode == "discrete":
        section = build_discrete_section(m, tol=args.tol)
    else:
        section = build_continuous_section(m, tol=args.tol)
    payload = {"section": section.to_json(), "null_set": section.null_set()}
    if args.dump:
        pts = _grid_points(section.n, args.grid_extent, args.grid)
        params, _, exc = section.solve(pts)
        params = np.where(exc, np.nan, params)
        export_samples(section, pts, args.dump, parameters=params)
        payload["dump"] = args.dump
    _emit(payload, args, [path], out_path=args.out)
    return EXIT_OK


def _cmd_solve(args):
    section = section_from_json(_load_json(args.section), tol=args.tol)
    gamma = _parse_point(args.point)
    if gamma.shape[0] != section.n:
        raise UsageError(f"point has {gamma.shape[0]} coordinates, section expects {section.n}")
    sol = solve_orbit(section, gamma)
    _emit(
        {
            "parameter": sol.parameter,
            "representative": [float(v) for v in sol.representative],
        },
        args,
        [args.section],
    )
    return EXIT_OK


def _cmd_shape(args):
    section = section_from_json(_load_json(args.section), tol=args.tol)
    a = matrix_from_json(_load_json(args.matrix)) if args.matrix else None
    shaped = (
        to_finite_measure(section, a, tol=args.tol)
        if args.target == "finite"
        else to_bounded(section, a, tol=args.tol)
    )
    payload = {"shaped": shaped.to_json()}
    if args.target == "finite" and args.samples:
        if args.seed is None:
            raise UsageError("--seed is required for the measure estimate")
        est = shaped.measure_estimate(samples=args.samples, seed=args.seed)
        payload["measure"] = est.to_json()
    _emit(payload, args, [args.section, args.matrix], out_path=args.out)
    return EXIT_OK


def _cmd_verify(args):
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    section = section_from_json(_load_json(args.section), tol=args.tol)
    if args.matrix:
        given = matrix_from_json(_load_json(args.matrix))
        stored = section.jordan.matrix
        if given.shape != stored.shape or not np.allclose(given, stored):
            raise UsageError("--matrix disagrees with the section's matrix")
    if args.mode == "discrete":
        if section.mode != "discrete":
            section = derive_discrete_section(section)
        report = check_discrete_tiling(section, samples=args.samples, seed=args.seed)
    else:
        report = check_continuous_tiling(section, samples=args.samples, seed=args.seed)
    if args.dump:
        rng = np.random.default_rng(args.seed)
        pts = rng.normal(size=(args.samples, section.n))
        params, _, exc = section.solve(pts)
        export_samples(section, pts, args.dump, parameters=np.where(exc, np.nan, params))
    _emit({"report": report.to_json()}, args, [args.section])
    return EXIT_OK if report.passed else EXIT_ERROR


def _cmd_integrate(args):
    section = section_from_json(_load_json(args.section), tol=args.tol)
    if args.field == "gaussian":
        def field(x):
            x = np.asarray(x, dtype=float)
            return math.exp(-float(x @ x) / 2.0) / (2 * math.pi) ** (x.shape[-1] / 2)
    else:
        raise UsageError(f"unknown field {args.field!r}")
    value = orbit_integral(
        field, section, decay_radius=args.radius, epsabs=args.epsabs, epsrel=args.epsrel
    )
    payload = {"integral": value, "field": args.field, "decay_radius": args.radius}
    if args.jacobian_points:
        payload["jacobian_max_rel_dev"] = jacobian_check(section, points=args.jacobian_points, seed=args.seed or 0)
    _emit(payload, args, [args.section])
    return EXIT_OK


def _cmd_wavelet(args):
    lattice = Lattice.from_json(_load_json(args.lattice)) if args.lattice else None
    matrix = matrix_from_json(_load_json(args.matrix)) if args.matrix else None
    inputs = [args.lattice, args.matrix, args.region]
    if args.action in ("check", "partition", "build-inf") and lattice is None:
        raise UsageError(f"wavelet {args.action} requires --lattice")
    if args.action in ("check", "build-inf") and matrix is None:
        raise UsageError(f"wavelet {args.action} requires --matrix")
    if args.action in ("check", "partition", "dimfn") and not args.region:
        raise UsageError(f"wavelet {args.action} requires --region")
    if args.action == "dimfn" and not args.point:
        raise UsageError("wavelet dimfn requires --point")
    if args.action == "check":
        region = _region_from_json(_load_json(args.region))
        order = math.inf if args.order == "inf" else int(args.order)
        report = is_multiwavelet_set(
            region, matrix, lattice, order, samples=args.samples, seed=args.seed
        )
        _emit({"report": report.to_json()}, args, inputs)
        return EXIT_OK if report.passed else EXIT_ERROR
    if args.action == "partition":
        region = _region_from_json(_load_json(args.region))
        order = math.inf if args.order == "inf" else int(args.order)
        parts = partition_multiwavelet_set(region, lattice, order, pieces=args.pieces)
        payload = {"pieces": [p.to_json() for p in parts], "verification": None}
        if args.seed is not None:
            rng = np.random.default_rng(args.seed)
            xis = rng.normal(size=(args.samples, lattice.n))
            from .wavelet import translation_counts

            counts = {i: translation_counts(p, lattice, xis) for i, p in enumerate(parts)}
            payload["verification"] = {
                "samples": args.samples,
                "seed": args.seed,
                "pieces_count_one": all((c == 1).all() for c in counts.values()),
                "histograms": {
                    str(i): {str(v): int(n) for v, n in zip(*np.unique(c, return_counts=True))}
                    for i, c in counts.items()
                },
            }
        _emit(payload, args, inputs)
        return EXIT_OK
    if args.action == "dimfn":
        region = _region_from_json(_load_json(args.region))
        xi = _parse_point(args.point)
        count = dimension_function(region, xi)
        _emit({"dimension": count.value, "truncated": count.truncated}, args, inputs)
        return EXIT_OK
    if args.action == "build-inf":
        k = build_order_infinity_set(matrix, lattice, pieces=args.pieces, tol=args.tol)
        _emit({"region": k.to_json()}, args, inputs)
        return EXIT_OK
    raise UsageError(f"unknown wavelet action {args.action!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="xsect", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required=False):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--seed", type=int, required=seed_required,
                       help="seed for stochastic subcommands (mandatory, never wall-clock)")

    p = sub.add_parser("classify", help="decide cross-section existence")
    p.add_argument("--mode", choices=["discrete", "continuous"], required=True)
    p.add_argument("--matrix", required=True)
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("build", help="construct an explicit cross-section")
    p.add_argument("--mode", choices=["discrete", "continuous"], required=True)
    p.add_argument("--matrix")
    p.add_argument("--generator")
    p.add_argument("--out")
    p.add_argument("--dump", help="CSV grid export of the section (n <= 3)")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--grid-extent", type=float, default=4.0)
    common(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("solve", help="solve the orbit parameter of a point")
    p.add_argument("--section", required=True)
    p.add_argument("--point", required=True)
    common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("shape", help="reshape to finite measure or bounded")
    p.add_argument("--section", required=True)
    p.add_argument("--matrix")
    p.add_argument("--target", choices=["finite", "bounded"], required=True)
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo measure estimate budget")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=_cmd_shape)

    p = sub.add_parser("verify", help="seeded tiling verification")
    p.add_argument("--section", required=True)
    p.add_argument("--matrix", help="optional cross-check against the section's matrix")
    p.add_argument("--mode", choices=["discrete", "continuous"], required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--dump", help="CSV dump of the samples")
    common(p, seed_required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("integrate", help="orbit integral via the flow coordinates")
    p.add_argument("--section", required=True)
    p.add_argument("--field", default="gaussian")
    p.add_argument("--radius", type=float, default=8.0)
    p.add_argument("--epsabs", type=float, default=1e-6)
    p.add_argument("--epsrel", type=float, default=1e-6)
    p.add_argument("--jacobian-points", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("wavelet", help="multi-wavelet set operations")
    p.add_argument("action", choices=["check", "partition", "dimfn", "build-inf"])
    p.add_argument("--matrix")
    p.add_argument("--lattice")
    p.add_argument("--region")
    p.add_argument("--order", default="1")
    p.add_argument("--pieces", type=int, default=8)
    p.add_argument("--point")
    p.add_argument("--samples", type=int, default=1000)
    common(p)
    p.set_defaults(func=_cmd_wavelet)
    return parser


def main(argv=None) -> int:
    os.environ.get("XSECT_THREADS")  # accepted as a hint; results never depend on it
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = list(argv) if argv is not None else list(sys.argv[1:])
        return args.func(args)
    except _NONEXISTENCE as exc:
        sys.stdout.write(render_json({"error": str(exc), "code": exc.code}) + "\n")
        return EXIT_NONEXISTENCE
    except XsectError as exc:
        sys.stdout.write(render_json({"error": str(exc), "code": exc.code}) + "\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stdout.write(render_json({"error": str(exc), "code": "io"}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
