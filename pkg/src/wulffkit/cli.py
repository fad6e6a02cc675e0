"""Command-line interface.

Subcommands: validate, stability, stabilize, caustic, symset,
wavefront, report.  Reports are deterministic JSON on stdout (same
input, flags, and seed give byte-identical output); geometry dumps go
to files as CSV or SVG chosen by the output extension.

Exit codes: 0 success / positive verdict, 1 usage error, 2 negative
verdict, 3 indeterminate (or stabilization failure), 4 I/O or parse
error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .caustic_symmetry import caustic, sym_via_fronts, symmetry_set, wave_front
from .convexity import NotPositiveError, is_convex_integrand
from .jsonio import canonical_dumps, load_function, sampled_to_json
from .perturbation import PerturbationError, StabilizeError, stabilize
from .sphere_fn import IncompleteCensusError
from .stability import MorseVector, is_stable, morse_inequalities

USAGE_EXIT = 1
IO_EXIT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_EXIT)


def _envelope(subcommand: str, config: dict, payload: dict) -> dict:
    return {
        "tool": "wulffkit",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        **payload,
    }


def _emit(doc: dict, out: str | None = None) -> None:
    text = canonical_dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        sys.stdout.write(text + "\n")


def _load(path: str):
    try:
        return load_function(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"wulffkit: cannot load {path}: {exc}\n")
        sys.exit(IO_EXIT)


def _source_column(sources: np.ndarray) -> np.ndarray:
    if sources.shape[1] == 2:
        return np.mod(np.arctan2(sources[:, 1], sources[:, 0]), 2.0 * np.pi)
    return np.arange(sources.shape[0], dtype=float)


def _write_csv(path: str, points: np.ndarray, sources: np.ndarray, flags) -> None:
    dim = points.shape[1]
    cols = ["x", "y"] + (["z"] if dim == 3 else []) + ["source_theta", "flags"]
    src = _source_column(sources) if sources is not None else np.zeros(len(points))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(points.shape[0]):
            row = [f"{points[k, j]:.17g}" for j in range(dim)]
            row.append(f"{src[k]:.17g}")
            row.append(str(flags[k]) if flags is not None else "")
            fh.write(",".join(row) + "\n")


def _write_svg(path: str, objects: list[np.ndarray], closed: bool = True) -> None:
    """One closed path per object; viewBox is the data box plus a 1-unit margin."""
    allpts = np.concatenate([o for o in objects if len(o)]) if objects else np.zeros((1, 2))
    x0, y0 = allpts.min(axis=0) - 1.0
    x1, y1 = allpts.max(axis=0) + 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6g} {y0:.6g} '
        f'{x1 - x0:.6g} {y1 - y0:.6g}">'
    ]
    for obj in objects:
        if len(obj) == 0:
            continue
        if len(obj) == 1 or not closed:
            # point cloud: one path of small closed square subpaths
            side = 0.01 * max(x1 - x0, y1 - y0)
            bits = []
            for p in obj:
                bits.append(
                    f"M {p[0]:.9g} {p[1]:.9g} h {side:.3g} v {side:.3g} h {-side:.3g} Z"
                )
            d = " ".join(bits)
        else:
            d = "M " + " L ".join(f"{p[0]:.9g} {p[1]:.9g}" for p in obj) + " Z"
        parts.append(f'<path d="{d}" fill="none" stroke="black" stroke-width="0.01"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _dump_geometry(out: str, points, sources, flags, objects) -> None:
    if out.endswith(".svg"):
        _write_svg(out, objects)
    elif out.endswith(".csv"):
        _write_csv(out, points, sources, flags)
    else:
        sys.stderr.write("wulffkit: --out must end in .csv or .svg\n")
        sys.exit(USAGE_EXIT)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    gamma = _load(args.function)
    try:
        rep = is_convex_integrand(gamma, tol=args.tol, samples=args.samples)
    except NotPositiveError as exc:
        _emit(
            _envelope(
                "validate",
                {"input": args.function, "samples": args.samples, "tol": args.tol},
                {"verdict": "no", "error": str(exc), "min_value": exc.value},
            )
        )
        return 2
    _emit(
        _envelope(
            "validate",
            {"input": args.function, "samples": args.samples, "tol": args.tol},
            {
                "verdict": rep.verdict,
                "max_residual": rep.max_residual,
                "min_curvature_numerator": rep.min_curvature_numerator,
                "min_value": rep.min_value,
            },
        )
    )
    return rep.exit_code


def cmd_stability(args) -> int:
    gamma = _load(args.function)
    verdict = is_stable(gamma)
    census = [
        {
            "theta": p.theta.tolist(),
            "value": p.value,
            "index": p.index,
            "margins": {
                "nd_margin": p.nd_margin,
                "hess_scale": p.hess_scale,
                "residual": p.residual,
            },
        }
        for p in verdict.census
    ]
    morse = None
    if verdict.census and all(p.index is not None for p in verdict.census):
        mv = MorseVector.from_census(verdict.census, gamma.dimension)
        rep = morse_inequalities(mv)
        morse = {
            "C": list(mv.counts),
            "inequalities": [[lam, bool(ok)] for lam, ok in rep.inequalities],
            "euler_equality": rep.euler_equality,
        }
    _emit(
        _envelope(
            "stability",
            {"input": args.function},
            {
                "status": verdict.status,
                "diagnosis": verdict.diagnosis,
                "census": census,
                "morse": morse,
            },
        )
    )
    return verdict.exit_code


def cmd_stabilize(args) -> int:
    gamma = _load(args.function)
    config = {
        "input": args.function,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "max_tries": args.max_tries,
        "grid": args.grid,
    }
    try:
        res = stabilize(
            gamma, args.epsilon, seed=args.seed, max_tries=args.max_tries, grid=args.grid
        )
    except (StabilizeError, PerturbationError, NotPositiveError) as exc:
        _emit(_envelope("stabilize", config, {"error": str(exc), "verdict": "failed"}))
        return 3
    samples_doc = sampled_to_json(res.integrand)
    payload = {
        "v": res.v.tolist(),
        "tries": res.tries,
        "verdict": res.verdict.status,
        "sup_distance": res.sup_distance,
        "critical_points": len(res.verdict.census),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps(samples_doc) + "\n")
        payload["samples_file"] = args.out
    else:
        payload["samples"] = samples_doc
    _emit(_envelope("stabilize", config, payload))
    return 0


def cmd_caustic(args) -> int:
    gamma = _load(args.function)
    cs = caustic(gamma, grid=args.samples)
    order = np.argsort(_source_column(cs.sources), kind="stable")
    objects = []
    for sheet in np.unique(cs.sheet):
        mask = cs.sheet[order] == sheet
        objects.append(cs.points[order][mask])
    flags = np.where(cs.det_residuals[order] <= 1e-6, "", "uncertified")
    _dump_geometry(args.out, cs.points[order], cs.sources[order], flags, objects)
    _emit(
        _envelope(
            "caustic",
            {"input": args.function, "samples": args.samples, "out": args.out},
            {
                "points": int(cs.points.shape[0]),
                "skipped_flat": cs.skipped,
                "max_det_residual": float(cs.det_residuals.max()),
                "max_grad_residual": float(cs.grad_residuals.max()),
            },
        )
    )
    return 0


def cmd_symset(args) -> int:
    gamma = _load(args.function)
    ss = symmetry_set(gamma, grid=args.samples)
    sources = (
        np.array([p.theta1 for p in ss.pairs]) if ss.pairs else np.zeros((len(ss.points), 2))
    )
    flags = ["rotationally_degenerate" if ss.rotationally_degenerate else "" for _ in ss.points]
    _dump_geometry(args.out, ss.points, sources, flags, [ss.points])
    _emit(
        _envelope(
            "symset",
            {"input": args.function, "samples": args.samples, "out": args.out},
            {
                "points": int(ss.points.shape[0]),
                "pairs": len(ss.pairs),
                "rotationally_degenerate": ss.rotationally_degenerate,
            },
        )
    )
    return 0


def _parse_t_range(text: str) -> tuple[float, float, float]:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("t-range must be A:B:STEP")
    if step <= 0:
        raise argparse.ArgumentTypeError("t-range step must be positive")
    return a, b, step


def cmd_wavefront(args) -> int:
    gamma = _load(args.function)
    if args.t is None and args.t_range is None:
        sys.stderr.write("wulffkit wavefront: provide --t or --t-range\n")
        return USAGE_EXIT
    ts = [args.t] if args.t is not None else list(
        np.arange(args.t_range[0], args.t_range[1] + 0.5 * args.t_range[2], args.t_range[2])
    )
    fronts = [wave_front(gamma, t, grid=args.samples) for t in ts]
    points = np.concatenate([f.points for f in fronts])
    sources = np.concatenate([f.sources for f in fronts])
    flags = np.concatenate(
        [np.where(f.singular, "singular", "") for f in fronts]
    )
    _dump_geometry(args.out, points, sources, flags, [f.points for f in fronts])
    _emit(
        _envelope(
            "wavefront",
            {
                "input": args.function,
                "samples": args.samples,
                "t": args.t,
                "t_range": list(args.t_range) if args.t_range else None,
                "out": args.out,
            },
            {
                "fronts": len(fronts),
                "points": int(points.shape[0]),
                "singular_samples": int(sum(int(f.singular.sum()) for f in fronts)),
            },
        )
    )
    return 0


def cmd_report(args) -> int:
    if not args.inputs:
        sys.stderr.write("wulffkit report: empty bundle\n")
        return IO_EXIT
    docs = []
    for path in args.inputs:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"wulffkit report: cannot read {path}: {exc}\n")
            return IO_EXIT
        if not isinstance(doc, dict) or doc.get("tool") != "wulffkit" or "subcommand" not in doc:
            sys.stderr.write(f"wulffkit report: {path} is not a wulffkit report\n")
            return IO_EXIT
        docs.append(doc)
    merged: dict = {}
    for doc in docs:
        sub = doc["subcommand"]
        if sub == "validate":
            merged["convex"] = doc.get("verdict")
        elif sub == "stability":
            merged["stable"] = doc.get("status") == "stable"
        elif sub == "stabilize":
            merged["stable"] = doc.get("verdict") == "stable"
            merged["v"] = doc.get("v")
            merged["sup_distance"] = doc.get("sup_distance")
        elif sub in ("caustic", "symset", "wavefront"):
            merged.setdefault("geometry", {})[sub] = {
                k: doc[k] for k in ("points",) if k in doc
            }
    _emit(_envelope("report", {"inputs": list(args.inputs)}, merged))
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="wulffkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wulffkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("function", help="function file (JSON)")
        p.add_argument("--samples", type=int, default=None, help="sample grid size")

    p = sub.add_parser("validate", help="convex-integrand test")
    common(p)
    p.add_argument("--tol", type=float, default=1e-7, help="relative hull tolerance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stability", help="stability verdict and Morse census")
    p.add_argument("function")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("stabilize", help="perturb to a stable integrand")
    p.add_argument("function")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-tries", type=int, default=20)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--out", default=None, help="write the sampled integrand here")
    p.set_defaults(func=cmd_stabilize)

    p = sub.add_parser("caustic", help="focal set of the inverted graph")
    common(p)
    p.add_argument("--out", required=True, help="output .csv or .svg")
    p.set_defaults(func=cmd_caustic)

    p = sub.add_parser("symset", help="symmetry set of the inverted graph")
    common(p)
    p.add_argument("--out", required=True, help="output .csv or .svg")
    p.set_defaults(func=cmd_symset)

    p = sub.add_parser("wavefront", help="inward normal offsets")
    common(p)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--t-range", type=_parse_t_range, default=None, metavar="A:B:STEP")
    p.add_argument("--out", required=True, help="output .csv or .svg")
    p.set_defaults(func=cmd_wavefront)

    p = sub.add_parser("report", help="merge prior reports")
    p.add_argument("inputs", nargs="*")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompleteCensusError as exc:
        sys.stderr.write(f"wulffkit: {exc}\n")
        return 3
    except NotPositiveError as exc:
        sys.stderr.write(f"wulffkit: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"wulffkit: {exc}\n")
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())
