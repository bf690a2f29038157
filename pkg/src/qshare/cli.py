"""Command-line front end.

Exit codes: 0 success or all checks passed, 1 a verified property was
violated, 2 usage or input error.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import __version__, geometry
from .errors import QShareError
from .formats import csv_text, json_text, load_state_file, table_text, write_atomic
from .monotones import (
    bounds_report,
    concurrence_table,
    entanglement_profile,
    qudit_y_monotone,
    schmidt_coefficients,
    y_vectors_batch,
)
from .states import StateSpec, haar_batch
from .verify import (
    FIG1_COLUMNS,
    FIG4_COLUMNS,
    SUITES,
    SuiteConfig,
    figure1_dataset,
    figure4_dataset,
    polytope_mesh_export,
    run_qudit_speculation,
    substream,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(QShareError):
    pass


def _counts(text):
    """Parse ``"3"``, ``"2-8"`` or ``"2,3,5"`` into a tuple of party counts."""
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad party-count list {text!r}") from None


def _y_vector(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad Y vector {text!r}") from None


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, help="master seed (default: fresh, echoed in output)")
    g.add_argument("--samples", type=int, help="Monte Carlo / sample budget")
    g.add_argument("--tolerance", type=float, help="violation tolerance override")
    g.add_argument("-o", "--output", help="write machine-readable output to this file")
    g.add_argument("--format", choices=("table", "csv", "structured"), help="output format")
    g.add_argument("--threads", type=int, help="worker threads (overrides QSHARE_THREADS)")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="qshare", description=(
        "One-vs-rest entanglement monotones, sharing-inequality checks and "
        "entanglement-polytope geometry for N-party pure states."))
    parser.add_argument("--version", action="version", version=f"qshare {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="profile one state")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state-file", help="JSON state document")
    src.add_argument("--family", choices=("ghz", "w", "bell", "product", "haar"))
    p.add_argument("--theta", type=float)
    p.add_argument("--alpha", type=complex)
    p.add_argument("--beta", type=complex)
    p.add_argument("--gamma", type=complex)
    p.add_argument("--bits", help="levels of a product state, e.g. 010")
    p.add_argument("--n", type=int, help="party count (ghz, haar)")
    p.add_argument("--m", type=int, default=2, help="local dimension (product, haar)")

    p = sub.add_parser("sample", parents=[common], help="Y vectors of Haar-random states")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=100)

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("suite", choices=tuple(SUITES) + ("qudit", "all"))
    p.add_argument("--n", type=_counts, help="party counts: 3, 2-8 or 2,3,5")
    p.add_argument("--m", type=int, default=3, help="local dimension for the qudit suite")
    p.add_argument("--inject", type=_y_vector, action="append", default=[],
                   help="extra Y vector pushed through the margin evaluator")

    p = sub.add_parser("geometry", parents=[common], help="polytope volumes, slices, mesh")
    p.add_argument("action", choices=("volume", "slice", "mesh"))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--yt", type=float)

    p = sub.add_parser("figures", parents=[common], help="figure reproduction datasets")
    p.add_argument("which", choices=("fig1", "fig4"))
    p.add_argument("--grid", type=int, default=61)
    return parser


def _seed(args):
    return args.seed if args.seed is not None else int(np.random.SeedSequence().entropy)


def _emit(args, text, default_to_stdout=True):
    if args.output:
        write_atomic(args.output, text)
    elif default_to_stdout:
        sys.stdout.write(text)


def _manifest(**fields):
    return " ".join([f"qshare {__version__}"] + [f"{k}={v}" for k, v in fields.items()])


# -- analyze ------------------------------------------------------------------

def _state_from_args(args):
    if args.state_file:
        return load_state_file(args.state_file)
    fam = args.family
    if fam == "ghz":
        if args.theta is None:
            raise UsageError("--theta is required for the ghz family")
        params = {"theta": args.theta, "n_parties": args.n or 3}
    elif fam == "w":
        missing = [n for n in ("alpha", "beta", "gamma") if getattr(args, n) is None]
        if missing:
            raise UsageError(f"--{missing[0]} is required for the w family")
        params = {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma}
    elif fam == "product":
        if not args.bits:
            raise UsageError("--bits is required for the product family")
        params = {"bits": args.bits, "local_dim": args.m}
    elif fam == "haar":
        if args.n is None:
            raise UsageError("--n is required for the haar family")
        args.seed = _seed(args)
        params = {"n_parties": args.n, "local_dim": args.m, "seed": args.seed}
    else:
        params = {}
    return StateSpec(fam, params).build()


def cmd_analyze(args):
    state = _state_from_args(args)
    n, m = state.n_parties, state.local_dim
    doc = {"n_parties": n, "local_dim": m}
    if args.family == "haar":
        doc["seed"] = args.seed
    if m != 2:
        ys = [0.0 if n == 1 else qudit_y_monotone(schmidt_coefficients(state, j)[::-1], m)
              for j in range(1, n + 1)]
        doc.update(label="SPECULATIVE", Y=ys, Y_T=float(sum(ys)),
                   margins=[float(v) for v in geometry.inequality_margins(ys)])
        columns = ("party", "Y")
        rows = [(j + 1, y) for j, y in enumerate(ys)]
    else:
        prof = entanglement_profile(state)
        doc["parties"] = [{"party": q.party, "lambda_max": q.lambda_max, "lambda_min": q.lambda_min,
                           "K": q.K, "Y": q.Y, "C_rest": q.C_rest} for q in prof.marginals]
        doc["Y"] = prof.y.tolist()
        doc["Y_T"] = prof.y_total
        doc["margins"] = geometry.inequality_margins(prof.y).tolist()
        columns = ("party", "lambda_max", "lambda_min", "K", "Y", "C_rest")
        rows = [(q.party, q.lambda_max, q.lambda_min, q.K, q.Y, q.C_rest) for q in prof.marginals]
        if n >= 2:
            b = bounds_report(state)
            doc["pair_concurrence"] = concurrence_table(state).tolist()
            doc["bounds"] = {k: getattr(b, k).tolist() for k in
                             ("lower", "value", "upper_raw", "upper", "lower_margin", "upper_margin")}
            columns += ("lower", "upper_raw", "upper", "lower_margin", "upper_margin")
            rows = [r + (float(b.lower[i]), float(b.upper_raw[i]), float(b.upper[i]),
                         float(b.lower_margin[i]), float(b.upper_margin[i]))
                    for i, r in enumerate(rows)]
        if n == 3:
            face = geometry.classify_face(prof.y)
            if face == "vertex":
                face = f"vertex {geometry.vertex_name(prof.y)}"
            doc["face"] = face

    fmt = args.format or "table"
    if fmt == "structured":
        _emit(args, json_text(doc))
    elif fmt == "csv":
        _emit(args, csv_text(columns, rows))
    else:
        out = []
        if doc.get("label"):
            out.append(f"[{doc['label']}] qudit monotone; sharing inequality unproven for M > 2")
        out.append(f"N = {n}  M = {m}" + (f"  seed = {doc['seed']}" if "seed" in doc else ""))
        out.append(table_text(columns, rows).rstrip("\n"))
        out.append("Y = (" + ", ".join(f"{v:.6g}" for v in doc["Y"]) + f")  Y_T = {doc['Y_T']:.6g}")
        out.append("margins = (" + ", ".join(f"{v:.6g}" for v in doc["margins"]) + ")")
        if "face" in doc:
            out.append(f"face: {doc['face']}")
        text = "\n".join(out) + "\n"
        sys.stdout.write(text)
        if args.output:
            write_atomic(args.output, json_text(doc))
    return EXIT_OK


# -- sample -------------------------------------------------------------------

SAMPLE_BLOCK = 1000


def sample_rows(n, count, seed):
    """Per-state Y vectors for ``count`` Haar-random ``n``-qubit states."""
    rows = []
    for block, start in enumerate(range(0, count, SAMPLE_BLOCK)):
        size = min(SAMPLE_BLOCK, count - start)
        psi = haar_batch(n, 2, SAMPLE_BLOCK, substream(seed, "sample", n, block))[:size]
        y = y_vectors_batch(psi, n)
        margins = np.min(geometry.inequality_margins(y), axis=-1)
        for i in range(size):
            rows.append((start + i, *(float(v) for v in y[i]), float(y[i].sum()), float(margins[i])))
    return rows


def cmd_sample(args):
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    seed = _seed(args)
    columns = ("state_id",) + tuple(f"Y_{j}" for j in range(1, args.n + 1)) + ("Y_T", "min_margin")
    rows = sample_rows(args.n, args.count, seed)
    fmt = args.format or "csv"
    manifest = _manifest(command="sample", n=args.n, count=args.count, seed=seed)
    if fmt == "table":
        text = f"# {manifest}\n" + table_text(columns, rows)
    elif fmt == "structured":
        text = json_text({"manifest": manifest, "columns": list(columns), "rows": rows})
    else:
        text = csv_text(columns, rows, manifest)
    _emit(args, text)
    if args.output:
        print(f"wrote {len(rows)} rows to {args.output} (seed {seed})")
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def cmd_verify(args):
    seed = _seed(args)
    samples = args.samples if args.samples is not None else 10_000
    if samples < 1:
        raise UsageError(f"--samples must be >= 1, got {samples}")
    extra = {"tol": args.tolerance} if args.tolerance is not None else {}
    reports = []
    names = list(SUITES) + ["qudit"] if args.suite == "all" else [args.suite]
    for name in names:
        if name == "qudit":
            n = args.n[0] if args.n else 3
            if args.m < 3:
                raise UsageError(f"--m must be >= 3 for the qudit suite, got {args.m}")
            reports.append(run_qudit_speculation(args.m, n, samples, seed, args.threads, **extra))
            continue
        config = SuiteConfig(counts=args.n or tuple(range(2, 9)), samples=samples, seed=seed,
                             inject=tuple(args.inject) if name == "inequality" else (),
                             threads=args.threads, **extra)
        reports.append(SUITES[name](config))

    for r in reports:
        print(r.summary())
        for c in r.checks:
            for rec in c.counterexamples:
                print(f"  counterexample [{c.name}]: {json.dumps(rec, sort_keys=True)}")
    if args.output:
        doc = {"manifest": _manifest(command="verify", suite=args.suite, seed=seed),
               "passed": all(r.passed for r in reports),
               "reports": [r.to_dict() for r in reports]}
        write_atomic(args.output, json_text(doc))
    ok = all(r.passed for r in reports)
    print(f"overall: {'PASS' if ok else 'FAIL'} (seed {seed})")
    return EXIT_OK if ok else EXIT_VIOLATION


# -- geometry -----------------------------------------------------------------

def cmd_geometry(args):
    n = args.n
    if args.action == "mesh":
        mesh = polytope_mesh_export()
        if args.output:
            write_atomic(args.output, json_text(mesh))
            print(f"wrote polyhedron {mesh['name']}: {len(mesh['vertices'])} vertices, "
                  f"{len(mesh['faces'])} faces to {args.output}")
        else:
            sys.stdout.write(json_text(mesh))
        return EXIT_OK

    if args.action == "volume":
        vol = geometry.inhabitable_volume(n)
        doc = {"n_parties": n, "exact": f"{vol.numerator}/{vol.denominator}", "value": float(vol)}
        print(f"{vol.numerator}/{vol.denominator} = {float(vol):.6g}")
        if args.samples:
            seed = _seed(args)
            est, se = geometry.polytope_volume_mc(n, args.samples, substream(seed, "volume", n))
            doc.update(mc=est, mc_std_error=se, samples=args.samples, seed=seed)
            print(f"monte carlo: {est:.6g} +/- {se:.6g} ({args.samples} samples, seed {seed})")
        if args.output:
            write_atomic(args.output, json_text(doc))
        return EXIT_OK

    if args.yt is None:
        raise UsageError("--yt is required for geometry slice")
    if not 0 <= args.yt <= n:
        raise UsageError(f"--yt must lie in [0, {n}], got {args.yt}")
    doc = {"n_parties": n, "Y_T": args.yt,
           "cube_slice": geometry.cube_slice_hyperarea(n, args.yt)}
    if n == 3:
        doc["exact"] = geometry.additivity_n3(args.yt)
        print(f"exact additivity: {doc['exact']:.6g}")
    if n >= 3 and 0 < args.yt < n:
        seed = _seed(args)
        samples = args.samples or 100_000
        cs = geometry.additivity_mc(n, args.yt, samples, substream(seed, "slice", n))
        doc.update(mc=cs.hyperarea, mc_std_error=cs.standard_error, samples=samples, seed=seed)
        print(f"monte carlo: {cs.hyperarea:.6g} +/- {cs.standard_error:.6g} "
              f"({samples} samples, seed {seed})")
        if "exact" in doc:
            dev = abs(cs.hyperarea - doc["exact"])
            sig = dev / cs.standard_error if cs.standard_error > 0 else (0.0 if dev < 1e-12 else math.inf)
            print(f"deviation: {sig:.3g} standard errors")
    elif n == 2:
        print("additivity: 0 (N = 2 region is the diagonal line)")
    if args.output:
        write_atomic(args.output, json_text(doc))
    return EXIT_OK


# -- figures ------------------------------------------------------------------

def cmd_figures(args):
    seed = _seed(args)
    if args.which == "fig1":
        samples = args.samples or 100
        rows = figure1_dataset(samples, seed)
        columns = FIG1_COLUMNS
        manifest = _manifest(figure="fig1", samples=samples, seed=seed)
    else:
        samples = args.samples or 100_000
        if args.grid < 2:
            raise UsageError(f"--grid must be >= 2, got {args.grid}")
        rows = figure4_dataset(args.grid, samples, seed)
        columns = FIG4_COLUMNS
        manifest = _manifest(figure="fig4", grid=args.grid, samples=samples, seed=seed)
    if (args.format or "csv") == "table":
        text = f"# {manifest}\n" + table_text(columns, rows)
    else:
        text = csv_text(columns, rows, manifest)
    _emit(args, text)
    print(manifest, file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "geometry": cmd_geometry,
    "figures": cmd_figures,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except QShareError as exc:
        print(f"qshare {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
