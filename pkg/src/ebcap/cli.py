"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error.
Set ``EBCAP_WORKERS`` to evaluate grid points in a process pool.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

from ebcap import __version__
from ebcap.aqecc import (
    EnumerationBudgetError,
    NoThresholdError,
    adaptive_trace,
    best_strategy,
    cat_yield,
    enumerate_code,
    threshold,
)
from ebcap.bellalg import BellLabel, DepolarizingChannel, bxor, hashing_yield, werner_from_fidelity
from ebcap.capacity import YieldCurve, classical_capacity_depolarizing, envelope, p_grid, qb_curve
from ebcap.epp import (
    GateNetwork,
    PairEnsembleDistribution,
    best_recurrence_rounds,
    is_bijection,
    leung_shor_yield,
    load_preset,
    multi_round_recurrence_eb,
    parse_network,
)
from ebcap.oracle import mc_sample_code, mc_sample_network, statevector_bxor_table
from ebcap.pauli import StabilizerCode, builtin_code, parse_code_file

SCHEMA = "ebcap.curves/1"
DEFAULT_GRID = "0.25:1:0.0025"
SHOR_PREFIXES = (4, 7, 8)
DEFAULT_ROUNDS = 5

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    return f"{v:.12g}"


# -- grid evaluation -------------------------------------------------------


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("EBCAP_WORKERS", "1")))
    except ValueError:
        raise UsageError("EBCAP_WORKERS must be an integer") from None


def evaluate(fn: Callable[[float], float], grid: Sequence[float]) -> list[float]:
    """Evaluate ``fn`` on every grid point, results in grid order."""
    workers = _workers()
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, grid, chunksize=max(1, len(grid) // (4 * workers))))
    return [fn(p) for p in grid]


def _cat_point(n: int, modified: bool, p: float) -> float:
    return cat_yield(n, DepolarizingChannel(p), modified)


def _strategy_point(code: StabilizerCode, prefixes: tuple[int, ...], p: float) -> tuple[int, float]:
    return best_strategy(code, DepolarizingChannel(p), prefixes)


def _prefix_point(code: StabilizerCode, k: int, p: float) -> float:
    return adaptive_trace(enumerate_code(code, DepolarizingChannel(p)), k).yield_per_use


def _recurrence_point(rounds: int, p: float) -> tuple[int, float]:
    return best_recurrence_rounds(DepolarizingChannel(p), rounds)


def _network_point(net: GateNetwork, p: float) -> float:
    return leung_shor_yield(DepolarizingChannel(p).fidelity, net)


def _curve(method: str, grid: Sequence[float], values: Sequence[float], **meta) -> YieldCurve:
    # clamp float noise at the boundary of [0, 1]
    pts = tuple((float(p), min(1.0, max(0.0, float(y)))) for p, y in zip(grid, values))
    return YieldCurve(method, pts, meta)


def cat_curves(ns: Sequence[int], variants: Sequence[bool], grid: Sequence[float]) -> list[YieldCurve]:
    out = []
    for n in ns:
        for modified in variants:
            vals = evaluate(partial(_cat_point, n, modified), grid)
            out.append(_curve(f"{'modcat' if modified else 'cat'}{n}", grid, vals, n=n, modified=modified))
    return out


def shor_auto(code: StabilizerCode, grid: Sequence[float], prefixes: tuple[int, ...] = SHOR_PREFIXES):
    """Best-prefix curve plus the list of regions ``(p_start, k)``."""
    results = evaluate(partial(_strategy_point, code, prefixes), grid)
    regions: list[dict] = []
    for p, (k, _) in zip(grid, results):
        if not regions or regions[-1]["prefix"] != k:
            regions.append({"p_start": p, "fidelity_start": (3 * p + 1) / 4, "prefix": k})
    curve = _curve(
        f"{code.name}-auto",
        grid,
        [y for _, y in results],
        code=code.name,
        prefixes=list(prefixes),
        best_prefix=[k for k, _ in results],
        regions=regions,
    )
    return curve, regions


def shor_prefix(code: StabilizerCode, k: int, grid: Sequence[float]) -> YieldCurve:
    vals = evaluate(partial(_prefix_point, code, k), grid)
    return _curve(f"{code.name}-prefix{k}", grid, vals, code=code.name, prefix=k)


def recurrence_curve(rounds: int, grid: Sequence[float]) -> YieldCurve:
    results = evaluate(partial(_recurrence_point, rounds), grid)
    return _curve(
        f"recurrence-k{rounds}",
        grid,
        [y for _, y in results],
        max_rounds=rounds,
        best_rounds=[k for k, _ in results],
    )


def network_curve(net: GateNetwork, grid: Sequence[float]) -> YieldCurve:
    vals = evaluate(partial(_network_point, net), grid)
    return _curve(net.name or "network", grid, vals, network=net.name)


def builtin_eb_curves(grid: Sequence[float]) -> list[YieldCurve]:
    """The four method families; Leung-Shor first so it wins exact ties."""
    cats = cat_curves((3, 4, 5), (False, True), grid)
    cat_best = envelope(cats, method="cat-best")
    shor, _ = shor_auto(builtin_code("shor9"), grid)
    return [
        network_curve(load_preset("leung-shor"), grid),
        recurrence_curve(DEFAULT_ROUNDS, grid),
        shor,
        cat_best,
    ]


# -- output ----------------------------------------------------------------


def curve_csv(curve: YieldCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "yield"])
    for p, y in curve.points:
        writer.writerow([fmt(p), fmt(y)])
    return buf.getvalue()


def curves_json(curves: Sequence[YieldCurve]) -> str:
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "curves": [
            {"method": c.method, "metadata": c.metadata, "points": [[p, y] for p, y in c.points]} for c in curves
        ],
    }
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def table_csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit(curves: Sequence[YieldCurve], args: argparse.Namespace) -> None:
    if args.format == "json":
        text = curves_json(curves)
        if args.outdir:
            for c in curves:
                _write(Path(args.outdir) / f"{c.method}.json", curves_json([c]))
        elif args.out:
            _write(Path(args.out), text)
        else:
            sys.stdout.write(text)
        return
    if args.outdir:
        for c in curves:
            _write(Path(args.outdir) / f"{c.method}.csv", curve_csv(c))
        return
    if len(curves) == 1:
        text = curve_csv(curves[0])
    else:
        text = "".join(f"# {c.method}\n{curve_csv(c)}" for c in curves)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def read_curves(path: str) -> list[YieldCurve]:
    """Load curves written by ``emit`` (single-curve CSV, sectioned CSV, or JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise UsageError(f"{path}: unsupported schema {data.get('schema')!r}")
        return [
            YieldCurve(c["method"], tuple((float(p), float(y)) for p, y in c["points"]), c.get("metadata", {}))
            for c in data["curves"]
        ]
    curves: list[YieldCurve] = []
    method, points = Path(path).stem, []

    def flush() -> None:
        if points:
            curves.append(YieldCurve(method, tuple(points), {"source": path}))

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            flush()
            method, points = line[1:].strip(), []
        elif line == "p,yield":
            continue
        else:
            p, y = line.split(",")
            points.append((float(p), float(y)))
    flush()
    if not curves:
        raise UsageError(f"{path}: no curve data")
    return curves


# -- argument parsing --------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
        return p_grid(start, stop, step)
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r} (want start:stop:step within [0, 1]): {exc}") from None


def parse_int_list(text: str) -> list[int]:
    """``3,4,5`` or ``3-8`` or a mixture."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)\s*(?:-|\.\.)\s*(\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part.isdigit():
            out.append(int(part))
        else:
            raise UsageError(f"bad integer list {text!r}")
    return out


def load_code(args: argparse.Namespace) -> StabilizerCode:
    if args.code and args.code_file:
        raise UsageError("--code and --code-file are mutually exclusive")
    if args.code_file:
        try:
            return parse_code_file(Path(args.code_file).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(str(exc)) from None
        except ValueError as exc:
            raise UsageError(f"{args.code_file}: {exc}") from None
    try:
        return builtin_code(args.code or "shor9")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_network(args: argparse.Namespace) -> GateNetwork:
    if getattr(args, "net_file", None):
        try:
            return parse_network(Path(args.net_file).read_text(encoding="utf-8"), name=Path(args.net_file).stem)
        except (OSError, ValueError) as exc:
            raise UsageError(f"{args.net_file}: {exc}") from None
    try:
        return load_preset(getattr(args, "net", None) or "leung-shor")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_cat(args: argparse.Namespace) -> int:
    ns = parse_int_list(args.n)
    if any(n < 2 for n in ns):
        raise UsageError("cat code needs n >= 2")
    variants = (False, True) if args.both else (args.modified,)
    emit(cat_curves(ns, variants, parse_grid(args.grid)), args)
    return EXIT_OK


def cmd_shor(args: argparse.Namespace) -> int:
    code = load_code(args)
    grid = parse_grid(args.grid)
    strategy = args.strategy
    try:
        if strategy == "auto":
            prefixes = tuple(parse_int_list(args.prefixes)) if args.prefixes else SHOR_PREFIXES
            if any(not 0 <= k <= code.num_generators for k in prefixes):
                raise UsageError(f"prefixes must lie in 0..{code.num_generators}")
            curve, regions = shor_auto(code, grid, prefixes)
            for r in regions:
                print(
                    f"region: prefix {r['prefix']} from p={fmt(r['p_start'])} (F={fmt(r['fidelity_start'])})",
                    file=sys.stderr,
                )
            emit([curve], args)
            return EXIT_OK
        m = re.fullmatch(r"prefix=(\d+)", strategy)
        if not m:
            raise UsageError(f"bad strategy {strategy!r} (want 'auto' or 'prefix=K')")
        k = int(m.group(1))
        if not 0 <= k <= code.num_generators:
            raise UsageError(f"prefix must lie in 0..{code.num_generators}, got {k}")
        emit([shor_prefix(code, k, grid)], args)
    except EnumerationBudgetError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


def cmd_epp(args: argparse.Namespace) -> int:
    grid = parse_grid(args.grid)
    if args.method == "recurrence":
        if args.rounds < 1:
            raise UsageError("--rounds must be at least 1")
        emit([recurrence_curve(args.rounds, grid)], args)
    else:
        emit([network_curve(load_network(args), grid)], args)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    if not args.inputs:
        raise UsageError("give curve files or 'all-builtin'")
    curves: list[YieldCurve] = []
    for item in args.inputs:
        if item == "all-builtin":
            curves.extend(builtin_eb_curves(parse_grid(args.grid)))
        else:
            try:
                curves.extend(read_curves(item))
            except (OSError, ValueError) as exc:
                raise UsageError(f"{item}: {exc}") from None
    try:
        env = envelope(curves, method="eb-envelope")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    qb = qb_curve(env)
    qb = YieldCurve("qb-bound", qb.points, qb.metadata)
    emit([env, qb], args)
    return EXIT_OK


def threshold_rows(ns: Sequence[int], tol: float) -> list[list[object]]:
    rows: list[list[object]] = []
    for n in ns:
        row: list[object] = [n]
        for modified in (False, True):
            try:
                if n == 1:
                    t = threshold(lambda p: hashing_yield(werner_from_fidelity((3 * p + 1) / 4)), tol=tol)
                else:
                    t = threshold(partial(_cat_point, n, modified), tol=tol)
                row += [t.p, t.fidelity]
            except NoThresholdError:
                row += [None, None]
        rows.append(row)
    return rows


THRESHOLD_HEADER = ["n", "p_cat", "F_cat", "p_modcat", "F_modcat"]


def cmd_threshold(args: argparse.Namespace) -> int:
    if args.family != "cat":
        raise UsageError(f"unknown code family {args.family!r}")
    ns = parse_int_list(args.n)
    if any(n < 1 for n in ns):
        raise UsageError("n must be >= 1 (n=1 is the hashing-only row)")
    text = table_csv(THRESHOLD_HEADER, threshold_rows(ns, args.tol))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _report_json(report) -> str:
    return json.dumps(
        {
            "trials": report.trials,
            "seed": report.seed,
            "max_sigma_deviation": report.max_sigma_deviation,
            "passed": report.passed,
            "notes": report.notes,
            "empirical": report.empirical,
            "analytic": report.analytic,
            "std_errors": report.std_errors,
        },
        indent=1,
        sort_keys=True,
    )


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite == "bxor":
        table = statevector_bxor_table()
        matches = 0
        for (s, t), (s2, t2) in sorted(table.items()):
            got = bxor(BellLabel.from_bits(*s), BellLabel.from_bits(*t))
            want = (BellLabel.from_bits(*s2), BellLabel.from_bits(*t2))
            ok = got == want
            matches += ok
            if not ok:
                print(f"mismatch: {s},{t} -> algebra {got}, state vector {want}")
        print(f"bxor: {matches}/{len(table)} matches")
        return EXIT_OK if matches == len(table) else EXIT_VERIFY
    trials = int(float(args.trials))
    if trials < 1:
        raise UsageError("--trials must be positive")
    if args.suite == "code":
        code = load_code(args)
        try:
            report = mc_sample_code(code, DepolarizingChannel(args.p), trials, args.seed)
        except EnumerationBudgetError as exc:
            raise UsageError(str(exc)) from None
    else:
        net = load_network(args)
        if not is_bijection(net):
            print(f"network {net.name} is not a bijection on label strings")
            return EXIT_VERIFY
        dist = PairEnsembleDistribution.product([werner_from_fidelity(args.f)] * net.num_pairs)
        report = mc_sample_network(dist, net, trials, args.seed)
    print(report.summary())
    if args.json:
        print(_report_json(report))
    return EXIT_OK if report.passed else EXIT_VERIFY


# -- figures -----------------------------------------------------------------

FIGURE_FILES = {
    "4": "fig4_cat_yield.csv",
    "5": "fig5_cat4_vs_modcat4.csv",
    "6": "fig6_shor_vs_cat9.csv",
    "7": "fig7_recurrence.csv",
    "8a": "fig8a_leung_shor.csv",
    "8": "fig8_eb_bounds.csv",
    "qb": "fig_qb_bounds.csv",
    "9": "fig9_cat_threshold.csv",
}


def _wide(curves: Sequence[YieldCurve], extra: dict[str, Sequence[object]] | None = None) -> str:
    grid = curves[0].grid
    header = ["p"] + [c.method for c in curves] + list(extra or {})
    rows = []
    for i, p in enumerate(grid):
        row: list[object] = [p] + [c.points[i][1] for c in curves]
        row += [col[i] for col in (extra or {}).values()]
        rows.append(row)
    return table_csv(header, rows)


def build_figures(grid: Sequence[float], threshold_ns: Sequence[int] = tuple(range(1, 17))) -> dict[str, str]:
    """CSV text for every figure, keyed by file name."""
    out: dict[str, str] = {}
    cats = cat_curves((3, 4, 5), (False, True), grid)
    out[FIGURE_FILES["4"]] = _wide(cats)
    out[FIGURE_FILES["5"]] = _wide([c for c in cats if c.metadata["n"] == 4])

    shor9 = builtin_code("shor9")
    shor, _ = shor_auto(shor9, grid)
    per_prefix = [shor_prefix(shor9, k, grid) for k in SHOR_PREFIXES]
    cat9 = cat_curves((9,), (False,), grid)[0]
    out[FIGURE_FILES["6"]] = _wide([shor, *per_prefix, cat9], {"best_prefix": shor.metadata["best_prefix"]})

    rec_fixed = [
        _curve(f"recurrence-exact{k}", grid, evaluate(partial(_fixed_rounds_point, k), grid), rounds=k)
        for k in (1, 2, 3)
    ]
    rec_best = recurrence_curve(DEFAULT_ROUNDS, grid)
    out[FIGURE_FILES["7"]] = _wide([*rec_fixed, rec_best], {"best_rounds": rec_best.metadata["best_rounds"]})

    ls = network_curve(load_preset("leung-shor"), grid)
    out[FIGURE_FILES["8a"]] = _wide([ls])

    cat_best = envelope(cats, method="cat-best")
    methods = [ls, rec_best, shor, cat_best]
    env = envelope(methods, method="eb-envelope")
    out[FIGURE_FILES["8"]] = _wide([*methods, env], {"winner": env.metadata["winners"]})

    caps = [classical_capacity_depolarizing(p) for p in grid]
    qbs = [qb_curve(c) for c in [*methods, env]]
    out[FIGURE_FILES["qb"]] = _wide(qbs, {"capacity": caps})

    out[FIGURE_FILES["9"]] = table_csv(THRESHOLD_HEADER, threshold_rows(threshold_ns, 1e-5))
    return out


def _fixed_rounds_point(rounds: int, p: float) -> float:
    return multi_round_recurrence_eb(DepolarizingChannel(p), rounds)


def cmd_figures(args: argparse.Namespace) -> int:
    outdir = Path(args.outdir)
    for name, text in build_figures(parse_grid(args.grid)).items():
        _write(outdir / name, text)
        print(outdir / name)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", default=DEFAULT_GRID, help="start:stop:step, endpoints inclusive (default %(default)s)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--out", help="write to this file instead of stdout")
    group.add_argument("--outdir", help="write one file per curve into this directory")


def _add_code(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="builtin code: shor9 or cat<N> (default shor9)")
    p.add_argument("--code-file", help="code description file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebcap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cat", help="adaptive cat-code yield curves")
    p.add_argument("--n", default="4", help="code lengths, e.g. 4 or 3,4,5 or 3-8")
    variant = p.add_mutually_exclusive_group()
    variant.add_argument("--modified", action="store_true", help="swap Phi-/Psi- after every check")
    variant.add_argument("--both", action="store_true", help="emit plain and modified curves")
    _add_output(p)
    p.set_defaults(func=cmd_cat)

    p = sub.add_parser("shor", help="adaptive stabilizer-code yield (Shor code by default)")
    p.add_argument("--strategy", default="auto", help="'auto' or 'prefix=K'")
    p.add_argument("--prefixes", help="candidate prefixes for auto (default 4,7,8)")
    _add_code(p)
    _add_output(p)
    p.set_defaults(func=cmd_shor)

    p = sub.add_parser("epp", help="purification-based yield curves")
    p.add_argument("method", choices=("recurrence", "leung-shor"))
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="max recurrence rounds (default %(default)s)")
    p.add_argument("--net", help="network preset name (default leung-shor)")
    p.add_argument("--net-file", help="network preset file")
    _add_output(p)
    p.set_defaults(func=cmd_epp)

    p = sub.add_parser("bounds", help="E_B envelope and the implied Q_B bound")
    p.add_argument("inputs", nargs="*", help="curve files, or 'all-builtin'")
    _add_output(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("threshold", help="threshold table for a code family")
    p.add_argument("--family", default="cat")
    p.add_argument("--n", default="3-8", help="code lengths; n=1 adds the hashing-only row")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("verify", help="run an independent oracle")
    p.add_argument("suite", choices=("bxor", "code", "network"))
    _add_code(p)
    p.add_argument("--p", type=float, default=0.8, help="channel parameter for 'code'")
    p.add_argument("--net", help="network preset (default leung-shor)")
    p.add_argument("--net-file")
    p.add_argument("--f", type=float, default=0.9, help="Werner fidelity for 'network'")
    p.add_argument("--trials", default="1e6")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--json", action="store_true", help="also print the full report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figures", help="write the data behind every figure")
    p.add_argument("--outdir", required=True)
    p.add_argument("--grid", default=DEFAULT_GRID)
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"ebcap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
