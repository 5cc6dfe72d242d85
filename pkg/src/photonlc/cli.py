"""Command-line front end.

Every output starts with a header naming the command and its seed, and two
runs with the same command line produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError,
    FidelityRow,
    class_count_csv,
    correlation_series,
    fidelity_csv,
    record_costs,
    survey_csv,
    survey_small_graphs,
)
from .circuit import METRICS, CircuitError, cost_report
from .graph_io import GraphFormatError, loads_graph, to_edge_document
from .graphs import GraphError
from .mapper import MapperError, map_to_circuit, verify_circuit
from .noise import NoiseError, NoiseModel, epr_fidelity_mc
from .optimizer import (
    DEFAULT_COST,
    CostFunction,
    optimize_edge_reduce,
    optimize_exhaustive,
    optimize_min_edges,
    random_search,
    rgs_optimize,
)
from .orbit import DEFAULT_ORBIT_CAP, OrbitCapExceeded, entanglement_classes, format_orbit_dump, orbit_bfs, orbit_sample

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CAP = 4
EXIT_EXISTS = 5
EXIT_PARAM = 6
EXIT_IO = 7


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers


def _read_graph(args):
    if args.graph is not None and args.graph_file is not None:
        raise CliError(EXIT_USAGE, "give either --graph or --graph-file, not both")
    if args.graph is not None:
        text = args.graph
    elif args.graph_file is not None:
        try:
            text = sys.stdin.read() if args.graph_file == "-" else Path(args.graph_file).read_text()
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read {args.graph_file}: {exc}") from exc
    else:
        raise CliError(EXIT_USAGE, "an input graph is required (--graph or --graph-file)")
    try:
        return loads_graph(text)
    except (GraphFormatError, GraphError) as exc:
        raise CliError(EXIT_INPUT, f"bad input graph: {exc}") from exc


def _rng(args, required: bool = True) -> np.random.Generator | None:
    if args.seed is None:
        if required:
            raise CliError(EXIT_USAGE, f"'{args.command}' is stochastic and needs --seed")
        return None
    return np.random.default_rng(args.seed)


def _header(args, **extra: Any) -> dict[str, Any]:
    head = {"command": args.command, "seed": args.seed, "version": __version__}
    head.update(extra)
    return head


def _comment_lines(head: dict[str, Any]) -> list[str]:
    return [" ".join(f"{k}={v}" for k, v in head.items())]


def _json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(args.out)
    if path.exists() and not args.overwrite:
        raise CliError(EXIT_EXISTS, f"{path} exists; pass --overwrite to replace it")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _plot_path(args) -> Path:
    if args.out in (None, "-"):
        raise CliError(EXIT_USAGE, "--plot writes next to --out, so it needs a file for --out")
    if Path(args.out).exists() and not args.overwrite:
        raise CliError(EXIT_EXISTS, f"{args.out} exists; pass --overwrite to replace it")
    return Path(args.out).with_suffix(".svg")


def _write_extra(args, path: Path, text: str) -> None:
    if path.exists() and not args.overwrite:
        raise CliError(EXIT_EXISTS, f"{path} exists; pass --overwrite to replace it")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _cost(args) -> CostFunction:
    if not getattr(args, "cost", None):
        return DEFAULT_COST
    try:
        return CostFunction.parse(args.cost)
    except ValueError as exc:
        raise CliError(EXIT_PARAM, f"bad --cost: {exc}") from exc


def _check_format(args, allowed: Sequence[str]) -> str:
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise CliError(EXIT_USAGE, f"'{args.command}' supports --format {', '.join(allowed)}")
    return fmt


# ---------------------------------------------------------------------------
# commands


def cmd_orbit(args) -> str:
    _check_format(args, ("text",))
    g = _read_graph(args)
    head = _header(args, n=g.n)
    if args.samples is not None:
        recs = orbit_sample(g, args.samples, args.walk_len if args.walk_len is not None else g.n, _rng(args))
        head["mode"] = "sample"
    else:
        recs = orbit_bfs(g, args.cap_orbit)
        head["mode"] = "exhaustive"
    head["members"] = len(recs)
    return "".join(f"# {line}\n" for line in _comment_lines(head)) + format_orbit_dump(recs)


def cmd_map(args) -> str:
    _check_format(args, ("json-doc",))
    g = _read_graph(args)
    c = map_to_circuit(g, n_emitters=args.emitters)
    doc = _header(args)
    doc.update(input=to_edge_document(g), verified=verify_circuit(c, g),
               report=cost_report(c).as_dict(), circuit=c.to_document())
    return _json(doc)


def cmd_optimize(args) -> str:
    _check_format(args, ("json-doc",))
    g = _read_graph(args)
    cost = _cost(args)
    if args.strategy == "exhaustive":
        res = optimize_exhaustive(
            g, cost, orbit_cap=args.cap_orbit, max_order_n=args.cap_orders,
            order_samples=200 if args.samples is None else args.samples, rng=_rng(args, required=g.n > args.cap_orders),
        )
    elif args.strategy == "min-edges":
        res = optimize_min_edges(g, args.cap_orbit)
    elif args.strategy == "edge-reduce":
        res = optimize_edge_reduce(g)
    else:
        res = random_search(
            g, 200 if args.samples is None else args.samples, args.walk_len if args.walk_len is not None else g.n, cost, _rng(args)
        )
    doc = _header(args, strategy=args.strategy)
    body = res.to_document(g, cost, args.seed)
    body.pop("seed")
    doc.update(body)
    return _json(doc)


def cmd_rgs(args) -> str:
    _check_format(args, ("json-doc",))
    if args.arms is None:
        raise CliError(EXIT_USAGE, "'rgs' needs --arms")
    r = rgs_optimize(args.arms)
    doc = _header(args, arms=args.arms, n=2 * args.arms)
    doc.update(
        original={"report": r.original_report.as_dict(), "circuit": r.original.to_document()},
        optimized={
            "lc_sequence": list(r.sequence),
            "graph": to_edge_document(r.graph),
            "report": r.report.as_dict(),
            "circuit": r.circuit.to_document(),
            "local_layer": [{"gate": gt.kind, "target": gt.targets[0]} for gt in r.local_layer],
        },
        targets={"original_ee_cnots": 2 * args.arms - 3, "optimized_ee_cnots": args.arms - 2},
    )
    return _json(doc)


def cmd_correlate(args) -> str:
    fmt = _check_format(args, ("csv", "svg"))
    g = _read_graph(args)
    rng = _rng(args)
    samples = 200 if args.samples is None else args.samples
    walk = args.walk_len if args.walk_len is not None else g.n
    recs = record_costs(orbit_sample(g, samples, walk, rng))
    series = correlation_series(recs, args.x, args.y)
    head = _header(args, n=g.n, samples=samples, walk_len=walk, members=len(recs), x=args.x, y=args.y)
    try:
        head["pearson"] = f"{series.pearson:.6f}"
    except AnalysisError:
        head["pearson"] = "undefined"
    from .plotting import correlation_svg

    if fmt == "svg":
        return correlation_svg(series, description=_comment_lines(head)[0])
    if args.plot:
        _write_extra(args, _plot_path(args), correlation_svg(series, description=_comment_lines(head)[0]))
    return series.to_csv(_comment_lines(head))


def cmd_fidelity(args) -> str:
    fmt = _check_format(args, ("csv", "svg"))
    rng = _rng(args)
    arms = args.arms_list or [5]
    trials = 20000 if args.trials is None else args.trials
    noise = NoiseModel(args.p_dep, args.scope, args.channel)
    rows = []
    for m in arms:
        r = rgs_optimize(m)
        for variant, c, layer in (("original", r.original, ()), ("optimized", r.circuit, r.local_layer)):
            est = epr_fidelity_mc(c, layer, noise, trials, rng)
            rows.append(FidelityRow(2 * m, variant, args.p_dep, trials, est.fidelity, est.stderr,
                                    est.lower_bound, est.lower_bound_stderr))
    head = _header(args, scope=noise.scope, channel=noise.channel)
    if fmt == "svg" or args.plot:
        from .plotting import fidelity_svg

        svg_text = fidelity_svg([f"n={r.n} {r.variant}" for r in rows], [r.lower_bound for r in rows],
                                [r.lower_bound_stderr for r in rows], description=_comment_lines(head)[0])
        if fmt == "svg":
            return svg_text
        _write_extra(args, _plot_path(args), svg_text)
    return fidelity_csv(rows, _comment_lines(head))


def cmd_survey(args) -> str:
    _check_format(args, ("csv",))
    n_max = args.n_max
    partition = entanglement_classes(n_max, args.n_min)
    head = _header(args, n_min=args.n_min, n_max=n_max, classes=len(partition.classes),
                   labeled_connected=partition.labeled_total)
    if args.classes_only:
        return class_count_csv(partition, _comment_lines(head))
    rng = _rng(args, required=args.limit_per_class is not None)
    rows = survey_small_graphs(n_max, n_min=args.n_min, partition=partition,
                               limit_per_class=args.limit_per_class, rng=rng)
    head["processed"] = sum(r.processed for r in rows)
    return survey_csv(rows, _comment_lines(head))


COMMANDS = {
    "orbit": cmd_orbit,
    "map": cmd_map,
    "optimize": cmd_optimize,
    "rgs": cmd_rgs,
    "correlate": cmd_correlate,
    "fidelity": cmd_fidelity,
    "survey": cmd_survey,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 already; keep the message format
        self.print_usage(sys.stderr)
        raise CliError(EXIT_USAGE, message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (required by stochastic commands)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--overwrite", action="store_true", help="allow replacing an existing output file")
    common.add_argument("--format", choices=("csv", "svg", "json-doc", "text"), default=None)

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--graph", default=None, help="inline graph6 string or JSON edge-list document")
    graph.add_argument("--graph-file", default=None, help="file holding the graph ('-' for stdin)")

    limits = argparse.ArgumentParser(add_help=False)
    limits.add_argument("--cap-orbit", type=int, default=DEFAULT_ORBIT_CAP)
    limits.add_argument("--cap-orders", type=int, default=7, help="enumerate all orders up to this n")
    limits.add_argument("--samples", type=int, default=None)
    limits.add_argument("--walk-len", type=int, default=None, help="LC random-walk length (default: n)")

    p = _Parser(prog="photonlc", description="LC-orbit optimization of photonic graph-state generation circuits")
    p.add_argument("--version", action="version", version=f"photonlc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("orbit", parents=[common, graph, limits], help="dump the LC orbit (or a random sample)")
    s = sub.add_parser("map", parents=[common, graph], help="emission circuit for a graph in label order")
    s.add_argument("--emitters", type=int, default=None)
    s = sub.add_parser("optimize", parents=[common, graph, limits], help="search the orbit for a cheaper circuit")
    s.add_argument("--strategy", choices=("exhaustive", "min-edges", "edge-reduce", "random"), default="exhaustive")
    s.add_argument("--cost", default=None, help="e.g. 'ee_cnots,unitary_count' or 'ee_cnots=1,depth=0.1'")
    s = sub.add_parser("rgs", parents=[common], help="original and optimized repeater-graph circuits")
    s.add_argument("--arms", type=int, default=None)
    s = sub.add_parser("correlate", parents=[common, graph, limits], help="cost vs edges over an orbit sample")
    s.add_argument("--x", default="edges", choices=("edges",) + METRICS)
    s.add_argument("--y", default="unitary_count", choices=METRICS)
    s.add_argument("--plot", action="store_true", help="also write an SVG next to --out")
    s = sub.add_parser("fidelity", parents=[common], help="EPR fidelity after distillation under noise")
    s.add_argument("--arms", dest="arms_list", type=int, nargs="+", default=None)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--p-dep", type=float, default=0.01)
    s.add_argument("--scope", choices=("ee", "all"), default="ee")
    s.add_argument("--channel", choices=("two-qubit", "local"), default="two-qubit")
    s.add_argument("--plot", action="store_true", help="also write an SVG next to --out")
    s = sub.add_parser("survey", parents=[common], help="per-class cost survey of small connected graphs")
    s.add_argument("--n-max", type=int, default=7)
    s.add_argument("--n-min", type=int, default=2)
    s.add_argument("--classes-only", action="store_true", help="class partition only (fast)")
    s.add_argument("--limit-per-class", type=int, default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = COMMANDS[args.command](args)
        _emit(args, text)
    except CliError as exc:
        print(f"photonlc: error: {exc}", file=sys.stderr)
        return exc.code
    except OrbitCapExceeded as exc:
        print(f"photonlc: error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GraphFormatError, CircuitError) as exc:
        print(f"photonlc: error: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoiseError, AnalysisError, GraphError, MapperError, ValueError) as exc:
        print(f"photonlc: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"photonlc: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
