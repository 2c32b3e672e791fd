"""Command-line front end.

Subcommands
-----------
analyze
    Efficiency curve of one codebook over a load range, as CSV.
simulate
    Monte Carlo batch per load point, from a JSON scenario or flags.
inspect-chain
    Dump the observation chain (states, cardinalities, initial vector,
    integer transition counts) as CSV.
thresholds
    Load-adaptive codebook schedule over a grid, as CSV.
reproduce
    Canned parameter sets that regenerate the library's standard figures,
    one CSV per curve plus an SVG overlay.

Exit codes: 0 success, 2 usage or invalid values, 3 a configured capacity
cap was exceeded, 4 an input file could not be parsed.  Every run writes a
manifest JSON recording the resolved parameters; re-running a command with
the parameters from its manifest reproduces the CSV output byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import __version__
from .codebook import CodebookSpec, codebook_size
from .errors import (
    CodexpandError,
    DomainError,
    EnumerationTooLarge,
    InputParseError,
    SizeExceedsCap,
    StateSpaceTooLarge,
)
from .markov import build_transition_model
from .planner import default_candidates, efficiency_curve, threshold_schedule
from .reporting import chain_dump, format_float, svg_line_plot, write_csv, write_manifest
from .simulate import AggregateStats, ScenarioConfig, run_batch

#: Master seed used when a command that needs randomness is not given one.
DEFAULT_SEED = 24601
#: Trials per load point unless overridden.
DEFAULT_TRIALS = 10**5
#: Load grids default to 1..LOAD_SPAN_FACTOR * codebook size, step 1.
LOAD_SPAN_FACTOR = 10
#: Largest chain the inspect-chain dump will print.
DUMP_STATE_CAP = 10**4

_SIMULATE_HEADER = ["N", "mean_singles", "mean_perceived", "mean_phantoms",
                    "efficiency", "se_efficiency"]


def parse_inline_spec(text: str) -> CodebookSpec:
    """Parse the compact spec grammar, e.g. ``L=2,m=2,2,mode=expanded``.

    Keys: ``L`` (sub-frames), ``m`` (one budget per sub-frame, or a single
    budget reused L times), ``mode`` (reference or expanded), optional ``M``
    (provisioned preambles).  Bare values after ``m=`` extend the budget list.
    """
    data: dict[str, list[str]] = {}
    collecting: list[str] | None = None
    for token in text.split(","):
        token = token.strip()
        key, sep, value = token.partition("=")
        if sep:
            key = key.strip()
            if key in data:
                raise DomainError(f"duplicate key {key!r} in spec {text!r}")
            data[key] = [value.strip()]
            collecting = data[key] if key == "m" else None
        elif collecting is not None and token:
            collecting.append(token)
        else:
            raise DomainError(f"cannot parse spec token {token!r} in {text!r}")
    return _spec_from_fields(
        length=data.pop("L", [None])[0],
        budgets=data.pop("m", None),
        mode=data.pop("mode", [None])[0],
        m_global=data.pop("M", [None])[0],
        leftovers=data,
        source=text,
    )


def _spec_from_fields(length, budgets, mode, m_global, leftovers, source) -> CodebookSpec:
    if leftovers:
        raise DomainError(f"unknown spec keys {sorted(leftovers)} in {source!r}")
    if mode not in ("reference", "expanded"):
        raise DomainError(f"spec {source!r} needs mode=reference or mode=expanded")
    if budgets is None:
        raise DomainError(f"spec {source!r} needs per-sub-frame budgets m=...")
    try:
        budget_values = [int(b) for b in budgets]
        length_value = int(length) if length is not None else len(budget_values)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"non-integer value in spec {source!r}") from exc
    if len(budget_values) == 1 and length_value > 1:
        budget_values = budget_values * length_value
    if len(budget_values) != length_value:
        raise DomainError(
            f"spec {source!r} lists {len(budget_values)} budgets for L={length_value}"
        )
    m_value = int(m_global) if m_global is not None else None
    if mode == "reference":
        if len(set(budget_values)) != 1:
            raise DomainError("reference mode uses one uniform preamble budget")
        return CodebookSpec.reference(budget_values[0], length_value, m_value)
    return CodebookSpec.expanded(budget_values, m_value)


def spec_from_json_value(value, source: str) -> CodebookSpec:
    """Build a spec from a scenario's ``spec`` entry: inline string or object."""
    if isinstance(value, str):
        return parse_inline_spec(value)
    if not isinstance(value, Mapping):
        raise DomainError(f"spec in {source} must be a string or an object")
    budgets = value.get("m")
    if isinstance(budgets, (int, float)):
        budgets = [budgets]
    return _spec_from_fields(
        length=value.get("L"),
        budgets=budgets,
        mode=value.get("mode"),
        m_global=value.get("M"),
        leftovers={k: v for k, v in value.items() if k not in ("L", "m", "mode", "M")},
        source=source,
    )


def load_spec(text: str) -> CodebookSpec:
    """Resolve a --spec value: a JSON file path, or the inline grammar."""
    path = Path(text)
    if path.is_file():
        return spec_from_json_value(_load_json(path), str(path))
    return parse_inline_spec(text)


def _load_json(path: Path):
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path} is not valid JSON: {exc}") from exc


def parse_n_range(text: str) -> list[int]:
    """Parse ``A``, ``A:B``, or ``A:B:STEP`` into an inclusive load grid."""
    fields = text.split(":")
    if len(fields) > 3:
        raise DomainError(f"load range {text!r} is not A, A:B, or A:B:STEP")
    try:
        numbers = [int(f) for f in fields]
    except ValueError as exc:
        raise DomainError(f"non-integer load range {text!r}") from exc
    start = numbers[0]
    stop = numbers[1] if len(numbers) > 1 else start
    step = numbers[2] if len(numbers) > 2 else 1
    if start < 1 or stop < start or step < 1:
        raise DomainError(f"load range {text!r} must satisfy 1 <= A <= B, STEP >= 1")
    return list(range(start, stop + 1, step))


def _default_grid(size: int) -> list[int]:
    return list(range(1, LOAD_SPAN_FACTOR * size + 1))


def _simulate_rows(spec: CodebookSpec, grid: Sequence[int], trials: int,
                   seed: int, workers: int) -> list[list[str]]:
    rows = []
    for n in grid:
        stats = run_batch(ScenarioConfig(spec, n, trials, seed), workers=workers)
        rows.append(_stats_row(n, stats))
    return rows


def _stats_row(n: int, stats: AggregateStats) -> list[str]:
    se = stats.efficiency.se
    return [
        str(n),
        format_float(stats.singles.mean),
        format_float(stats.perceived.mean),
        format_float(stats.phantoms.mean),
        format_float(stats.efficiency.mean),
        format_float(se) if se is not None else "",
    ]


def _grid_parameter(grid: Sequence[int]) -> str | list[int]:
    """Compact ``A:B:STEP`` form when the grid is arithmetic, else the list."""
    if len(grid) == 1:
        return f"{grid[0]}:{grid[0]}:1"
    steps = {b - a for a, b in zip(grid, grid[1:])}
    if len(steps) == 1:
        return f"{grid[0]}:{grid[-1]}:{steps.pop()}"
    return list(grid)


def _write_outputs(out_dir: Path, command: str, parameters: dict,
                   master_seed: int | None, started: float,
                   outputs: dict[str, Callable[[Path], None]],
                   manifest_name: str | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, write in outputs.items():
        write(out_dir / name)
    manifest = {
        "command": command,
        "parameters": parameters,
        "master_seed": master_seed,
        "version": __version__,
        "outputs": sorted(outputs),
        "duration_seconds": round(time.perf_counter() - started, 6),
    }
    if manifest_name is None:
        manifest_name = f"{command.replace('-', '_')}_manifest.json"
    write_manifest(out_dir / manifest_name, manifest)


def cmd_analyze(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    spec = load_spec(args.spec)
    grid = parse_n_range(args.n_range) if args.n_range else _default_grid(codebook_size(spec))
    curve = efficiency_curve(spec, grid)
    rows = [[str(n), format_float(e)] for n, e in curve]
    _write_outputs(
        Path(args.out), "analyze",
        {"spec": spec.describe(), "n_range": _grid_parameter(grid)},
        None, started,
        {"analyze.csv": lambda p: write_csv(p, ["N", "efficiency"], rows)},
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.scenario:
        if args.spec:
            raise DomainError("give either --scenario or --spec, not both")
        doc = _load_json(Path(args.scenario))
        if not isinstance(doc, Mapping):
            raise InputParseError(f"{args.scenario} must hold a JSON object")
        if "spec" not in doc:
            raise DomainError(f"scenario {args.scenario} is missing 'spec'")
        spec = spec_from_json_value(doc["spec"], args.scenario)
        loads = doc.get("N")
        if loads is None:
            raise DomainError(f"scenario {args.scenario} is missing 'N'")
        loads = loads if isinstance(loads, list) else [loads]
        try:
            grid = [int(n) for n in loads]
        except (TypeError, ValueError) as exc:
            raise DomainError(f"scenario {args.scenario} has a non-integer N") from exc
        trials = doc.get("trials", args.trials)
        seed = doc.get("master_seed", args.seed)
        if not isinstance(trials, int) or not isinstance(seed, int):
            raise DomainError("scenario trials and master_seed must be integers")
    else:
        if not args.spec:
            raise DomainError("simulate needs --scenario FILE or --spec SPEC")
        spec = load_spec(args.spec)
        grid = parse_n_range(args.n_range) if args.n_range else _default_grid(codebook_size(spec))
        trials, seed = args.trials, args.seed
    rows = _simulate_rows(spec, grid, trials, seed, args.workers)
    _write_outputs(
        Path(args.out), "simulate",
        {"spec": spec.describe(), "n_range": _grid_parameter(grid), "trials": trials},
        seed, started,
        {"simulate.csv": lambda p: write_csv(p, _SIMULATE_HEADER, rows)},
    )
    return 0


def cmd_inspect_chain(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    spec = load_spec(args.spec)
    # size the state space from the budgets before materializing anything
    prospective = math.prod(b + 1 for b in spec.budgets) - 1
    if prospective > DUMP_STATE_CAP:
        raise StateSpaceTooLarge(
            f"{prospective} states exceed the dump cap of {DUMP_STATE_CAP}"
        )
    model = build_transition_model(spec)
    header, rows = chain_dump(model)
    _write_outputs(
        Path(args.out), "inspect-chain",
        {"spec": spec.describe()},
        None, started,
        {"chain.csv": lambda p: write_csv(p, header, rows)},
    )
    return 0


def cmd_thresholds(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    full_size = (args.preambles + 1) ** args.length - 1
    grid = (parse_n_range(args.n_range) if args.n_range
            else _default_grid(full_size))
    candidates = default_candidates(
        args.length, args.preambles, grid, args.reference_preambles
    )
    schedule = threshold_schedule(candidates)
    rows = []
    for seg in schedule.segments:
        rows.append([
            str(seg.n_low),
            str(seg.n_high),
            seg.spec.mode.value,
            "|".join(str(b) for b in seg.spec.budgets),
            str(codebook_size(seg.spec)),
            format_float(seg.efficiency_low),
            format_float(seg.efficiency_high),
        ])
    header = ["N_low", "N_high", "mode", "budgets", "cardinality",
              "efficiency_low", "efficiency_high"]
    _write_outputs(
        Path(args.out), "thresholds",
        {
            "length": args.length,
            "preambles": args.preambles,
            "reference_preambles": args.reference_preambles,
            "n_range": _grid_parameter(grid),
        },
        None, started,
        {"thresholds.csv": lambda p: write_csv(p, header, rows)},
    )
    return 0


def cmd_reproduce(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    figure = args.figure
    trials = args.trials
    seed = args.seed
    csv_files: dict[str, Callable[[Path], None]] = {}
    plot_curves: list[tuple[str, Sequence[float], Sequence[float]]] = []

    def add_curve(name: str, label: str, spec: CodebookSpec, grid: list[int]) -> None:
        curve = efficiency_curve(spec, grid)
        rows = [[str(n), format_float(e)] for n, e in curve]
        csv_files[f"{figure}_{name}.csv"] = (
            lambda p, r=rows: write_csv(p, ["N", "efficiency"], r)
        )
        plot_curves.append((label, [n for n, _ in curve], [e for _, e in curve]))

    if figure == "comparison":
        grid = parse_n_range(args.n_range) if args.n_range else _default_grid(8)
        add_curve("reference", "reference, M=2", CodebookSpec.reference(2, 2), grid)
        add_curve("expanded", "code-expanded, M=2", CodebookSpec.expanded((2, 2)), grid)
        mc_rows = _simulate_rows(CodebookSpec.expanded((2, 2)), grid, trials, seed,
                                 args.workers)
        csv_files[f"{figure}_montecarlo.csv"] = (
            lambda p: write_csv(p, _SIMULATE_HEADER, mc_rows)
        )
        plot_curves.append((
            "code-expanded, Monte Carlo",
            [float(r[0]) for r in mc_rows],
            [float(r[4]) for r in mc_rows],
        ))
        parameters = {"figure": figure, "n_range": _grid_parameter(grid), "trials": trials}
    elif figure in ("adaptive-l2m4", "adaptive-l4m4"):
        length = 2 if figure == "adaptive-l2m4" else 4
        m = 4
        full = (m + 1) ** length - 1
        grid = parse_n_range(args.n_range) if args.n_range else _default_grid(full)
        seed = None
        add_curve("reference", f"reference, M={m}",
                  CodebookSpec.reference(m, length), grid)
        candidates = default_candidates(length, m, grid)
        for spec in candidates.candidates[1:]:
            size = codebook_size(spec)
            add_curve(f"card{size}", f"code-expanded, {size} codewords", spec, grid)
        parameters = {"figure": figure, "n_range": _grid_parameter(grid)}
    elif figure == "application-l4":
        grid = parse_n_range(args.n_range) if args.n_range else _default_grid(624)
        seed = None
        add_curve("reference", "reference, M=32", CodebookSpec.reference(32, 4), grid)
        add_curve("m3", "code-expanded, M=3", CodebookSpec.expanded((3,) * 4), grid)
        add_curve("m4", "code-expanded, M=4", CodebookSpec.expanded((4,) * 4), grid)
        parameters = {"figure": figure, "n_range": _grid_parameter(grid)}
    else:  # pragma: no cover - argparse choices reject unknown ids first
        raise DomainError(f"unknown figure id {figure!r}")

    csv_files[f"{figure}.svg"] = lambda p: svg_line_plot(
        p, plot_curves, figure, "contending users N", "efficiency"
    )
    _write_outputs(Path(args.out), "reproduce", parameters, seed, started, csv_files,
                   manifest_name=f"{figure.replace('-', '_')}_manifest.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codexpand",
        description="Contention analysis and planning for code-expanded random access.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, spec: bool = True) -> None:
        if spec:
            p.add_argument("--spec", help='codebook: "L=2,m=2,2,mode=expanded" or a JSON file')
        p.add_argument("--n-range", help="load grid A, A:B, or A:B:STEP (inclusive)")
        p.add_argument("--out", default=".", help="output directory (default: current)")

    p = sub.add_parser("analyze", help="analytic efficiency curve as CSV")
    add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo batch per load point")
    p.add_argument("--scenario", help="JSON file {spec, N or N-list, trials, master_seed}")
    add_common(p)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inspect-chain", help="dump the observation chain as CSV")
    p.add_argument("--spec", required=True,
                   help='codebook: "L=2,m=2,2,mode=expanded" or a JSON file')
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=cmd_inspect_chain)

    p = sub.add_parser("thresholds", help="load-adaptive codebook schedule as CSV")
    p.add_argument("--length", type=int, required=True, help="sub-frames per virtual frame")
    p.add_argument("--preambles", type=int, required=True, help="preambles per sub-frame")
    p.add_argument("--reference-preambles", type=int, default=None,
                   help="baseline scheme preamble count, when different")
    p.add_argument("--n-range", help="load grid A, A:B, or A:B:STEP (inclusive)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("reproduce", help="regenerate a standard figure (CSV + SVG)")
    p.add_argument("--figure", required=True,
                   choices=["comparison", "adaptive-l2m4", "adaptive-l4m4", "application-l4"])
    p.add_argument("--n-range", help="override the figure's default load grid")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StateSpaceTooLarge, SizeExceedsCap, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InputParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, CodexpandError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
