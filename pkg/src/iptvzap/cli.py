"""Command-line entry point: ``iptvzap {simulate,analyze,sweep,reproduce}``.

Every flag can also be set in a ``key=value`` config file (``--config``)
using the flag name without dashes, e.g. ``gop-ms=1000``. Flags given on the
command line win over the file. ``IPTVZAP_OUT`` sets the output directory
when neither ``--out`` nor the config file does.

Exit codes: 0 success, 2 usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .engine import ScenarioConfig, run_scenario
from .exceptions import ParameterError
from .experiments import EXHIBITS, TABLE1_FIELDS, Runner, reproduce, sweep, table1_rows
from .report import SUMMARY_FIELDS, emit_cdf, emit_summary, write_csv, write_json

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
OUT_ENV = "IPTVZAP_OUT"
DEFAULT_OUT = "results"

# flag -> (config field, default, help)
FLAGS = {
    "channels": ("session_count", "100", "number of sessions N"),
    "shape": ("shape", "1.0", "Zipf shape parameter s"),
    "gop-ms": ("gop_ms", "1000", "GOP duration in ms"),
    "sep": ("separation", "4", "separation S = GOP / time shift"),
    "wait": ("max_wait", "4", "maximum wait window (presses)"),
    "ordering": ("ordering", "one-step", "network grid: identity, one-step, two-step"),
    "client-ordering": ("client_ordering", "same", "client grid: same or randomized"),
    "shifts": ("shifts", "laddered", "key-frame phases: laddered or randomized"),
    "dwell": ("dwell", "uniform-gop", "dwell before the next press: zero, fixed:<ms>, uniform-gop"),
    "events": ("event_budget", "1000000", "switch events per scenario"),
    "seed": ("master_seed", "0", "master seed"),
    "pool": ("pool_size", "64", "randomized grids / shift draws per scenario"),
}
EXTRA_FLAGS = {
    "out": (None, "results directory (or $IPTVZAP_OUT)"),
    "bins-ms": ("10", "CDF / histogram bin width in ms"),
    "threads": ("1", "worker processes"),
}
INT_FIELDS = {"session_count", "separation", "max_wait", "event_budget", "master_seed", "pool_size"}
FLOAT_FIELDS = {"shape", "gop_ms"}
LIST_FLAGS = {"analyze": {"channels", "ordering"}, "sweep": {"channels", "sep", "wait"}}


class UsageError(Exception):
    pass


def read_config_file(path) -> dict[str, str]:
    known = set(FLAGS) | set(EXTRA_FLAGS)
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag, (_, default, text) in FLAGS.items():
        common.add_argument(f"--{flag}", default=None, help=f"{text} (default: {default})")
    for flag, (default, text) in EXTRA_FLAGS.items():
        shown = DEFAULT_OUT if flag == "out" else default
        common.add_argument(f"--{flag}", default=None, help=f"{text} (default: {shown})")
    common.add_argument("--config", default=None, help="key=value config file")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(
        prog="iptvzap",
        description="Channel-change latency under time-shifted key frames and dynamic reordering.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run one scenario against its baseline")
    sub.add_parser("analyze", parents=[common],
                   help="exact expected switch counts (comma lists allowed for channels/ordering)")
    sub.add_parser("sweep", parents=[common],
                   help="scenario grid over comma lists of channels/sep/wait")
    rep = sub.add_parser("reproduce", parents=[common], help="regenerate one published exhibit")
    rep.add_argument("exhibits", nargs="+", metavar="ID",
                     help=f"one or more of: {', '.join(EXHIBITS)}, or all")
    return parser


@dataclass
class Invocation:
    command: str
    values: dict[str, str]  # flag -> raw value after merging file and command line
    out_dir: Path
    threads: int
    bins_ms: float
    exhibits: list[str] = field(default_factory=list)


def resolve(args: argparse.Namespace) -> Invocation:
    values = {flag: default for flag, (_, default, _) in FLAGS.items()}
    values.update({flag: default for flag, (default, _) in EXTRA_FLAGS.items()})
    if args.config:
        values.update(read_config_file(args.config))
    for flag in list(FLAGS) + list(EXTRA_FLAGS):
        given = getattr(args, flag.replace("-", "_"))
        if given is not None:
            values[flag] = given
    out = values.pop("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT
    try:
        threads = int(values.pop("threads"))
        bins_ms = float(values.pop("bins-ms"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    if not bins_ms > 0:
        raise UsageError("--bins-ms must be positive")
    lists = LIST_FLAGS.get(args.command, set())
    for flag, raw in values.items():
        if "," in raw and flag not in lists:
            raise UsageError(f"--{flag} takes a single value for {args.command}")
    exhibits = list(getattr(args, "exhibits", []) or [])
    if exhibits == ["all"]:
        exhibits = list(EXHIBITS)
    bad = [e for e in exhibits if e not in EXHIBITS]
    if bad:
        raise UsageError(f"unknown exhibit(s) {', '.join(bad)}; valid: {', '.join(EXHIBITS)}")
    return Invocation(args.command, values, Path(out), threads, bins_ms, exhibits)


def to_config(values: dict[str, str], **overrides) -> ScenarioConfig:
    kwargs = {}
    for flag, (name, _, _) in FLAGS.items():
        raw = overrides.get(flag, values[flag])
        try:
            if name in INT_FIELDS:
                kwargs[name] = int(raw)
            elif name in FLOAT_FIELDS:
                kwargs[name] = float(raw)
            else:
                kwargs[name] = raw
        except ValueError:
            raise UsageError(f"--{flag}: invalid value {raw!r}") from None
    try:
        return ScenarioConfig(**kwargs)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _split(raw: str) -> list[str]:
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def cmd_simulate(inv: Invocation) -> list[Path]:
    config = to_config(inv.values)
    stats = run_scenario(config, threads=inv.threads, bin_ms=inv.bins_ms)
    baseline = stats if config.max_wait == 1 else run_scenario(
        config.with_(max_wait=1), threads=inv.threads, bin_ms=inv.bins_ms)
    record = emit_summary(config, stats, baseline)
    written = [write_csv(inv.out_dir / "summary.csv", SUMMARY_FIELDS, [record]),
               write_json(inv.out_dir / "summary.json", record),
               write_csv(inv.out_dir / "cdf.csv", ("upper_ms", "cumulative_fraction"),
                         emit_cdf(stats, inv.bins_ms))]
    print(f"mean wait {record['mean_wait_ms']:.1f} ms, "
          f"<=250 ms {100 * record['fraction_le_250ms']:.1f}%, "
          f"switches {record['mean_switches']:.3f}, "
          f"improvement {record['improvement_pct']:.1f}%, overhead {record['overhead_pct']:.2f}%")
    return written


def cmd_analyze(inv: Invocation) -> list[Path]:
    try:
        counts = [int(tok) for tok in _split(inv.values["channels"])]
        shape = float(inv.values["shape"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    orderings = _split(inv.values["ordering"])
    for n in counts:
        if n < 2:
            raise UsageError("--channels values must be >= 2")
    try:
        rows = table1_rows(counts, orderings, shape)
    except (ParameterError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    for row in rows:
        print(f"{row['ordering']:>9} N={row['session_count']:<5} "
              f"E[D_S]={row['expected_switches']:.4f}")
    return [write_csv(inv.out_dir / "table1.csv", TABLE1_FIELDS, rows)]


def cmd_sweep(inv: Invocation) -> list[Path]:
    runner = Runner(threads=inv.threads, bin_ms=inv.bins_ms)
    try:
        seps = [int(v) for v in _split(inv.values["sep"])]
        waits = [int(v) for v in _split(inv.values["wait"])]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows, header = [], None
    for n in _split(inv.values["channels"]):
        for sep in seps:
            for w in waits:
                to_config(inv.values, channels=n, sep=str(sep), wait=str(w))
        base = to_config(inv.values, channels=n, sep=str(seps[0]), wait=str(waits[0]))
        result = sweep(runner, base, None, seps, waits)
        header = result.header()
        for row in result.rows():
            rows.append(row)
    return [write_csv(inv.out_dir / "sweep.csv", header, rows)]


def cmd_reproduce(inv: Invocation) -> list[Path]:
    base = to_config(inv.values)
    runner = Runner(threads=inv.threads, bin_ms=inv.bins_ms)
    written = []
    for exhibit in inv.exhibits:
        paths = reproduce(exhibit, base, inv.out_dir, runner, bin_ms=inv.bins_ms)
        for path in paths:
            print(f"{exhibit}: wrote {path}")
        written.extend(paths)
    return written


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "sweep": cmd_sweep,
            "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s")
    try:
        inv = resolve(args)
        COMMANDS[inv.command](inv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"iptvzap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParameterError, RuntimeError) as exc:
        print(f"iptvzap: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
