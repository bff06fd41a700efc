"""Command-line front end.

    bangbang solve  [scenario flags]
    bangbang sample [scenario flags] [--samples N] [--out FILE]
    bangbang sweep  [scenario flags] --sweep PARAM=V1,V2,... --out DIR

Exit status is 0 on success, 2 when the requested problem is infeasible and
1 on invalid input or any other error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .arc import ArcInput, DragParams
from .errors import BangBangError, InfeasibleProblemError, InvalidInputError
from .ocp import (
    BangBangProblem,
    Verdict,
    envelope_samples,
    feasibility,
    sample_trajectory,
    solve,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

CSV_HEADER = ("s", "t", "v", "a", "phase")
SUMMARY_HEADER = ("param", "value", "verdict", "s_sigma", "T", "vf_min", "vf_max")
SWEEP_PARAMETERS = ("c0", "c1", "a_plus", "a_minus")
DEFAULT_SAMPLES = 400


@dataclass(frozen=True)
class ScenarioConfig:
    v0: float = 6.0
    vf: float = 5.0
    length: float = 100.0
    a_plus: float = 2.0
    a_minus: float = 2.0
    c0: float = 0.01
    c1: float = 0.01
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.samples < 2:
            raise InvalidInputError("samples must be at least 2")
        self.problem()  # validates the remaining fields

    def problem(self) -> BangBangProblem:
        return BangBangProblem(
            v_i=self.v0,
            v_f=self.vf,
            length=self.length,
            a_plus=self.a_plus,
            a_minus=self.a_minus,
            drag=DragParams(self.c0, self.c1),
        )


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise InvalidInputError(
                f"cannot sweep {self.parameter!r}; choose one of {', '.join(SWEEP_PARAMETERS)}"
            )
        if not self.values:
            raise InvalidInputError("a sweep needs at least one value")
        for value in self.values:
            bad = value < 0.0 if self.parameter in ("c0", "c1") else value <= 0.0
            if bad or not math.isfinite(value):
                raise InvalidInputError(f"inadmissible value {value!r} for {self.parameter}")

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        name, sep, rest = text.partition("=")
        if not sep:
            raise InvalidInputError(f"expected PARAM=V1,V2,..., got {text!r}")
        try:
            values = tuple(float(tok) for tok in rest.split(",") if tok.strip())
        except ValueError as exc:
            raise InvalidInputError(f"bad sweep value list {rest!r}") from exc
        return cls(name.strip().replace("-", "_"), values)

    def configs(self, base: ScenarioConfig):
        for value in self.values:
            yield value, dataclasses.replace(base, **{self.parameter: value})


def _fmt(x: float) -> str:
    return format(x + 0.0, ".12g")  # + 0.0 maps -0.0 to 0.0


def write_samples_csv(rows, stream, phase_prefix: str = "") -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow((_fmt(r.s), _fmt(r.t), _fmt(r.v), _fmt(r.a), phase_prefix + r.phase.value))


def read_samples_csv(path):
    """Parse a file written by :func:`write_samples_csv` into dicts."""
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            rec = {k: float(row[k]) for k in ("s", "t", "v", "a")}
            rec["phase"] = row["phase"]
            out.append(rec)
        return out


def cmd_solve(config: ScenarioConfig, out=None) -> int:
    out = out or sys.stdout
    problem = config.problem()
    feas = feasibility(problem)
    lines = [("verdict", feas.verdict.value), ("vf_min", feas.vf_min), ("vf_max", feas.vf_max)]
    status = EXIT_INFEASIBLE
    if feas.verdict is Verdict.FEASIBLE:
        sol = solve(problem)
        lines += [("s_sigma", sol.s_sigma), ("t_sigma", sol.t_sigma), ("T", sol.total_time)]
        status = EXIT_OK
    for name, value in lines:
        text = value if isinstance(value, str) else format(value, ".15g")
        out.write(f"{name:<8} {text:>22}\n")
    return status


def cmd_sample(config: ScenarioConfig, path=None) -> int:
    sol = solve(config.problem())
    rows = sample_trajectory(sol, config.samples)
    if path is None or str(path) == "-":
        write_samples_csv(rows, sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            write_samples_csv(rows, fh)
    return EXIT_OK


def _sweep_one(config: ScenarioConfig, target: Path):
    problem = config.problem()
    feas = feasibility(problem)
    with open(target, "w", newline="") as fh:
        if feas.verdict is Verdict.FEASIBLE:
            sol = solve(problem)
            write_samples_csv(sample_trajectory(sol, config.samples), fh)
            return feas, sol
        write_samples_csv(envelope_samples(problem, config.samples), fh, phase_prefix="envelope_")
        return feas, None


def cmd_sweep(base: ScenarioConfig, sweep: SweepSpec, out_dir) -> list[dict]:
    """Run every sweep value, write per-value CSVs and ``summary.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for value, cfg in sweep.configs(base):
        feas, sol = _sweep_one(cfg, out_dir / f"{sweep.parameter}_{value:g}.csv")
        summary.append({
            "param": sweep.parameter,
            "value": _fmt(value),
            "verdict": feas.verdict.value,
            "s_sigma": _fmt(sol.s_sigma) if sol else "",
            "T": _fmt(sol.total_time) if sol else "",
            "vf_min": _fmt(feas.vf_min),
            "vf_max": _fmt(feas.vf_max),
        })
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(summary)
    return summary


def cmd_oracle(args, out=None) -> int:
    out = out or sys.stdout
    from . import oracle

    inp = ArcInput(args.a, args.v0, DragParams(args.c0, args.c1))
    settings = oracle.OracleSettings(args.rtol, args.rtol)
    if args.zeta is not None:
        out.write(f"t {oracle.locate_space_event(inp, args.zeta, settings):.15g}\n")
    else:
        v, s = oracle.integrate_arc(inp, args.t, settings)
        out.write(f"v {v:.15g}\ns {s:.15g}\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_scenario(p: argparse.ArgumentParser, samples: bool = False) -> None:
    d = ScenarioConfig()
    g = p.add_argument_group("scenario")
    g.add_argument("--v0", type=float, default=d.v0, help="initial speed [m/s] (default %(default)s)")
    g.add_argument("--vf", type=float, default=d.vf, help="final speed [m/s] (default %(default)s)")
    g.add_argument("--length", type=float, default=d.length, help="path length [m] (default %(default)s)")
    g.add_argument("--a-plus", type=float, default=d.a_plus, help="max acceleration [m/s^2]")
    g.add_argument("--a-minus", type=float, default=d.a_minus, help="max deceleration [m/s^2]")
    g.add_argument("--c0", type=float, default=d.c0, help="linear drag coefficient [1/s]")
    g.add_argument("--c1", type=float, default=d.c1, help="quadratic drag coefficient [1/m]")
    if samples:
        g.add_argument("--samples", type=int, default=d.samples, help="rows per curve (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bangbang", description="Minimum-time bang-bang speed profiles with drag.")
    sub = parser.add_subparsers(dest="command", metavar="{solve,sample,sweep}", required=True)

    p = sub.add_parser("solve", help="solve one scenario and print the switch and travel time")
    _add_scenario(p)

    p = sub.add_parser("sample", help="write the optimal trajectory as CSV")
    _add_scenario(p, samples=True)
    p.add_argument("--out", default="-", help="output file (default stdout)")

    p = sub.add_parser("sweep", help="vary one parameter, write per-value CSVs and summary.csv")
    _add_scenario(p, samples=True)
    p.add_argument("--sweep", required=True, metavar="PARAM=V1,V2,...",
                   help=f"parameter to vary, one of {', '.join(SWEEP_PARAMETERS)}")
    p.add_argument("--out", required=True, help="output directory")

    # debugging aid; deliberately left out of the help text
    p = sub.add_parser("oracle")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--c0", type=float, default=0.0)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--rtol", type=float, default=1e-12)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--t", type=float)
    which.add_argument("--zeta", type=float)
    return parser


def _config(args) -> ScenarioConfig:
    return ScenarioConfig(
        v0=args.v0, vf=args.vf, length=args.length, a_plus=args.a_plus, a_minus=args.a_minus,
        c0=args.c0, c1=args.c1, samples=getattr(args, "samples", DEFAULT_SAMPLES),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle":
            return cmd_oracle(args)
        config = _config(args)
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "sample":
            return cmd_sample(config, args.out)
        cmd_sweep(config, SweepSpec.parse(args.sweep), args.out)
        return EXIT_OK
    except InfeasibleProblemError as exc:
        print(f"bangbang: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BangBangError, ValueError) as exc:
        print(f"bangbang: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
