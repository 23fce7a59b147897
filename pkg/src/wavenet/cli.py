"""``wavenet`` command line: solve instance files, run oracles, export plot data.

Exit codes: 0 success (oracle match or oracle skipped), 1 usage or parse
error, 2 oracle mismatch, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from wavenet import instances, kp, npp, oracles, tsp
from wavenet.errors import InvalidInstance, InvalidSignal, OracleTooLarge, WavenetError
from wavenet.signal import TimeFreqMap, format_timefreq_csv, timefreq_rows

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_INTERNAL = 3

REPORT_NAME = "report.json"
TIMING_NAME = "timing.json"
TIMEFREQ_NAME = "timefreq.csv"
DEFAULT_OUT = "wavenet-out"


@dataclass(frozen=True)
class RunConfig:
    instance_path: Path
    mode: str = "shift"
    oracle: bool = True
    paranoid: bool = False
    cross_check: bool = False
    threshold: float | None = None
    sample_rate: int | None = None
    seed: int = 0
    out_dir: Path | None = None
    inject_mismatch: bool = False

    def to_dict(self) -> dict:
        # paths and fault injection stay out so reports from any directory compare equal
        return {
            "mode": self.mode,
            "paranoid": self.paranoid,
            "cross_check": self.cross_check,
            "threshold": self.threshold,
            "sample_rate": self.sample_rate,
            "seed": self.seed,
        }


@dataclass
class SolveReport:
    problem: str
    optimum: int
    witness: list
    epochs: list[dict]
    runs: int
    details: dict
    timefreq: dict
    oracle: dict | None
    timing: dict[str, float] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    instance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.oracle is not None and self.oracle.get("ran") and not self.oracle["match"]:
            return EXIT_MISMATCH
        return EXIT_OK

    def to_json(self) -> dict:
        """Everything except wall-clock timing, which lives in its own file."""
        return {
            "problem": self.problem,
            "instance": self.instance,
            "config": self.config,
            "optimum": self.optimum,
            "witness": self.witness,
            "runs": self.runs,
            **self.details,
            "epochs": self.epochs,
            "oracle": self.oracle,
            "artifacts": self.artifacts,
            "timefreq": self.timefreq,
        }


def _tf_payload(tfm: TimeFreqMap, threshold: float) -> dict:
    rows = timefreq_rows(tfm, threshold)
    return {
        "stride": tfm.stride,
        "window_len": tfm.window_len,
        "threshold": threshold,
        "rows": [list(r) for r in rows],
    }


def _oracle(instance: instances.ProblemInstance) -> oracles.OracleResult:
    if isinstance(instance, npp.NppInstance):
        return oracles.npp_bruteforce(instance.weights)
    if isinstance(instance, kp.KpInstance):
        return oracles.kp_dp(instance.weights, instance.values, instance.capacity)
    return oracles.tsp_held_karp(instance.dist)


def _oracle_dict(res: oracles.OracleResult) -> dict:
    return {"optimum": res.optimum, "witness": list(res.witness), "method": res.method.value}


def _solve_npp(inst: npp.NppInstance, cfg: RunConfig) -> tuple[int, list, list, int, dict, dict]:
    run = npp.solve(inst, paranoid=cfg.paranoid, threshold=cfg.threshold, sample_rate=cfg.sample_rate)
    sol = run.solution
    a, b = sol.subsets(inst.weights)
    epochs = [
        {"node": e.node, "merged_weight": e.merged_weight, "peak_present": e.peak_present, "sign": e.sign}
        for e in sol.epochs
    ]
    details = {"d_min": sol.d_min, "signs": list(sol.signs), "subset_a": a, "subset_b": b}
    return sol.d_min, list(sol.signs), epochs, sol.runs, details, _tf_payload(run.timefreq, run.threshold)


def _solve_kp(inst: kp.KpInstance, cfg: RunConfig) -> tuple[int, list, list, int, dict, dict]:
    run = kp.solve(inst, cfg.mode, threshold=cfg.threshold, sample_rate=cfg.sample_rate)
    sol = run.solution
    epochs = [{"item": e.item, "hit": e.hit, "included": e.included} for e in sol.epochs]
    details = {"v_max": sol.v_max, "items": list(sol.items), "arrival": sol.arrival, "ct": run.ct}
    return sol.v_max, list(sol.items), epochs, sol.runs, details, _tf_payload(run.timefreq, run.threshold)


def _solve_tsp(inst: tsp.TspInstance, cfg: RunConfig) -> tuple[int, list, list, int, dict, dict]:
    run = tsp.solve(
        inst,
        cross_check=cfg.cross_check,
        seed=cfg.seed,
        threshold=cfg.threshold,
        sample_rate=cfg.sample_rate,
    )
    sol = run.solution
    epochs = [
        {"edge": list(e.edge), "length": e.length, "hit": e.hit, "removed": e.removed}
        for e in sol.epochs
    ]
    details = {
        "d_opt": sol.d_opt,
        "cycle": list(sol.cycle),
        "t_0": run.t_0,
        "horizon": run.horizon,
        "plan": run.plan.to_dict(),
        "perturbed": run.perturbed,
        "cross_check": run.cross_check,
    }
    return sol.d_opt, list(sol.cycle), epochs, sol.runs, details, _tf_payload(run.timefreq, run.threshold)


def solve(cfg: RunConfig) -> SolveReport:
    """Parse, solve, check against the oracle and write the report files."""
    timing: dict[str, float] = {}
    t0 = time.perf_counter()
    inst = instances.parse_instance(cfg.instance_path)
    timing["parse"] = time.perf_counter() - t0
    kind = instances.problem_kind(inst)

    t0 = time.perf_counter()
    if kind == "npp":
        out = _solve_npp(inst, cfg)
    elif kind == "knapsack":
        out = _solve_kp(inst, cfg)
    else:
        out = _solve_tsp(inst, cfg)
    timing["wave"] = time.perf_counter() - t0
    optimum, witness, epochs, runs, details, tf = out

    oracle_info = None
    if cfg.oracle:
        t0 = time.perf_counter()
        try:
            res = _oracle(inst)
        except OracleTooLarge as exc:
            oracle_info = {"ran": False, "reason": str(exc)}
        else:
            expected = res.optimum + (1 if cfg.inject_mismatch else 0)
            oracle_info = {"ran": True, **_oracle_dict(res), "match": optimum == expected}
            oracle_info["optimum"] = expected
        timing["oracle"] = time.perf_counter() - t0

    report = SolveReport(
        problem=kind,
        optimum=optimum,
        witness=witness,
        epochs=epochs,
        runs=runs,
        details=details,
        timefreq=tf,
        oracle=oracle_info,
        timing=timing,
        instance=instances.to_dict(inst),
        config=cfg.to_dict(),
    )
    if cfg.out_dir is not None:
        write_report(report, cfg.out_dir)
    return report


# ---------------------------------------------------------------------------
# output


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_text(report: SolveReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=False) + "\n"


def timefreq_csv(payload: dict) -> str:
    return format_timefreq_csv([tuple(r) for r in payload.get("rows", [])])


def write_report(report: SolveReport, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    report.artifacts = {"timefreq": TIMEFREQ_NAME, "timing": TIMING_NAME}
    atomic_write(out_dir / TIMEFREQ_NAME, timefreq_csv(report.timefreq))
    atomic_write(out_dir / TIMING_NAME, json.dumps(report.timing, indent=2, sort_keys=True) + "\n")
    atomic_write(out_dir / REPORT_NAME, report_text(report))


def export_timefreq(report: dict | SolveReport, path: str | Path) -> Path:
    payload = report.timefreq if isinstance(report, SolveReport) else report.get("timefreq", {})
    path = Path(path)
    atomic_write(path, timefreq_csv(payload or {}))
    return path


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavenet", description="Wave-network solvers for NPP, 0/1 knapsack and TSP.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance file and write report.json")
    s.add_argument("instance", type=Path)
    s.add_argument("--mode", choices=kp.MODES, default="shift", help="knapsack tone mode")
    s.add_argument("--no-oracle", action="store_true", help="skip the classical cross-check")
    s.add_argument("--paranoid", action="store_true", help="NPP: re-check every minus sign")
    s.add_argument("--cross-check", action="store_true", help="TSP: confirm t_0 with two random plans")
    s.add_argument("--threshold", type=float, help="override the peak threshold")
    s.add_argument("--sample-rate", type=int, help="override the sample rate")
    s.add_argument("--seed", type=int, default=0, help="seed for randomized frequency plans")
    s.add_argument("--out", type=Path, help=f"output directory (default $WAVENET_OUT or ./{DEFAULT_OUT})")
    s.add_argument("--inject-oracle-mismatch", action="store_true", help=argparse.SUPPRESS)

    o = sub.add_parser("oracle", help="run the classical solver only")
    o.add_argument("instance", type=Path)

    e = sub.add_parser("export", help="write plot data from a report")
    e.add_argument("report", type=Path)
    e.add_argument("--what", choices=("timefreq",), default="timefreq")
    e.add_argument("--out", type=Path, help="CSV path (default: timefreq.csv beside the report)")
    return p


def _default_out() -> Path:
    return Path(os.environ.get("WAVENET_OUT") or DEFAULT_OUT)


def _fail(code: int, exc: BaseException) -> int:
    where = f" at epoch {exc.epoch}" if getattr(exc, "epoch", None) is not None else ""
    print(f"wavenet: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
    return code


def _cmd_solve(args: argparse.Namespace) -> int:
    if args.threshold is not None and not args.threshold > 0:
        print("wavenet: --threshold must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.sample_rate is not None and args.sample_rate < 1:
        print("wavenet: --sample-rate must be positive", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(
        instance_path=args.instance,
        mode=args.mode,
        oracle=not args.no_oracle,
        paranoid=args.paranoid,
        cross_check=args.cross_check,
        threshold=args.threshold,
        sample_rate=args.sample_rate,
        seed=args.seed,
        out_dir=args.out or _default_out(),
        inject_mismatch=args.inject_oracle_mismatch,
    )
    report = solve(cfg)
    summary = {"problem": report.problem, "optimum": report.optimum, "witness": report.witness}
    if report.oracle is not None:
        summary["oracle_match"] = report.oracle.get("match")
    summary["report"] = str(cfg.out_dir / REPORT_NAME)
    print(json.dumps(summary))
    if report.exit_code == EXIT_MISMATCH:
        print(
            f"wavenet: oracle mismatch: wave {report.optimum} vs oracle {report.oracle['optimum']}",
            file=sys.stderr,
        )
    return report.exit_code


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = instances.parse_instance(args.instance)
    res = _oracle(inst)
    print(json.dumps({"problem": instances.problem_kind(inst), **_oracle_dict(res)}))
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    report = json.loads(args.report.read_text())
    target = args.out or args.report.parent / TIMEFREQ_NAME
    print(export_timefreq(report, target))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers: dict[str, Any] = {"solve": _cmd_solve, "oracle": _cmd_oracle, "export": _cmd_export}
    try:
        return handlers[args.command](args)
    except (InvalidInstance, InvalidSignal, OracleTooLarge, ValueError) as exc:
        return _fail(EXIT_USAGE, exc)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_USAGE, exc)
    except WavenetError as exc:
        return _fail(EXIT_INTERNAL, exc)


if __name__ == "__main__":
    sys.exit(main())
