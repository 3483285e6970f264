# This file is part of disentanglement
#
# MIT License

"""Batch command line: ``measure``, ``protocol``, ``verify`` and ``sweep``.

States are named ``family[:p1,p2,...]`` (``bell``, ``werner:0.9``,
``isotropic:0.5,3``, ``ghz:3`` or ``ghz3``, ``maxcorr:2``, ``markov:SEED``,
``random:SEED,2x3[,RANK]``) or read from ``file:PATH``. Exit codes: 0 on
success, 1 on bad input, 2 on solver or dimension failures and failed
certifications.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Mapping, Optional, Sequence

from .convexsplit import verify_lemma
from .divergences import d_max, mutual_information, smooth_d_max, smooth_max_entropy, von_neumann_entropy
from .errors import DisentanglementError, ProtocolError, SolverError, StateError, StateErrorKind, StateFileError
from .models import (
    DEFAULT_CONFIG,
    ApproxMode,
    Command,
    OutputFormat,
    ProtocolReport,
    RunConfig,
    SepApprox,
    SolverConfig,
    VerifyTarget,
)
from .protocol import one_shot_cost_search, product_target, verify_theorem
from .qmatrix import DensityOperator, make_state
from .recovery import appendix_converse_check, markov_state, simulate_recovery_degrading
from .separability import e_max_smooth, ree
from .statefile import load_state
from .subsystems import default_cut
from .utils import atomic_write, format_float, render_csv, render_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILURE = 2

THM1_COLUMNS = (
    "state_id", "eps", "delta", "M", "log2_M", "lower_bits", "upper_bits",
    "achieved_distance", "approx_mode", "pass",
)
RECOVERY_COLUMNS = (*THM1_COLUMNS, "rec_value_bits", "cmi_bits", "petz_distance")
LEMMA_COLUMNS = (
    "rho_id", "sigma_id", "zeta", "xi", "N", "dmax_bits", "measured_P", "bound", "pass",
    "smoothed_P", "monotone",
)
APPENDIX_COLUMNS = ("state_id", "M", "holds", "slack")
RECOVERY_GRID = ("ghz3", "markov:0")


def parse_state_spec(spec: str) -> DensityOperator:
    """Resolve a named family or ``file:PATH``."""
    family, _, rest = spec.partition(":")
    family = family.strip().lower()
    if family == "file":
        return load_state(rest)
    if family == "ghz3" and not rest:
        return make_state("ghz", 3)
    fields = [f.strip() for f in rest.split(",")] if rest else []
    try:
        if family == "markov":
            return markov_state(int(fields[0]) if fields else 0)
        if family == "random":
            if len(fields) < 2:
                raise StateError(StateErrorKind.BAD_PARAMETER, "random needs SEED,DIMS[,RANK]")
            local = [int(d) for d in fields[1].lower().split("x")]
            rank = int(fields[2]) if len(fields) > 2 else None
            return make_state("random", int(fields[0]), *local, rank=rank)
        return make_state(family, *(float(f) for f in fields))
    except ValueError as exc:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"bad state spec {spec!r}") from exc


def parse_grid(spec: str) -> tuple[str, list[float]]:
    """``[name=]start:stop:step`` with an inclusive stop; the name defaults to ``param``."""
    name, sep, body = spec.partition("=")
    if not sep:
        name, body = "param", spec
    name = name.strip().lower()
    if name not in ("param", "p", "eps", "delta"):
        raise StateError(StateErrorKind.BAD_PARAMETER, f"unknown grid parameter {name!r}")
    try:
        start, stop, step = (float(x) for x in body.split(":"))
    except ValueError as exc:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"bad grid {spec!r}") from exc
    if step <= 0 or stop < start:
        return name, []
    count = math.floor((stop - start) / step + 1e-9) + 1
    return name, [round(start + i * step, 12) for i in range(count)]


def _solver_config(cfg: RunConfig) -> SolverConfig:
    return DEFAULT_CONFIG._replace(fw_tol=cfg.tol, seed=cfg.seed)


def _emit(cfg: RunConfig, records: Sequence[Mapping[str, Any]], columns: Sequence[str], single: bool = False) -> None:
    if cfg.fmt is OutputFormat.CSV:
        text = render_csv(records, columns)
    else:
        text = render_json(records[0] if single and records else records)
    if cfg.out_path:
        atomic_write(cfg.out_path, text)
    else:
        sys.stdout.write(text)


def measure_record(s: DensityOperator, eps: float, approx: ApproxMode, config: SolverConfig) -> dict[str, Any]:
    cut = default_cut(s.dims)
    sep = SepApprox(approx)
    entanglement = ree(s, approx=sep, config=config)
    emax = e_max_smooth(s, eps=eps, approx=sep, config=config)
    product = product_target(s)
    return {
        "dims": str(s.dims),
        "entropy_bits": von_neumann_entropy(s),
        "mutual_info_bits": mutual_information(s, cut),
        "ree_bits": entanglement.bits,
        "ree_lower_bits": entanglement.bits if entanglement.dual_bound is None else entanglement.dual_bound,
        "ree_status": entanglement.status,
        "e_max_bits": emax.bits,
        "e_max_lower_bits": emax.bits if emax.dual_bound is None else emax.dual_bound,
        "d_max_product_bits": d_max(s, product).bits,
        "smooth_d_max_product_bits": smooth_d_max(s, product, eps, config).bits,
        "smooth_max_entropy_bits": smooth_max_entropy(s, cut[0], eps, config).bits,
    }


MEASURE_COLUMNS = (
    "state_id", "eps", "dims", "entropy_bits", "mutual_info_bits", "ree_bits", "ree_lower_bits",
    "ree_status", "e_max_bits", "e_max_lower_bits", "d_max_product_bits",
    "smooth_d_max_product_bits", "smooth_max_entropy_bits",
)


def cmd_measure(cfg: RunConfig) -> int:
    if cfg.state_spec is None:
        raise StateError(StateErrorKind.BAD_PARAMETER, "measure needs --state")
    s = parse_state_spec(cfg.state_spec)
    record = {"state_id": cfg.state_spec, "eps": cfg.eps}
    record.update(measure_record(s, cfg.eps, cfg.approx_mode, _solver_config(cfg)))
    _emit(cfg, [record], MEASURE_COLUMNS, single=True)
    return EXIT_OK


def _thm1_record(state_id: str, report: ProtocolReport) -> dict[str, Any]:
    return {
        "state_id": state_id,
        "eps": report.eps_target,
        "delta": report.delta,
        "M": report.M,
        "log2_M": report.log2_M,
        "lower_bits": report.lower_bound_bits,
        "upper_bits": report.upper_bound_bits,
        "achieved_distance": report.achieved_distance,
        "approx_mode": report.approx_mode,
        "pass": report.passed,
    }


def cmd_protocol(cfg: RunConfig) -> int:
    if cfg.state_spec is None:
        raise StateError(StateErrorKind.BAD_PARAMETER, "protocol needs --state")
    s = parse_state_spec(cfg.state_spec)
    report = one_shot_cost_search(s, cfg.eps, cfg.delta, config=_solver_config(cfg))
    record = report.to_record()
    _emit(cfg, [record], list(record), single=True)
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_verify(cfg: RunConfig) -> int:
    config = _solver_config(cfg)
    if cfg.grid not in (None, "default"):
        raise StateError(StateErrorKind.BAD_PARAMETER, f"verify only knows the default grid, got {cfg.grid!r}")
    if cfg.target is VerifyTarget.LEMMA:
        rows = verify_lemma(config=config, threads=cfg.threads)
        records = [{**r._asdict(), "pass": r.passed} for r in rows]
        _emit(cfg, records, LEMMA_COLUMNS)
        return EXIT_OK
    if cfg.target is VerifyTarget.THM1:
        grid = None
        if cfg.state_spec is not None:
            grid = [(cfg.state_spec, parse_state_spec(cfg.state_spec), cfg.eps, cfg.delta)]
        results = verify_theorem(grid, config, cfg.threads)
        _emit(cfg, [_thm1_record(sid, r) for sid, r in results], THM1_COLUMNS)
        return EXIT_OK if all(r.passed for _, r in results) else EXIT_FAILURE
    specs = RECOVERY_GRID if cfg.state_spec is None else (cfg.state_spec,)
    if cfg.target is VerifyTarget.APPENDIX:
        m = 2 if cfg.M is None else cfg.M
        records = []
        for spec in specs:
            holds, slack = appendix_converse_check(parse_state_spec(spec), m, config=config)
            records.append({"state_id": spec, "M": m, "holds": holds, "slack": slack})
        _emit(cfg, records, APPENDIX_COLUMNS)
        return EXIT_OK if all(r["holds"] for r in records) else EXIT_FAILURE

    def run(spec: str) -> dict[str, Any]:
        report = simulate_recovery_degrading(
            parse_state_spec(spec), cfg.M, cfg.eps, cfg.delta, state_id=spec, config=config
        )
        return report.to_record()

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        records = list(pool.map(run, specs))
    _emit(cfg, records, RECOVERY_COLUMNS)
    return EXIT_OK if all(r["pass"] for r in records) else EXIT_FAILURE


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.state_spec is None or cfg.grid is None:
        raise StateError(StateErrorKind.BAD_PARAMETER, "sweep needs --state and --grid")
    name, values = parse_grid(cfg.grid)
    if not values:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"grid {cfg.grid!r} is empty")
    config = _solver_config(cfg)
    state_spec = cfg.state_spec

    def run(value: float) -> dict[str, Any]:
        eps = value if name == "eps" else cfg.eps
        delta = value if name == "delta" else cfg.delta
        spec = f"{state_spec}:{format_float(value)}" if name in ("param", "p") else state_spec
        row: dict[str, Any] = {"param": name, "value": value, "state_id": spec, "eps": eps, "delta": delta}
        try:
            s = parse_state_spec(spec)
            row.update(measure_record(s, eps, cfg.approx_mode, config))
            if name == "delta":
                report = one_shot_cost_search(s, eps, delta, config=config)
                row.update({"M": report.M, "log2_M": report.log2_M, "achieved_distance": report.achieved_distance, "pass": report.passed})
            row["status"] = "ok"
        except DisentanglementError as exc:
            logger.warning("sweep row %s=%s failed: %s", name, value, exc)
            row["status"] = str(exc)
        return row

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        rows = list(pool.map(run, values))
    columns = ["param", "value", *MEASURE_COLUMNS]
    if name == "delta":
        columns[columns.index("eps") + 1 : columns.index("eps") + 1] = ["delta", "M", "log2_M", "achieved_distance", "pass"]
    _emit(cfg, rows, [*columns, "status"])
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAILURE


COMMANDS: dict[Command, Callable[[RunConfig], int]] = {
    Command.MEASURE: cmd_measure,
    Command.PROTOCOL: cmd_protocol,
    Command.VERIFY: cmd_verify,
    Command.SWEEP: cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", dest="state_spec", help="family[:p1,p2], markov:SEED, random:SEED,2x2[,RANK] or file:PATH")
    common.add_argument("--eps", type=float, default=0.1)
    common.add_argument("--delta", type=float, default=0.05)
    common.add_argument("--tol", type=float, default=1e-4, help="Frank-Wolfe gap tolerance")
    common.add_argument("--approx", choices=[m.value for m in ApproxMode], default=ApproxMode.BOTH.value)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", dest="out_path")
    common.add_argument("--format", dest="fmt", choices=[f.value for f in OutputFormat])
    common.add_argument("--threads", type=int)
    common.add_argument("--grid", help="[param|eps|delta=]start:stop:step, or 'default' for verify")
    common.add_argument("--M", type=int, dest="M")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="disentangle", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(Command.MEASURE.value, parents=[common], help="entropies and entanglement measures of a state")
    sub.add_parser(Command.PROTOCOL.value, parents=[common], help="one-shot disentangling cost search")
    verify = sub.add_parser(Command.VERIFY.value, parents=[common], help="verification tables")
    verify.add_argument("target", choices=[t.value for t in VerifyTarget])
    sub.add_parser(Command.SWEEP.value, parents=[common], help="measures over a parameter grid")
    return parser


def to_run_config(ns: argparse.Namespace) -> RunConfig:
    command = Command(ns.command)
    default_fmt = OutputFormat.CSV if command in (Command.VERIFY, Command.SWEEP) else OutputFormat.JSON
    if ns.tol <= 0:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"--tol must be positive, got {ns.tol!r}")
    return RunConfig(
        command=command,
        state_spec=ns.state_spec,
        target=VerifyTarget(ns.target) if command is Command.VERIFY else None,
        eps=ns.eps,
        delta=ns.delta,
        tol=ns.tol,
        approx_mode=ApproxMode(ns.approx),
        seed=ns.seed,
        out_path=ns.out_path,
        fmt=default_fmt if ns.fmt is None else OutputFormat(ns.fmt),
        threads=ns.threads,
        grid=ns.grid,
        M=ns.M,
        verbose=ns.verbose,
    )


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    _configure_logging(ns.verbose)
    try:
        cfg = to_run_config(ns)
        return COMMANDS[cfg.command](cfg)
    except (StateError, StateFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
