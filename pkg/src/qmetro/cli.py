"""Command-line surface: ``table``, ``protocol``, ``sweep``, ``validate``.

All angles are radians.  Output is deterministic: reals are rendered in
shortest round-trip decimal form, complex values as paired re/im columns, and
file metadata lives in '#'-prefixed sidecar lines with no timestamps, so
identical invocations produce byte-identical files.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

from . import correlations as co
from . import protocol, validate
from .fock import TruncationOverflowError
from .gaussian import SingularOperatingPointError

CUTOFF_ENV_VAR = "QMETRO_DEFAULT_CUTOFF"

TABLE_COLUMNS = (
    "state_id", "n_bar", "q", "j", "qfi",
    "oracle_q", "oracle_j", "oracle_qfi", "max_rel_dev", "note",
)
PROTOCOL_COLUMNS = (
    "engine", "n_bar", "r", "phi", "eta1", "eta2", "cutoff",
    "signal", "variance", "delta_phi", "delta_phi_is_limit",
    "m_aa_re", "m_aa_im", "snl", "snl_ratio", "trace_deficit",
)
SWEEP_COLUMNS = ("n_bar", "phi", "eta", "signal", "variance", "delta_phi", "snl", "snl_ratio")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(lines: list[str], out_path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out_path}: {exc}") from exc


def _emit_rows(rows: list[dict], columns: tuple[str, ...], meta: dict, fmt: str,
               out_path: str | None) -> None:
    if fmt == "csv":
        lines = ["# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items()))]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(row.get(c)) for c in columns))
        _emit(lines, out_path)
    else:
        doc = {"meta": meta, "columns": list(columns), "rows": rows}
        _emit([json.dumps(doc, indent=2)], out_path)


class UsageError(ValueError):
    """Bad input on the command line (exit code 2)."""


def _env_cutoff() -> int | None:
    raw = os.environ.get(CUTOFF_ENV_VAR)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError(f"{CUTOFF_ENV_VAR}={raw!r} is not an integer") from exc
    if value < 2:
        raise UsageError(f"{CUTOFF_ENV_VAR} must be >= 2")
    return value


def _resolve_cutoff(args) -> int | None:
    return args.cutoff if args.cutoff is not None else _env_cutoff()


def _parse_grid(raw: str, name: str) -> list[float]:
    try:
        values = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {raw!r}") from exc
    if not values:
        raise UsageError(f"--{name}: empty grid")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError(f"--{name}: grid must be strictly increasing")
    return values


@dataclass(frozen=True)
class SweepSpec:
    """Axes and output destination of one sweep invocation."""

    n_bar_values: tuple[float, ...]
    phi_values: tuple[float, ...]
    eta_values: tuple[float, ...]
    fmt: str
    out_path: str | None

    def __post_init__(self) -> None:
        for name, values, lo, hi in (
            ("nbar", self.n_bar_values, 0.0, math.inf),
            ("phi", self.phi_values, 0.0, math.pi / 2),
            ("eta", self.eta_values, 0.0, 1.0),
        ):
            if not values:
                raise UsageError(f"--{name}: empty grid")
            if any(not lo < v <= hi for v in values):
                raise UsageError(f"--{name}: values must lie in ({lo:g}, {hi:g}]")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise UsageError(f"--{name}: grid must be strictly increasing")
        if any(v >= math.pi / 2 for v in self.phi_values):
            raise UsageError("--phi: sweep values must be below pi/2 (signal extremum)")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_table(args) -> int:
    if args.nbar is None or args.nbar <= 0:
        raise UsageError("--nbar must be a positive number")
    cutoff = _resolve_cutoff(args)
    rows = []
    for family in co.ProbeFamily:
        try:
            row = co.table_row(family, args.nbar)
        except ValueError as exc:
            rows.append({
                "state_id": family.value, "n_bar": args.nbar,
                "note": f"closed form unavailable: {exc}",
            })
            continue
        record = {
            "state_id": family.value, "n_bar": row.n_bar,
            "q": row.q, "j": row.j, "qfi": row.qfi, "note": "",
        }
        if family in co.FORMULA_ONLY:
            record["note"] = "formula-only"
        elif args.oracle:
            try:
                oracle = co.oracle_row(family, args.nbar, cutoff)
                record.update({
                    "oracle_q": oracle.q, "oracle_j": oracle.j, "oracle_qfi": oracle.qfi,
                    "max_rel_dev": max(
                        abs(row.q - oracle.q) / max(abs(row.q), abs(oracle.q), 1.0),
                        abs(row.j - oracle.j) / max(abs(row.j), abs(oracle.j), 1.0),
                        abs(row.qfi - oracle.qfi) / max(abs(row.qfi), abs(oracle.qfi), 1.0),
                    ),
                })
            except (ValueError, TruncationOverflowError) as exc:
                record["note"] = f"oracle unavailable: {exc}"
        rows.append(record)
    meta = {"command": "table", "n_bar": _fmt(float(args.nbar)), "oracle": args.oracle}
    if cutoff is not None:
        meta["cutoff"] = cutoff
    _emit_rows(rows, TABLE_COLUMNS, meta, args.format, args.out)
    return 0


def _protocol_record(engine: str, config: protocol.ProtocolConfig,
                     result: protocol.ProtocolResult, cutoff) -> dict:
    n_bar = config.n_bar_value
    snl = co.shot_noise_limit(n_bar, "single-mode")
    return {
        "engine": engine,
        "n_bar": n_bar,
        "r": config.r_value,
        "phi": config.phi,
        "eta1": config.eta1,
        "eta2": config.eta2,
        "cutoff": cutoff,
        "signal": result.signal,
        "variance": result.variance,
        "delta_phi": result.phase_error,
        "delta_phi_is_limit": result.phase_error_is_limit,
        "m_aa_re": result.moments.m_aa.real,
        "m_aa_im": result.moments.m_aa.imag,
        "snl": snl,
        "snl_ratio": (snl / result.phase_error) if result.phase_error else None,
        "trace_deficit": result.trace_deficit,
    }


def cmd_protocol(args) -> int:
    config = _protocol_config(args)
    rows = []
    if config.engine == "both":
        report = protocol.run_both(config)
        rows.append(_protocol_record("gaussian", config, report.gaussian_result, None))
        rows.append(_protocol_record("fock", config, report.fock_result, report.cutoff))
        deviations = {
            "signal_rel_dev": report.rel_deviation("signal"),
            "variance_rel_dev": report.rel_deviation("variance"),
            "m_aa_rel_dev": report.moment_aa_deviation(),
        }
        meta = {"command": "protocol", **{k: _fmt(v) for k, v in deviations.items()}}
    elif config.engine == "fock":
        cutoff = config.cutoff if config.cutoff is not None else protocol.default_cutoff(
            config.n_bar_value)
        rows.append(_protocol_record("fock", config, protocol.run_fock(config), cutoff))
        meta = {"command": "protocol"}
    else:
        rows.append(_protocol_record("gaussian", config, protocol.run_gaussian(config), None))
        meta = {"command": "protocol"}
    columns = PROTOCOL_COLUMNS
    _emit_rows(rows, columns, meta, args.format, args.out)
    return 0


def _protocol_config(args) -> protocol.ProtocolConfig:
    if (args.nbar is None) == (args.r is None):
        raise UsageError("give exactly one of --nbar and --r")
    if args.eta is not None and (args.eta1 is not None or args.eta2 is not None):
        raise UsageError("give --eta or --eta1/--eta2, not both")
    eta1 = args.eta if args.eta is not None else (args.eta1 if args.eta1 is not None else 1.0)
    eta2 = args.eta if args.eta is not None else (args.eta2 if args.eta2 is not None else 1.0)
    try:
        return protocol.ProtocolConfig(
            phi=args.phi,
            n_bar=args.nbar,
            r=args.r,
            eta1=eta1,
            eta2=eta2,
            cutoff=_resolve_cutoff(args),
            engine=args.engine,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep(args) -> int:
    if args.nbar is not None and args.nbar_logspace is not None:
        raise UsageError("give --nbar or --nbar-logspace, not both")
    if args.nbar is not None:
        n_bars = _parse_grid(args.nbar, "nbar")
    elif args.nbar_logspace is not None:
        lo, hi, count = args.nbar_logspace
        if lo <= 0 or hi <= lo or count < 1:
            raise UsageError("--nbar-logspace needs 0 < MIN < MAX and COUNT >= 1")
        count = int(count)
        n_bars = [lo * (hi / lo) ** (i / max(count - 1, 1)) for i in range(count)]
    else:
        raise UsageError("give --nbar or --nbar-logspace")
    spec = SweepSpec(
        n_bar_values=tuple(n_bars),
        phi_values=tuple(_parse_grid(args.phi, "phi")),
        eta_values=tuple(_parse_grid(args.eta, "eta")),
        fmt=args.format,
        out_path=args.out,
    )
    rows = []
    for n_bar in spec.n_bar_values:
        for phi in spec.phi_values:
            for eta in spec.eta_values:
                # same code path as `protocol --engine gaussian`, so a
                # single-point sweep reproduces that command exactly
                result = protocol.run_gaussian(
                    protocol.ProtocolConfig(phi=phi, n_bar=n_bar, eta1=eta, eta2=eta)
                )
                snl = co.shot_noise_limit(n_bar, "single-mode")
                rows.append({
                    "n_bar": n_bar,
                    "phi": phi,
                    "eta": eta,
                    "signal": result.signal,
                    "variance": result.variance,
                    "delta_phi": result.phase_error,
                    "snl": snl,
                    "snl_ratio": snl / result.phase_error,
                })
    meta = {
        "command": "sweep",
        "snl_convention": "single-mode 1/sqrt(4 n_bar)",
        "engine": "gaussian",
        "points": len(rows),
    }
    _emit_rows(rows, SWEEP_COLUMNS, meta, spec.fmt, spec.out_path)
    return 0


def cmd_validate(args) -> int:
    started = time.monotonic()
    report = validate.run_checks(args.level)
    doc = json.dumps(report, indent=2)
    if args.out is not None:
        _emit([doc], args.out)
        for check in report["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"{status} {check['name']}: observed {check['observed']:.3e} "
                  f"(budget {check['budget']:.0e})")
        print(f"{len(report['checks'])} checks in {time.monotonic() - started:.1f}s")
    else:
        _emit([doc], None)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmetro",
        description="Squeezed-light phase-estimation workbench "
                    "(closed-form moment engine + exact Fock oracle).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")

    p_table = sub.add_parser(
        "table", help="closed-form (Q, J, QFI) catalogue, optionally oracle-checked")
    p_table.add_argument("--nbar", type=float, required=True, help="mean photon number")
    p_table.add_argument("--oracle", action="store_true",
                         help="add exact Fock columns for constructible states")
    p_table.add_argument("--cutoff", type=int, default=None)
    add_io(p_table)
    p_table.set_defaults(fn=cmd_table)

    p_proto = sub.add_parser("protocol", help="run one protocol operating point")
    group = p_proto.add_mutually_exclusive_group()
    group.add_argument("--nbar", type=float, default=None, help="mean probe photons sinh^2 r")
    group.add_argument("--r", type=float, default=None, help="squeezing parameter")
    p_proto.add_argument("--phi", type=float, required=True, help="phase (radians)")
    p_proto.add_argument("--eta", type=float, default=None, help="shared transmissivity")
    p_proto.add_argument("--eta1", type=float, default=None, help="transmissivity after the phase")
    p_proto.add_argument("--eta2", type=float, default=None, help="transmissivity at the detector")
    p_proto.add_argument("--cutoff", type=int, default=None, help="Fock cutoff (Fock engine only)")
    p_proto.add_argument("--engine", choices=protocol.ENGINES, default="gaussian")
    add_io(p_proto)
    p_proto.set_defaults(fn=cmd_protocol)

    p_sweep = sub.add_parser("sweep", help="closed-form grid sweep (Gaussian engine)")
    p_sweep.add_argument("--nbar", default=None, help="comma-separated increasing grid")
    p_sweep.add_argument("--nbar-logspace", nargs=3, type=float, default=None,
                         metavar=("MIN", "MAX", "COUNT"), help="log-spaced grid")
    p_sweep.add_argument("--phi", required=True, help="comma-separated increasing list")
    p_sweep.add_argument("--eta", required=True, help="comma-separated increasing list")
    add_io(p_sweep)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the self-check suites")
    p_val.add_argument("--level", choices=validate.LEVELS, default="quick")
    p_val.add_argument("--out", metavar="PATH", default=None,
                       help="write the JSON report here (summary goes to stdout)")
    p_val.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SingularOperatingPointError, protocol.VanishingDerivativeError) as exc:
        print(f"error: singular operating point: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TruncationOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
