"""Command-line interface.

Exit codes: 0 pass, 1 fail, 2 usage error, 3 sweep disagreement.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import selftest
from .channels import DEFAULT_FAMILY_CAP, EnumerationCapError, family_size, spanning_kraus_family, uniform_insdel
from .codefile import BUNDLED, CodeFileError, load_code
from .kl import KLVerdict, QuantumCode, RecoveryError, agreement, build_recovery, check_insdel_code, theorem_sweep, verify_recovery
from .tensor import DimensionCapError
from .words import render

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_DISAGREE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-10
    cap: int = DEFAULT_FAMILY_CAP
    samples: int = 50
    seed: int = 0
    workers: int = 1
    recovery_tolerance: float = 1e-8

    def __post_init__(self):
        if not self.tolerance > 0 or not self.recovery_tolerance > 0:
            raise UsageError("tolerances must be positive")
        if self.samples < 1:
            raise UsageError("samples must be at least 1")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        if self.workers < 1 or self.cap < 1:
            raise UsageError("workers and cap must be positive")


def _verdict_dict(code: QuantumCode, t1: int, t2: int, v: KLVerdict) -> dict:
    r = v.report
    return {
        "code": code.label,
        "t1": t1,
        "t2": t2,
        "family_size": v.family_size,
        "max_offdiag": r.max_offdiag,
        "max_diag_spread": r.max_diag_spread,
        "worst_offdiag_pair": list(r.worst_offdiag_pair) if r.worst_offdiag_pair else None,
        "worst_diag_pair": list(r.worst_diag_pair) if r.worst_diag_pair else None,
        "orthogonality": v.orthogonality,
        "non_deformation": v.non_deformation,
        "passed": v.passed,
    }


def _g_stats(v: KLVerdict) -> dict:
    g = v.report.g_values
    vals = g[~np.isnan(g.real)]
    eig = np.linalg.eigvalsh((np.nan_to_num(g) + np.nan_to_num(g).conj().T) / 2)
    return {
        "compatible_pairs": int(vals.size),
        "max_abs_g": float(np.max(np.abs(vals))) if vals.size else 0.0,
        "g_rank": int(np.sum(eig > 1e-10 * max(eig.max(), 1e-300))),
    }


def _fmt_pass(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ---------------------------------------------------------------------------
# commands; each returns (exit code, machine payload, text lines)


def cmd_check(code: QuantumCode, t1: int, t2: int, cfg: RunConfig):
    _check_params(code, t1, t2)
    v = check_insdel_code(code, t1, t2, cfg.tolerance, cfg.cap, cfg.workers)
    payload = _verdict_dict(code, t1, t2, v) | {"g_summary": _g_stats(v)}
    lines = [
        f"code: {code.label} (q={code.q}, N={code.N}, d={code.d})",
        f"channel: ({t1},{t2})-insdel, spanning family size {v.family_size}",
        f"max off-diagonal    {v.report.max_offdiag:.3e}  {_fmt_pass(v.orthogonality)}",
        f"max diagonal spread {v.report.max_diag_spread:.3e}  {_fmt_pass(v.non_deformation)}",
        f"g matrix: {payload['g_summary']['compatible_pairs']} compatible pairs, "
        f"max |g| {payload['g_summary']['max_abs_g']:.6g}, rank {payload['g_summary']['g_rank']}",
    ]
    if not v.passed:
        pair = v.report.worst_offdiag_pair if not v.orthogonality else v.report.worst_diag_pair
        family = spanning_kraus_family(code.N, code.q, t1, t2, cfg.cap)
        lines.append(f"worst violating pair {pair}:")
        lines += [f"  E_{k} = {render(family[k])}" for k in pair]
    lines.append(f"verdict: {_fmt_pass(v.passed)}")
    return (EXIT_PASS if v.passed else EXIT_FAIL), payload, lines


def cmd_sweep(code: QuantumCode, T: int, cfg: RunConfig):
    if not 0 <= T < code.N:
        raise UsageError(f"T = {T} must satisfy 0 <= T < N = {code.N}")
    rows = theorem_sweep(code, T, cfg.tolerance, cfg.cap, cfg.workers)
    agree = agreement(rows)
    payload = {"T": T, "agreement": agree, "rows": [_verdict_dict(code, r.s1, r.s2, r.verdict) for r in rows]}
    lines = [f"code: {code.label}  T={T}", f"{'s1':>3} {'s2':>3} {'family':>8} {'offdiag':>10} {'spread':>10}  verdict"]
    for r in rows:
        rep = r.verdict.report
        lines.append(
            f"{r.s1:>3} {r.s2:>3} {r.verdict.family_size:>8} {rep.max_offdiag:>10.3e} {rep.max_diag_spread:>10.3e}  {_fmt_pass(r.verdict.passed)}"
        )
    lines.append("AGREEMENT" if agree else "DISAGREEMENT: verdicts differ across the sweep (numerical or implementation issue)")
    return (EXIT_PASS if agree else EXIT_DISAGREE), payload, lines


def cmd_selftest(cfg: RunConfig):
    results = selftest.run_all(cfg.seed, cfg.workers)
    payload = selftest.summary(results)
    try:
        load_code(BUNDLED)
        bundled_ok, bundled_msg = True, "ok"
    except CodeFileError as exc:
        bundled_ok, bundled_msg = False, str(exc)
    payload["bundled_code"] = {"path": BUNDLED.name, "valid": bundled_ok, "message": bundled_msg}
    payload["passed"] = payload["passed"] and bundled_ok
    lines = [f"{'suite':<32} {'count':>6} {'worst':>10} {'limit':>8}  result"]
    for r in results:
        extra = f"  ({r.contractions} with contractions)" if r.contractions is not None else ""
        lines.append(f"{r.name:<32} {r.count:>6} {r.worst:>10.2e} {r.threshold:>8.0e}  {_fmt_pass(r.passed)}{extra}")
    lines.append(f"bundled code file: {bundled_msg}")
    failing = next((r for r in results if not r.passed), None)
    if failing is not None:
        lines.append(f"counterexample: {failing.counterexample}")
    lines.append(f"worst deviation {payload['worst_deviation']:.2e}; overall {_fmt_pass(payload['passed'])}")
    return (EXIT_PASS if payload["passed"] else EXIT_FAIL), payload, lines


def cmd_recover(code: QuantumCode, t1: int, t2: int, cfg: RunConfig):
    _check_params(code, t1, t2)
    verdict = check_insdel_code(code, t1, t2, cfg.tolerance, cfg.cap, cfg.workers)
    base = {"code": code.label, "t1": t1, "t2": t2, "check_passed": verdict.passed}
    if not verdict.passed:
        return EXIT_FAIL, base | {"passed": False}, [f"code fails the ({t1},{t2}) check; no recovery attempted"]
    family = spanning_kraus_family(code.N, code.q, t1, t2, cfg.cap)
    try:
        ops = build_recovery(code, family, cfg.tolerance)
    except RecoveryError as exc:
        return EXIT_FAIL, base | {"passed": False, "error": str(exc)}, [f"recovery failed: {exc}"]
    rng = np.random.default_rng(cfg.seed)
    channel = uniform_insdel(code.N, code.q, t1, t2, rng)
    rep = verify_recovery(code, channel, ops, cfg.samples, cfg.recovery_tolerance, rng)
    payload = base | {
        "recovery_operators": len(ops),
        "max_deviation": rep.max_deviation,
        "completeness": rep.completeness,
        "samples": rep.samples,
        "passed": rep.passed,
    }
    lines = [
        f"code: {code.label}  channel: uniform ({t1},{t2})-insdel",
        f"recovery operators: {len(ops)}, completeness violation {rep.completeness:.2e}",
        f"max deviation over {rep.samples} states: {rep.max_deviation:.3e} (limit {cfg.recovery_tolerance:.0e})",
        f"verdict: {_fmt_pass(rep.passed)}",
    ]
    return (EXIT_PASS if rep.passed else EXIT_FAIL), payload, lines


def cmd_describe(code: QuantumCode, cfg: RunConfig):
    c = code.codewords
    gram = c.conj() @ c.T
    payload = {
        "code": code.label,
        "q": code.q,
        "N": code.N,
        "d": code.d,
        "hilbert_dim": code.q**code.N,
        "support_sizes": [int(np.count_nonzero(np.abs(v) > 1e-12)) for v in c],
        "max_orthonormality_error": float(np.max(np.abs(gram - np.eye(code.d)))),
        "family_sizes": {f"{T - s2},{s2}": family_size(code.N, code.q, T - s2, s2) for T in range(code.N) for s2 in range(T + 1)},
    }
    lines = [
        f"label: {code.label}",
        f"q={code.q} N={code.N} d={code.d} (ambient dimension {payload['hilbert_dim']})",
        f"codeword supports: {payload['support_sizes']}",
        f"orthonormality error: {payload['max_orthonormality_error']:.2e}",
        "spanning family sizes (t1,t2): " + ", ".join(f"({k})={v}" for k, v in payload["family_sizes"].items()),
    ]
    return EXIT_PASS, payload, lines


def _check_params(code: QuantumCode, t1: int, t2: int) -> None:
    if t1 < 0 or t2 < 0:
        raise UsageError("t1 and t2 must be non-negative")
    if t2 >= code.N:
        raise UsageError(f"t2 = {t2} must be smaller than N = {code.N}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="KL tolerance (default 1e-10)")
    common.add_argument("--cap", type=int, default=DEFAULT_FAMILY_CAP, help="max spanning family size (default 1e5)")
    common.add_argument("--samples", type=int, default=50, help="random states for recover (default 50)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized runs (default 0)")
    common.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    common.add_argument("--format", choices=["text", "machine"], default="text")
    common.add_argument("--code", default=str(BUNDLED), help="code file (default: bundled four-qubit code)")
    common.add_argument("--recovery-tol", type=float, default=1e-8, help="recovery deviation limit (default 1e-8)")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")

    p = argparse.ArgumentParser(prog="qinsdel", description="Insertion/deletion Knill-Laflamme checks for small qudit codes.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("check", "recover"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("t1", type=int)
        s.add_argument("t2", type=int)
    sub.add_parser("sweep", parents=[common]).add_argument("T", type=int)
    sub.add_parser("selftest", parents=[common])
    sub.add_parser("describe", parents=[common])
    return p


def _emit(fmt: str, command: str, cfg: RunConfig, code_path: str | None, exit_code: int, payload: dict, lines, wall):
    if fmt == "machine":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            # worker count changes scheduling only, so it stays out of the report
            "config": {k: v for k, v in asdict(cfg).items() if k != "workers"},
            "code_file": code_path,
            "exit_code": exit_code,
            "result": payload,
        }
        if wall is not None:
            doc["wall_time_s"] = wall
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print("\n".join(lines))
        if wall is not None:
            print(f"wall time: {wall:.3f} s")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    start = time.perf_counter()
    try:
        cfg = RunConfig(args.tol, args.cap, args.samples, args.seed, args.workers, args.recovery_tol)
        code = None
        if args.command != "selftest":
            code = load_code(args.code)
        if args.command == "check":
            out = cmd_check(code, args.t1, args.t2, cfg)
        elif args.command == "recover":
            out = cmd_recover(code, args.t1, args.t2, cfg)
        elif args.command == "sweep":
            out = cmd_sweep(code, args.T, cfg)
        elif args.command == "describe":
            out = cmd_describe(code, cfg)
        else:
            out = cmd_selftest(cfg)
    except (UsageError, CodeFileError, OSError, EnumerationCapError, DimensionCapError) as exc:
        print(f"qinsdel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    wall = time.perf_counter() - start if args.timing else None
    code_path = None if args.command == "selftest" else args.code
    _emit(args.format, args.command, cfg, code_path, *out, wall)
    return out[0]


if __name__ == "__main__":
    sys.exit(main())
