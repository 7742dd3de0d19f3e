"""``entangle`` command line front end.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 invalid state, 4 numerical
failure or ambiguity, 5 property violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .errors import (
    EmptySubset,
    EntangleError,
    InvalidState,
    NumericalError,
    ParseError,
    TrivialSubset,
    ZeroState,
)
from .ketparse import evaluate_amplitude_table, evaluate_ket_expression
from .measures import CEReport, ce, cef, entanglement_combination
from .state import PartySubset, PureState, Tolerances, subset_entropy
from .verify import (
    PropertyCheckResult,
    additivity_check,
    locc_monotonicity_check,
    lu_invariance_check,
    random_pure_state,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_STATE = 3
EXIT_NUMERIC = 4
EXIT_VIOLATION = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    command: str
    inputs: list
    fmt: Optional[str] = None
    json: bool = False
    detail: bool = False
    tolerances: Tolerances = Tolerances()
    normalize: bool = True
    subset: Optional[list] = None
    trials: int = 50
    seed: int = 0
    qubits: Optional[int] = None
    random: bool = False
    rounds: int = 1
    threads: int = 1
    prop: Optional[str] = None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", dest="fmt", choices=("ket", "table"), help="input format (default: auto-detect)")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--tol", type=float, default=1e-9, metavar="RANK_EPS", help="relative rank threshold")
    p.add_argument("--norm-eps", type=float, default=1e-8, metavar="E", help="input norm tolerance")
    p.add_argument("--no-normalize", action="store_true", help="reject inputs that are not unit norm")
    p.add_argument("--threads", type=int, default=1, metavar="T")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entangle", description="Combinatorial entropy of multipartite pure states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("ce", "combinatorial entropy report"),
        ("ec", "entanglement combination only"),
        ("cef", "half-sum of all partial entropies"),
        ("entropy", "partial entropy of one subset"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("inputs", nargs="?", default="-", metavar="FILE")
        _common(p)
        if name == "ce":
            p.add_argument("--detail", action="store_true", help="include per-subset entropies")
        if name == "entropy":
            p.add_argument("--subset", required=True, metavar="k1,k2,...", help="1-based party indices")

    p = sub.add_parser("verify", help="randomized property checks")
    p.add_argument("prop", choices=("lu", "additivity", "locc"))
    p.add_argument("inputs", nargs="*", metavar="FILE")
    _common(p)
    p.add_argument("--trials", type=int, default=50, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--random", action="store_true", help="use Haar-random input states")
    p.add_argument("--qubits", type=int, metavar="n", help="qubit count for --random")
    p.add_argument("--rounds", type=int, default=1, help="measurement rounds per trial (locc)")
    return parser


def _config(args) -> CliConfig:
    try:
        tol = Tolerances(rank_eps=args.tol, norm_eps=args.norm_eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    inputs = args.inputs if isinstance(args.inputs, list) else [args.inputs]
    cfg = CliConfig(
        command=args.command,
        inputs=inputs,
        fmt=args.fmt,
        json=args.json,
        detail=getattr(args, "detail", False),
        tolerances=tol,
        normalize=not args.no_normalize,
        threads=args.threads,
    )
    if args.command == "entropy":
        try:
            cfg.subset = [int(x) for x in args.subset.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"--subset expects comma separated integers, got {args.subset!r}") from None
    if args.command == "verify":
        cfg.prop = args.prop
        cfg.trials = args.trials
        cfg.seed = args.seed
        cfg.random = args.random
        cfg.qubits = args.qubits
        cfg.rounds = args.rounds
        if cfg.trials < 1 or cfg.rounds < 1:
            raise UsageError("--trials and --rounds must be >= 1")
        needed = 2 if cfg.prop == "additivity" else 1
        if cfg.random:
            if cfg.qubits is None or cfg.qubits < 1:
                raise UsageError("--random needs --qubits n (n >= 1)")
            if cfg.inputs:
                raise UsageError("give either input files or --random, not both")
        elif len(cfg.inputs) != needed:
            raise UsageError(f"verify {cfg.prop} needs {needed} input state(s) or --random --qubits n")
    return cfg


def detect_format(text: str) -> str:
    """``table`` for a leading ``dims:`` header line, ``ket`` for expression starts."""
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            continue
        if line.startswith("dims:"):
            # a ket expression may open with 'dims: ...;'
            return "ket" if ";" in line else "table"
        if line[0] in "|(0123456789.+-" or line.startswith(("i", "sqrt")):
            return "ket"
        raise UsageError(f"cannot tell the input format from {line[:20]!r}; use --format")
    raise UsageError("input is empty")


def _read(path: str) -> str:
    try:
        if path == "-":
            data = sys.stdin.buffer.read()
        else:
            with open(path, "rb") as fh:
                data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not UTF-8: {exc.reason}") from None


def load_state(text: str, cfg: CliConfig) -> tuple[PureState, bool]:
    """Parse ``text`` and return the state and whether it had to be rescaled."""
    fmt = cfg.fmt or detect_format(text)
    if fmt == "table":
        amps, dims = evaluate_amplitude_table(text)
    else:
        amps, dims = evaluate_ket_expression(text)
    norm = float(np.linalg.norm(amps))
    if norm < 1e-12:
        raise ZeroState("input describes the zero vector")
    off = abs(norm - 1.0) > cfg.tolerances.norm_eps
    if off and not cfg.normalize:
        raise InvalidState(f"input norm {norm!r} differs from 1 by more than {cfg.tolerances.norm_eps}")
    return PureState(dims, amps / norm), off


def _clean(x: float) -> float:
    # 15 significant digits hides last-bit noise such as 0.9999999999999999
    return float(format(x, ".15g")) + 0.0


def _fmt(x: float) -> str:
    return format(_clean(x), ".12g")


def report_dict(report: CEReport) -> dict:
    out = {
        "dims": list(report.dims),
        "ce": _clean(report.ce),
        "ec": report.ec.as_lists(),
        "blocks": [
            {"parties": [k + 1 for k in block.parties], "cef": _clean(value)}
            for block, value in report.block_cefs
        ],
    }
    if report.subset_entropies is not None:
        out["subset_entropies"] = {s.key(): _clean(v) for s, v in report.subset_entropies.items()}
    out["tolerances"] = {
        "rank_eps": report.tolerances.rank_eps,
        "norm_eps": report.tolerances.norm_eps,
    }
    out["normalized_input"] = report.normalized_input
    return out


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def emit_report(report: CEReport, as_json: bool = False) -> str:
    if as_json:
        return _dumps(report_dict(report))
    lines = [
        "dims: " + " ".join(str(d) for d in report.dims),
        f"EC: {report.ec}",
        f"CE: {_fmt(report.ce)} bits",
    ]
    for block, value in report.block_cefs:
        lines.append(f"  CEF{block.label()} = {_fmt(value)}")
    if report.subset_entropies is not None:
        lines.append("subset entropies:")
        for s, v in report.subset_entropies.items():
            lines.append(f"  S{{{s.key()}}} = {_fmt(v)}")
    tol = report.tolerances
    lines.append(f"tolerances: rank_eps={tol.rank_eps:g} norm_eps={tol.norm_eps:g}")
    if report.normalized_input:
        lines.append("input was rescaled to unit norm")
    return "\n".join(lines)


def emit_check(result: PropertyCheckResult, as_json: bool = False) -> str:
    if as_json:
        return _dumps({
            "property": result.name,
            "passed": result.passed,
            "trials": result.trials,
            "seed": result.seed,
            "max_violation": result.max_violation,
            "tolerance": result.tolerance,
            "components": dict(result.components),
            "notes": list(result.notes),
        })
    status = "PASS" if result.passed else "FAIL"
    lines = [
        f"{result.name}: {status} (trials={result.trials}, seed={result.seed}, "
        f"max_violation={result.max_violation:.3e}, tolerance={result.tolerance:g})"
    ]
    for key, value in result.components.items():
        flag = "ok" if value <= result.tolerance else "VIOLATED"
        lines.append(f"  {key}: {value:.3e} {flag}")
    lines.extend(f"  {note}" for note in result.notes)
    return "\n".join(lines)


def run_analyze(cfg: CliConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    state, rescaled = load_state(_read(cfg.inputs[0]), cfg)
    tol = cfg.tolerances
    if cfg.command == "ce":
        report = ce(state, tol, cfg.detail, threads=cfg.threads, normalized_input=rescaled)
        print(emit_report(report, cfg.json), file=out)
    elif cfg.command == "ec":
        ec = entanglement_combination(state, tol)
        if cfg.json:
            print(_dumps({"dims": list(state.dims), "ec": ec.as_lists()}), file=out)
        else:
            print(ec, file=out)
    elif cfg.command == "cef":
        ec = entanglement_combination(state, tol)
        if not ec.is_fully_entangled():
            print(f"warning: state is not fully entangled, EC = {ec}", file=err)
        value = cef(state, threads=cfg.threads)
        if cfg.json:
            print(_dumps({
                "dims": list(state.dims),
                "cef": _clean(value),
                "fully_entangled": ec.is_fully_entangled(),
            }), file=out)
        else:
            print(_fmt(value), file=out)
    elif cfg.command == "entropy":
        if any(not 1 <= k <= state.n for k in cfg.subset):
            raise UsageError(f"--subset indices must lie in 1..{state.n}")
        subset = PartySubset.of((k - 1 for k in cfg.subset), state.n)
        value = subset_entropy(state, subset)
        if cfg.json:
            print(_dumps({
                "dims": list(state.dims),
                "subset": [k + 1 for k in subset.parties],
                "entropy": _clean(value),
            }), file=out)
        else:
            print(_fmt(value), file=out)
    return EXIT_OK


def run_verify(cfg: CliConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    tol = cfg.tolerances
    if cfg.random:
        dims = (2,) * cfg.qubits
        # input states draw from a stream separate from the trial seeds
        rng = np.random.default_rng([cfg.seed, 7])
        count = 2 if cfg.prop == "additivity" else 1
        states = [random_pure_state(dims, rng) for _ in range(count)]
    else:
        states = [load_state(_read(path), cfg)[0] for path in cfg.inputs]
    if cfg.prop == "lu":
        result = lu_invariance_check(states[0], cfg.trials, cfg.seed, tol)
    elif cfg.prop == "additivity":
        result = additivity_check(states[0], states[1], tol, seed=cfg.seed)
    else:
        result = locc_monotonicity_check(states[0], cfg.rounds, cfg.trials, cfg.seed, tol)
    print(emit_check(result, cfg.json), file=out)
    return EXIT_OK if result.passed else EXIT_VIOLATION


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, InvalidState):
        return EXIT_STATE
    if isinstance(exc, NumericalError):
        return EXIT_NUMERIC
    if isinstance(exc, (TrivialSubset, EmptySubset)):
        return EXIT_USAGE
    return EXIT_STATE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if cfg.command == "verify":
            return run_verify(cfg)
        return run_analyze(cfg)
    except (UsageError, EntangleError) as exc:
        print(f"entangle: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
