"""Command-line front end.

Machine-readable results go to standard output (or ``--out``); progress and
summaries meant for people go to standard error.  Exit codes: 0 success,
1 usage or input error, 2 infeasible-scale refusal, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import coder, verify
from .bounds import bound_report, figure1_data
from .distributions import (
    AnalysisConfig,
    Distribution,
    empirical_counts,
    iid_entropy,
    load_distribution,
    to_json,
)
from .entropy import pattern_entropy_exact, pattern_entropy_mc, pattern_entropy_via_sequences
from .errors import CorruptPayloadError, HeaderMismatchError, InfeasibleError
from .grids import bin_stats, build_eta_grid, build_xi_grid
from .patterns import DEFAULT_ENUMERATION_CAP, extract_pattern, multiplicities

log = logging.getLogger("pattern_entropy")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3
SIG_DIGITS = 12
TOKENIZERS = ("bytes", "chars", "words")
FIGURE1_HEADER = ("k", "min_decrease_bits", "max_decrease_bits")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int | None = None
    epsilon: float = 0.1
    dist: str | None = None
    seed: int = 0
    samples: int = 10_000
    method: str = "auto"
    tokenizer: str = "chars"
    format: str | None = None
    out: str | None = None
    k_min: float | None = None
    k_max: float | None = None
    steps: int = 100
    jobs: int = 1

    def require(self, *names: str) -> None:
        missing = [f"--{n.replace('_', '-')}" for n in names if getattr(self, n) is None]
        if missing:
            raise UsageError(f"{self.command} requires {', '.join(missing)}")

    def analysis(self) -> AnalysisConfig:
        self.require("n")
        return AnalysisConfig(self.n, self.epsilon)

    def distribution(self) -> Distribution:
        self.require("dist")
        return read_distribution(self.dist)


# --- formatting -------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def round_sig(obj):
    """Round every float in a JSON-like structure to 12 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    return obj


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8")


def emit_json(obj, out: str | None) -> None:
    emit(json.dumps(round_sig(obj), indent=2) + "\n", out)


# --- input helpers ----------------------------------------------------------------


def read_distribution(spec: str) -> Distribution:
    """``spec`` is a file path, an inline JSON array, or a ``family:`` string."""
    if os.path.isfile(spec):
        spec = Path(spec).read_text(encoding="utf-8")
    return load_distribution(spec)


def tokenize(data: bytes, tokenizer: str) -> list:
    if tokenizer == "bytes":
        return list(data)
    text = data.decode("utf-8")
    if tokenizer == "chars":
        return list(text)
    if tokenizer == "words":
        return text.split()
    raise UsageError(f"unknown tokenizer {tokenizer!r}")


def read_tokens(path: str, tokenizer: str) -> list:
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        tokens = tokenize(data, tokenizer)
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path} is not valid UTF-8; use --tokenizer bytes") from exc
    if not tokens:
        raise UsageError(f"{path} is empty after {tokenizer} tokenization")
    return tokens


def format_pairs(pattern: Sequence[int], bins: Sequence[int]) -> str:
    return " ".join(map(str, pattern)) + "\n" + " ".join(map(str, bins)) + "\n"


def parse_pairs(text: str) -> tuple[list[int], list[int]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise UsageError("a (pattern, bins) file has exactly two lines: pattern indices, then bin indices")
    try:
        pattern = [int(v) for v in lines[0].split()]
        bins = [int(v) for v in lines[1].split()]
    except ValueError as exc:
        raise UsageError(f"non-integer entry in (pattern, bins) file: {exc}") from exc
    return pattern, bins


# --- subcommands ------------------------------------------------------------------


def cmd_pattern(rc: RunConfig, args) -> int:
    tokens = read_tokens(args.input, rc.tokenizer)
    p = extract_pattern(tokens)
    mult = sorted(multiplicities(p), reverse=True)
    emit(" ".join(map(str, p)) + "\n", rc.out)
    summary = {"n": len(p), "m": len(mult), "top_multiplicities": mult[:10]}
    log.info("pattern summary %s", json.dumps(summary))
    return EXIT_OK


def cmd_entropy(rc: RunConfig, args) -> int:
    d = rc.distribution()
    rc.require("n")
    n = rc.n
    method = rc.method
    if method == "auto":
        method = "exact" if n <= DEFAULT_ENUMERATION_CAP else "mc"
        log.info("method auto -> %s", method)
    if method == "exact":
        est = pattern_entropy_exact(d, n)
    elif method == "sequences":
        est = pattern_entropy_via_sequences(d, n)
    elif method == "mc":
        est = pattern_entropy_mc(d, n, rc.samples, rc.seed, jobs=rc.jobs)
    else:
        raise UsageError(f"unknown method {method!r}")
    obj = est.to_json()
    obj["iid_total_bits"] = n * iid_entropy(d)
    if (rc.format or "json") == "csv":
        emit(to_csv(list(obj), [list(obj.values())]), rc.out)
    else:
        emit_json(obj, rc.out)
    return EXIT_OK


def cmd_bounds(rc: RunConfig, args) -> int:
    d = rc.distribution()
    rep = bound_report(d, rc.analysis())
    if (rc.format or "json") == "csv":
        cols = ("name", "value_bits", "applicable", "asymptotic", "decrease_bits", "clamped", "notes")
        rows = [[getattr(e, c) for c in cols] for e in rep.bounds]
        emit(to_csv(cols, rows), rc.out)
    else:
        emit_json(rep.to_dict(), rc.out)
    return EXIT_OK


def cmd_range(rc: RunConfig, args) -> int:
    rc.require("k_min", "k_max")
    cfg = rc.analysis()
    try:
        rows = figure1_data(cfg, rc.k_min, rc.k_max, rc.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if (rc.format or "csv") == "json":
        emit_json([dict(zip(FIGURE1_HEADER, r)) for r in rows], rc.out)
    else:
        emit(to_csv(FIGURE1_HEADER, rows), rc.out)
    return EXIT_OK


def cmd_grid(rc: RunConfig, args) -> int:
    cfg = rc.analysis()
    emit_json({"eta": build_eta_grid(cfg).to_json(), "xi": build_xi_grid(cfg).to_json()}, rc.out)
    return EXIT_OK


def _rho_arg(v):
    return None if v is None else float(v)


def cmd_encode(rc: RunConfig, args) -> int:
    if rc.out in (None, "-"):
        raise UsageError("encode writes a binary container; give --out FILE")
    if args.pairs:
        d = rc.distribution()
        pattern, bins = parse_pairs(Path(args.input).read_text(encoding="utf-8"))
        cfg = rc.analysis()
        blob = coder.encode(d, cfg, pattern=pattern, bins=bins, rho0=_rho_arg(args.rho0), rho1=_rho_arg(args.rho1))
        count = len(pattern)
    else:
        tokens = read_tokens(args.input, rc.tokenizer)
        if rc.dist is None:
            emp, letter_of = empirical_counts(tokens)
            dist_text = to_json(emp)
            d = load_distribution(dist_text)  # the decoder rebuilds it from this exact text
            if args.dist_out:
                Path(args.dist_out).write_text(dist_text + "\n", encoding="utf-8")
            else:
                log.warning("empirical distribution not saved; pass --dist-out to make the output decodable")
        else:
            d = rc.distribution()
            try:
                letter_of = {t: int(t) for t in set(tokens)}
            except ValueError as exc:
                raise UsageError("with --dist, tokens must be letter indices 1..k") from exc
        x = np.array([letter_of[t] for t in tokens], dtype=np.int64)
        n = rc.n if rc.n is not None else max(2, x.size)
        cfg = AnalysisConfig(n, rc.epsilon)
        blob = coder.encode(d, cfg, x, rho0=_rho_arg(args.rho0), rho1=_rho_arg(args.rho1))
        count = x.size
        if args.pairs_out:
            pattern = extract_pattern(x.tolist())
            bins = bin_stats(d, cfg).letter_bins[x - 1].tolist()
            Path(args.pairs_out).write_text(format_pairs(pattern, bins), encoding="utf-8")
    Path(rc.out).write_bytes(blob)
    pattern, bins = coder.decode(d, cfg, blob)
    ideal = coder.ideal_code_length(d, cfg, pattern, bins, _rho_arg(args.rho0), _rho_arg(args.rho1))
    actual = coder.payload_bits(blob)
    summary = {
        "symbols": count,
        "n": cfg.n,
        "epsilon": cfg.epsilon,
        "k": d.k,
        "ideal_bits": ideal,
        "actual_payload_bits": actual,
        "overhead_bits": actual - ideal,
        "budget_bits": ideal + 32 + 0.015 * count,
        "container_bytes": len(blob),
    }
    sys.stdout.write(json.dumps(round_sig(summary), indent=2) + "\n")
    return EXIT_OK


def cmd_decode(rc: RunConfig, args) -> int:
    d = rc.distribution()
    blob = Path(args.input).read_bytes()
    head, _ = coder.container.unpack(blob)
    n = rc.n if rc.n is not None else head.n
    eps = rc.epsilon if args.epsilon_given else head.epsilon
    cfg = AnalysisConfig(n, eps)
    pattern, bins = coder.decode(d, cfg, blob, _rho_arg(args.rho0), _rho_arg(args.rho1))
    emit(format_pairs(pattern, bins), rc.out)
    log.info("decoded %d symbols", len(pattern))
    return EXIT_OK


def cmd_verify(rc: RunConfig, args) -> int:
    results = []
    for number in verify.SUITES[args.suite]:
        log.info("running criterion %d", number)
        r = verify.run_check(number)
        log.info(r.line())
        results.append(r)
    if (rc.format or "json") == "csv":
        rows = [[r.number, r.title, r.passed, r.seconds, r.detail] for r in results]
        emit(to_csv(("criterion", "title", "passed", "seconds", "detail"), rows), rc.out)
    else:
        emit_json(
            {
                "suite": args.suite,
                "passed": all(r.passed for r in results),
                "results": [
                    {
                        "criterion": r.number,
                        "title": r.title,
                        "passed": r.passed,
                        "detail": r.detail,
                        "seconds": r.seconds,
                        "expected_failures": r.expected_failures,
                    }
                    for r in results
                ],
            },
            rc.out,
        )
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "pattern": cmd_pattern,
    "entropy": cmd_entropy,
    "bounds": cmd_bounds,
    "range": cmd_range,
    "grid": cmd_grid,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="sequence length")
    common.add_argument("--epsilon", type=float, default=None, help="grid parameter (default 0.1)")
    common.add_argument("--dist", help="JSON file, inline JSON array, or family:NAME,key=value,...")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--method", choices=("auto", "exact", "sequences", "mc"), default="auto")
    common.add_argument("--tokenizer", choices=TOKENIZERS, default="chars")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", help="output file (default standard output)")
    common.add_argument("--k-min", type=float)
    common.add_argument("--k-max", type=float)
    common.add_argument("--steps", type=int, default=100)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="pattern-entropy", description="Entropy of patterns of i.i.d. sequences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pattern", parents=[common], help="extract the pattern of a text file")
    p.add_argument("input")
    sub.add_parser("entropy", parents=[common], help="pattern entropy (exact or Monte Carlo)")
    sub.add_parser("bounds", parents=[common], help="every bound on the pattern entropy")
    sub.add_parser("range", parents=[common], help="min/max decrease from nH over a sweep of k")
    sub.add_parser("grid", parents=[common], help="inspect the eta and xi grids")
    p = sub.add_parser("encode", parents=[common], help="compress a corpus or a (pattern, bins) file")
    p.add_argument("input")
    p.add_argument("--pairs", action="store_true", help="input is a (pattern, bins) file")
    p.add_argument("--pairs-out", help="also write the encoded (pattern, bins) stream here")
    p.add_argument("--dist-out", help="write the empirical distribution used for a text corpus")
    p.add_argument("--rho0", type=float)
    p.add_argument("--rho1", type=float)
    p = sub.add_parser("decode", parents=[common], help="recover the (pattern, bins) stream")
    p.add_argument("input")
    p.add_argument("--rho0", type=float)
    p.add_argument("--rho1", type=float)
    p = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    p.add_argument("suite", nargs="?", default="all", choices=tuple(verify.SUITES))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    if args.command in ("pattern", "encode", "decode", "verify"):
        log.setLevel(logging.INFO)
    args.epsilon_given = args.epsilon is not None
    rc = RunConfig(
        command=args.command,
        n=args.n,
        epsilon=0.1 if args.epsilon is None else args.epsilon,
        dist=args.dist,
        seed=args.seed,
        samples=args.samples,
        method=args.method,
        tokenizer=args.tokenizer,
        format=args.format,
        out=args.out,
        k_min=args.k_min,
        k_max=args.k_max,
        steps=args.steps,
        jobs=args.jobs,
    )
    try:
        return COMMANDS[args.command](rc, args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (HeaderMismatchError, CorruptPayloadError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
