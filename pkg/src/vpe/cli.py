"""Command-line entry point: ``vpe <command> ...``.

Exit codes: 0 success / accept, 1 reject, 2 usage, I/O, transport or
protocol error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import secrets
import sys
import tempfile
from pathlib import Path

from vpe.field import DEFAULT_MODULUS, PrimeModulus
from vpe.lookup import LookupTable, TableError, build_table
from vpe.ops import OpCount
from vpe.params import ParamsError, ProtocolParams, check_table_size, derive_params
from vpe.poly import Polynomial, PolyFormatError
from vpe.protocol import SessionError
from vpe.simulate import bench, bench_lines, random_poly, simulate

log = logging.getLogger("vpe")

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _seed(value: int | None) -> int | None:
    if value is not None:
        return value
    env = os.environ.get("VPE_SEED")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise CliError(f"VPE_SEED must be an integer, got {env!r}") from None


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _load_params(path: str) -> ProtocolParams:
    return ProtocolParams.load(path)


def cmd_gen_poly(args) -> int:
    if args.degree < 1:
        raise CliError("--degree must be at least 1")
    try:
        modulus = PrimeModulus(args.modulus)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    seed = _seed(args.seed)
    if seed is None:
        seed = secrets.randbits(63)
        log.warning("no seed given; using %d", seed)
    f = random_poly(args.degree, modulus, random.Random(seed))
    _write_atomic(args.out, f.to_text())
    print(f"wrote {args.out}: d={args.degree} modulus={modulus.p} seed={seed}")
    return EXIT_OK


def cmd_init(args) -> int:
    f = Polynomial.load(args.poly)
    params = derive_params(f.modulus, len(f), args.eta, args.ceta)
    check_table_size(params)
    ops = OpCount()
    table = build_table(f, params, ops=ops)
    # both outputs are produced before anything touches disk
    params_text, table_text = params.to_text(), table.to_text()
    _write_atomic(args.out_params, params_text)
    _write_atomic(args.out_table, table_text)
    print(f"lambda={params.table_size} r={params.r} m={params.m}")
    print(f"init ops: mul={ops.mul} add={ops.add} inv={ops.inv}")
    return EXIT_OK


def _prover_setup(args):
    f = Polynomial.load(args.poly)
    params = _load_params(args.params)
    if f.modulus != params.modulus:
        raise CliError("polynomial modulus differs from params modulus")
    if len(f) > params.d_pad:
        raise CliError(f"polynomial has {len(f)} terms, params allow {params.d_pad}")
    strategy = "honest"
    if args.adversary:
        strategy = "corrupt-min" if args.adversary == "wrong-claim" else args.adversary
    return f, params, strategy


def cmd_prove(args) -> int:
    from vpe.wire import ProverServer, parse_endpoint, serve_stream, session_factory

    f, params, strategy = _prover_setup(args)
    factory = session_factory(f, params, strategy, args.delta, _seed(args.seed))
    if args.stdio:
        serve_stream(factory(), sys.stdin.buffer, sys.stdout.buffer)
        return EXIT_OK
    try:
        server = ProverServer(parse_endpoint(args.listen), factory)
    except OSError as exc:
        raise CliError(f"cannot listen on {args.listen}: {exc}") from exc
    with server:
        print(f"prover listening on {server.endpoint} ({strategy})", file=sys.stderr, flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return EXIT_OK


def cmd_verify(args) -> int:
    from vpe.wire import StreamChannel, connect_verifier

    params = _load_params(args.params)
    table = LookupTable.load(args.table, params)
    x = args.x
    if not 0 <= x < params.p:
        log.warning("x=%d reduced to its canonical representative %d", x, x % params.p)
        x %= params.p
    out = sys.stderr if args.stdio else sys.stdout
    endpoint = StreamChannel(sys.stdin.buffer, sys.stdout.buffer) if args.stdio else args.connect
    verdict, transcript = connect_verifier(params, table, x, endpoint, _seed(args.seed))
    transcript.save(args.transcript)
    print(f"verdict: {'accept' if verdict.accepted else 'reject'} ({verdict.reason})", file=out)
    if verdict.accepted:
        print(f"value: {verdict.claim}", file=out)
    print(f"transcript: {args.transcript}", file=out)
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def cmd_simulate(args) -> int:
    seed = _seed(args.seed)
    if seed is None:
        seed = 0
    if args.trials < 1000:
        log.warning("fewer than 1000 trials; sigma is only indicative")
    report = simulate(args.eta, args.ceta, args.degree, args.strategy, args.trials, seed,
                      delta=args.delta, modulus=args.modulus)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print("\n".join(report.lines()))
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = _seed(args.seed)
    rows = bench(args.degrees, args.eta, args.ceta, 0 if seed is None else seed, modulus=args.modulus)
    print("\n".join(bench_lines(rows)))
    if not all(row.accepted for row in rows):
        raise CliError("an honest benchmark session was rejected")
    return EXIT_OK


def _degrees(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty degree list")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpe", description="Interactive verifiable polynomial evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-poly", help="write a seeded random polynomial")
    p.add_argument("--degree", type=int, required=True, help="number of coefficients d")
    p.add_argument("--seed", type=int)
    p.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_poly)

    p = sub.add_parser("init", help="build params and look-up table for a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--ceta", type=int, required=True)
    p.add_argument("--out-table", required=True)
    p.add_argument("--out-params", required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("prove", help="serve the prover")
    p.add_argument("--poly", required=True)
    p.add_argument("--params", required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--listen", metavar="HOST:PORT")
    where.add_argument("--stdio", action="store_true")
    p.add_argument("--adversary", choices=("wrong-claim", "corrupt-min", "random-consistent"))
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="verify f(x) against a prover")
    p.add_argument("--params", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--x", type=int, required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--connect", metavar="HOST:PORT")
    where.add_argument("--stdio", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--transcript", default="transcript.txt")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte-Carlo soundness simulation")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--ceta", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--strategy", default="corrupt-min", choices=("honest", "corrupt-min", "random-consistent"))
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="count field operations per phase")
    p.add_argument("--degrees", type=_degrees, required=True, help="e.g. 16,32,64")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--ceta", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ParamsError, PolyFormatError, TableError, SessionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
