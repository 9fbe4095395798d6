"""Exit criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary ends with
one ``[PASS]``/``[FAIL]`` line per criterion.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from vpe.field import DEFAULT_MODULUS, PrimeModulus
from vpe.lookup import all_paths, build_table, naive_entry
from vpe.messages import DecodeError, decode
from vpe.multivar import MultiPoly, mv_build_table, mv_evaluate, mv_params, mv_run_protocol, univariate_embed
from vpe.params import MAX_TABLE_ENTRIES, ParamSelector, derive_params, select_eta
from vpe.poly import Polynomial, evaluate, lagrange_table, stripe
from vpe.protocol import run_protocol
from vpe.simulate import bench, binomial_sigma, exact_single_acceptance, random_poly, simulate
from vpe.wire import LoopbackChannel, connect_verifier, session_factory, start_server

BIG = PrimeModulus(DEFAULT_MODULUS)
F97 = PrimeModulus(97)


@pytest.fixture(scope="module")
def corrupt_min_report():
    return simulate(2, 4, 4, "corrupt-min", 20_000, seed=2024)


@pytest.mark.acceptance(1, "build_table equals naive_entry on every tuple")
def test_oracle_equivalence():
    start = time.perf_counter()
    combos = [
        (d, eta, c_eta)
        for d in (4, 16, 64, 256)
        for eta in (2, 4)
        for c_eta in (3, 4, 8)
        if c_eta > eta
    ]
    polys = 0
    for d, eta, c_eta in combos:
        prm = derive_params(BIG, d, eta, c_eta)
        if prm.table_size > MAX_TABLE_ENTRIES:
            continue  # (256, 2, 8): 8**8 entries, beyond the table-size guard
        # exhaustive naive checks cost about lambda*d; one polynomial suffices for the two largest
        count = 1 if prm.table_size * d > 5_000_000 else 8
        z = lagrange_table(prm)
        rng = random.Random(f"{d}-{eta}-{c_eta}")
        for _ in range(count):
            f = random_poly(d, BIG, rng)
            table = build_table(f, prm, ztable=z)
            for idx, path in enumerate(all_paths(c_eta, prm.r)):
                assert table.entries[idx] == naive_entry(f, prm, path, z), (d, eta, c_eta, path)
            polys += 1
    elapsed = time.perf_counter() - start
    assert polys >= 100
    assert elapsed < 60, f"took {elapsed:.1f}s"


@pytest.mark.acceptance(2, "folding identity, 10^3 cases per parameter set")
@pytest.mark.parametrize("eta, d", [(2, 16), (3, 27), (4, 64), (16, 256)])
def test_folding_identity(eta, d):
    p = BIG.p
    rng = random.Random(eta)
    for trial in range(1000):
        f = random_poly(d, BIG, rng)
        x = (0, 1)[trial] if trial < 2 else rng.randrange(p)
        y = pow(x, eta, p)
        lhs = sum(pow(x, s, p) * evaluate(stripe(f, s, eta), y) for s in range(eta)) % p
        assert lhs == evaluate(f, x)


@pytest.mark.acceptance(3, "completeness, 1000/1000 honest runs accepted")
def test_completeness():
    rng = random.Random(3)
    choices = [(eta, c_eta) for eta in (2, 3, 4) for c_eta in (eta + 1, 2 * eta, 2 * eta + 1)]
    accepted = runs = 0
    while runs < 1000:
        d = rng.randint(1, 256)
        eta, c_eta = rng.choice(choices)
        prm = derive_params(BIG, d, eta, c_eta)
        # small c gives m = (c/(c-1))**r in the thousands; keep runs desk-sized
        if prm.table_size > 8192 or prm.m > 256:
            continue
        f = random_poly(d, BIG, rng)
        x = rng.randrange(BIG.p)
        verdict, _ = run_protocol(f, prm, x, seed=rng.getrandbits(32))
        accepted += verdict.accepted and verdict.claim == evaluate(f, x)
        runs += 1
    assert accepted == 1000


@pytest.mark.acceptance(4, "per-experiment soundness 7/16 +/- 0.02, <= 0.75")
def test_single_experiment_soundness(corrupt_min_report):
    rep = corrupt_min_report
    closed_form = 1 - (1 - Fraction(1, 4)) ** 2
    assert closed_form == Fraction(7, 16)
    prm = derive_params(F97, 4, 2, 4)
    f = Polynomial.from_ints([1, 2, 3, 4], F97)
    assert exact_single_acceptance(f, prm, 2, "corrupt-min") == 7 / 16
    assert rep.r == 2 and rep.trials == 20_000
    assert abs(rep.per_experiment_rate - 7 / 16) <= 0.02
    assert rep.per_experiment_rate <= rep.single_bound == 0.75


@pytest.mark.acceptance(5, "amplified soundness <= 0.05; wire rejection >= 1/2 - 3 sigma")
def test_amplified_soundness(corrupt_min_report):
    rep = corrupt_min_report
    assert rep.m == 4
    assert rep.full_rate <= 0.05
    sigma = binomial_sigma(rep.full_rate, rep.trials)
    assert (1 - rep.full_rate) - 0.5 >= 5 * sigma

    prm = derive_params(F97, 4, 2, 4)
    f = random_poly(4, F97, random.Random(5))
    table = build_table(f, prm)
    server = start_server(f, prm, strategy="corrupt-min")
    try:
        runs = 200
        rejected = sum(not connect_verifier(prm, table, 11, server.endpoint, seed)[0].accepted for seed in range(runs))
    finally:
        server.shutdown()
        server.server_close()
    rate = rejected / runs
    assert rejected >= 70
    assert rate >= 0.5 - 3 * binomial_sigma(0.5, runs)


@pytest.mark.acceptance(6, "exactly r challenges per experiment; eta=16, d=2^16 gives r=4")
def test_round_complexity():
    eta, c_eta = select_eta(2**16, ParamSelector(1, Fraction(2)))
    assert eta == 16
    prm = derive_params(BIG, 2**16, eta, c_eta)
    assert prm.r == 4
    f = random_poly(2**16, BIG, random.Random(6))
    verdict, transcript = run_protocol(f, prm, 12345, seed=6)
    assert verdict.accepted
    chals = transcript.challenges()
    assert len(chals) == prm.m
    assert all(len(path) == 4 for path in chals.values())

    rng = random.Random(60)
    for d, eta, c_eta in [(4, 2, 4), (100, 3, 4), (256, 4, 8), (1000, 10, 11)]:
        prm = derive_params(BIG, d, eta, c_eta)
        _, transcript = run_protocol(random_poly(d, BIG, rng), prm, rng.randrange(BIG.p), seed=d)
        assert all(len(path) == prm.r for path in transcript.challenges().values())


@pytest.mark.acceptance(7, "verifier ops per m*r vary < 2x over d in {16, 256, 4096}")
def test_verifier_efficiency():
    rows = bench([16, 256, 4096], 2, 4, seed=7)
    assert all(row.accepted for row in rows)
    per_round = [row.verifier_per_round for row in rows]
    assert max(per_round) / min(per_round) < 2
    assert all(row.max_values_per_round <= row.eta for row in rows)


@pytest.mark.acceptance(8, "init op ratio per extra round equals c*eta +/- 30%")
def test_init_scaling():
    rows = bench([2**r for r in range(2, 7)], 2, 4, seed=8)
    assert [row.r for row in rows] == [2, 3, 4, 5, 6]
    for prev, row in zip(rows, rows[1:]):
        ratio = row.init.mul / prev.init.mul
        assert abs(ratio - 4) <= 0.3 * 4, ratio


@pytest.mark.acceptance(9, "multivariate embedding identity; n*r challenges")
def test_multivariate():
    rng = random.Random(9)
    for _ in range(1000):
        n, d = rng.choice([2, 3]), rng.choice([2, 4])
        f = MultiPoly(n, d, tuple(rng.randrange(BIG.p) for _ in range(d**n)), BIG)
        x = rng.randrange(BIG.p)
        assert evaluate(univariate_embed(f), x) == mv_evaluate(f, [pow(x, d**j, BIG.p) for j in range(n)])
    for n in (2, 3):
        for d in (2, 4):
            f = MultiPoly(n, d, tuple(rng.randrange(BIG.p) for _ in range(d**n)), BIG)
            prm = mv_params(f, 2, 4)
            r = int(math.log2(d))
            table = mv_build_table(f, prm)
            for seed in range(5):
                point = [rng.randrange(BIG.p) for _ in range(n)]
                verdict, transcript = mv_run_protocol(f, prm, point, seed=seed, table=table)
                assert verdict.accepted
                assert all(len(path) == n * r for path in transcript.challenges().values())


def _malformed(rng, digest):
    """A random line that fails to decode."""
    kind = rng.randrange(5)
    if kind == 0:
        line = bytes(rng.randrange(256) for _ in range(rng.randint(0, 60))) + b"\n"
    elif kind == 1:
        verb = rng.choice([b"HELLO", b"EVAL", b"CHAL", b"FINAL", b"ROUND", b"VERDICT", b"ERROR", b"NOPE"])
        args = [rng.choice([b"0", b"01", b"-1", b"x", b"", b"1e3", b"v1", digest[:10], b"\xc3\xa9"]) for _ in range(rng.randint(0, 6))]
        line = b" ".join([verb, *args]) + rng.choice([b"\n", b"\r\n", b" \n"])
    elif kind == 2:
        line = b"EVAL " + b"9" * rng.randint(65_536, 70_000) + b"\n"
    elif kind == 3:
        line = b"HELLO v1 " + digest + b"\nEVAL 1\n"
    else:
        line = rng.choice([b"CHAL 0 1", b"FINAL 0", b"HELLO v1"]) + b" " + b"9" * rng.randint(0, 5)
    try:
        decode(line)
    except DecodeError:
        return line
    return b"BAD\n"


@pytest.mark.acceptance(10, "loopback transcripts identical to in-process; fuzzing yields only ERROR")
def test_transport_transparency():
    prm = derive_params(BIG, 64, 4, 8)
    f = random_poly(64, BIG, random.Random(10))
    table = build_table(f, prm)
    factory = session_factory(f, prm)
    server = start_server(f, prm)
    try:
        for seed in range(100):
            x = seed * 7919
            local = run_protocol(f, prm, x, seed=seed, table=table)
            loop = connect_verifier(prm, table, x, LoopbackChannel(factory()), seed)
            tcp = connect_verifier(prm, table, x, server.endpoint, seed)
            assert loop[1].to_text().encode() == local[1].to_text().encode() == tcp[1].to_text().encode()
            assert loop[0] == local[0] == tcp[0]
    finally:
        server.shutdown()
        server.server_close()

    digest = prm.digest().encode()
    hello = b"HELLO v1 " + digest + b"\n"
    rng = random.Random(100)
    start = time.perf_counter()
    for i in range(100_000):
        session = factory()
        # hit the session in each of its states
        for line in (hello, b"EVAL 3\n")[: i % 3]:
            session.handle(line)
        replies = session.handle(_malformed(rng, digest))
        assert len(replies) == 1 and replies[0].startswith(b"ERROR "), replies
        assert session.closed
    elapsed = time.perf_counter() - start
    assert elapsed < 10, f"fuzzing took {elapsed:.1f}s"
