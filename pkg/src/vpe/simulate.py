"""Monte-Carlo soundness simulation and operation-count benchmarks."""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field

from vpe.field import DEFAULT_MODULUS, PrimeModulus
from vpe.lookup import LazyTable, LookupTable, all_paths, build_table
from vpe.ops import OpCount
from vpe.params import MAX_TABLE_ENTRIES, ProtocolParams, check_table_size, derive_params
from vpe.poly import Polynomial
from vpe.protocol import LocalLink, Transcript, Verifier, derive_seed, drive, make_prover, run_experiment


def random_poly(d: int, modulus: PrimeModulus, rng: random.Random) -> Polynomial:
    return Polynomial(tuple(rng.randrange(modulus.p) for _ in range(d)), modulus)


def binomial_sigma(rate: float, n: int) -> float:
    return math.sqrt(rate * (1 - rate) / n)


@dataclass
class SimulationReport:
    strategy: str
    trials: int
    experiments: int
    per_experiment_rate: float
    per_experiment_sigma: float
    full_rate: float
    full_sigma: float
    single_bound: float
    tight_bound: float
    amplified_bound: float
    seed: int
    eta: int
    c_eta: int
    d: int
    r: int
    m: int

    def lines(self) -> list[str]:
        return [
            f"strategy            {self.strategy}",
            f"params              d={self.d} eta={self.eta} ceta={self.c_eta} r={self.r} m={self.m}",
            f"trials              {self.trials} ({self.experiments} experiments), seed={self.seed}",
            f"per-experiment      {self.per_experiment_rate:.4f} +/- {self.per_experiment_sigma:.4f}",
            f"  single bound      {self.single_bound:.4f}  (1-(1-1/c)^r)",
            f"  tight bound       {self.tight_bound:.4f}  (1-(1-(eta-1)/(c*eta))^r)",
            f"full protocol       {self.full_rate:.4f} +/- {self.full_sigma:.4f}",
            f"  amplified bound   {self.amplified_bound:.4f}  (p^m)",
        ]

    def to_dict(self) -> dict:
        return asdict(self)


def simulate(
    eta: int,
    c_eta: int,
    degree: int,
    strategy: str,
    trials: int,
    seed: int,
    *,
    delta: int = 1,
    modulus: int = DEFAULT_MODULUS,
) -> SimulationReport:
    """Repeat the protocol with fresh verifier coins against one fixed claim.

    Every trial runs all ``m`` experiments (no early exit) so both the
    per-experiment and the whole-protocol acceptance rates are measured.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    params = derive_params(PrimeModulus(modulus), degree, eta, c_eta)
    check_table_size(params)
    rng = random.Random(derive_seed(seed, "poly"))
    f = random_poly(degree, params.modulus, rng)
    x = rng.randrange(params.p)
    table = build_table(f, params)
    prover = make_prover(strategy, f, params, delta=delta, seed=derive_seed(seed, "adversary"), cache=True)
    claim = prover.start(x)
    verifier = Verifier(params, table, x)
    verifier.begin(claim)
    link = LocalLink(prover)
    accepted_exps = accepted_full = 0
    for t in range(trials):
        all_ok = True
        for e in range(params.m):
            prover.restart()
            coins = random.Random(derive_seed(seed, "trial", t, e))
            ok = run_experiment(verifier, link, e, Transcript(), coins) is None
            accepted_exps += ok
            all_ok &= ok
        accepted_full += all_ok
    n_exp = trials * params.m
    per = accepted_exps / n_exp
    full = accepted_full / trials
    return SimulationReport(
        strategy=strategy,
        trials=trials,
        experiments=n_exp,
        per_experiment_rate=per,
        per_experiment_sigma=binomial_sigma(per, n_exp),
        full_rate=full,
        full_sigma=binomial_sigma(full, trials),
        single_bound=params.single_bound(),
        tight_bound=params.tight_single_bound(),
        amplified_bound=params.amplified_bound(),
        seed=seed,
        eta=eta,
        c_eta=c_eta,
        d=degree,
        r=params.r,
        m=params.m,
    )


class ScriptedCoins:
    """Stand-in for the verifier's coin source that replays a fixed path."""

    def __init__(self, path):
        self._it = iter(path)

    def randrange(self, n: int) -> int:
        b = next(self._it)
        if not 0 <= b < n:
            raise ValueError("scripted challenge out of range")
        return b


def exact_single_acceptance(f: Polynomial, params: ProtocolParams, x: int, strategy: str,
                            delta: int = 1, table: LookupTable | None = None) -> float:
    """Fraction of all (c*eta)**r challenge paths on which one experiment passes.

    Only meaningful for deterministic provers.
    """
    if table is None:
        table = build_table(f, params)
    prover = make_prover(strategy, f, params, delta=delta)
    claim = prover.start(x)
    verifier = Verifier(params, table, x)
    verifier.begin(claim)
    link = LocalLink(prover)
    passed = 0
    for path in all_paths(params.c_eta, params.r):
        prover.restart()
        passed += run_experiment(verifier, link, 0, Transcript(), ScriptedCoins(path)) is None
    return passed / params.table_size


@dataclass
class OpCountReport:
    d: int
    eta: int
    c_eta: int
    r: int
    m: int
    table_size: int
    lazy: bool
    init: OpCount = field(default_factory=OpCount)
    prover: OpCount = field(default_factory=OpCount)
    verifier: OpCount = field(default_factory=OpCount)
    accepted: bool = False
    max_values_per_round: int = 0

    @property
    def verifier_per_round(self) -> float:
        return self.verifier.mul / (self.m * self.r)


def bench(
    degrees,
    eta: int,
    c_eta: int,
    seed: int,
    *,
    modulus: int = DEFAULT_MODULUS,
    table_cap: int = MAX_TABLE_ENTRIES,
) -> list[OpCountReport]:
    """Measure field operations per phase for an honest session at each degree.

    Degrees whose table exceeds ``table_cap`` switch to a lazily computed
    table and a memoizing prover; their init and prover columns then reflect
    only the work actually touched, so they are flagged ``lazy``.
    """
    field_ = PrimeModulus(modulus)
    rows = []
    for d in degrees:
        if eta ** round(math.log(d, eta)) != d:
            raise ValueError(f"degree {d} is not a power of eta={eta}")
        params = derive_params(field_, d, eta, c_eta)
        rng = random.Random(derive_seed(seed, "bench", d))
        f = random_poly(d, field_, rng)
        x = rng.randrange(field_.p)
        lazy = params.table_size > table_cap
        row = OpCountReport(d, eta, c_eta, params.r, params.m, params.table_size, lazy)
        if lazy:
            table = LazyTable(f, params, ops=row.init)
        else:
            table = build_table(f, params, ops=row.init)
        prover = make_prover("honest", f, params, cache=lazy, ops=row.prover)
        verifier = Verifier(params, table, x, seed=derive_seed(seed, "coins", d), ops=row.verifier)
        verdict, _ = drive(verifier, LocalLink(prover))
        row.accepted = verdict.accepted
        row.max_values_per_round = verifier.max_values_read
        rows.append(row)
    return rows


def bench_lines(rows: list[OpCountReport]) -> list[str]:
    out = [f"{'d':>6} {'r':>3} {'m':>6} {'lambda':>9} {'init_mul':>11} {'x':>5} "
           f"{'prover_mul':>11} {'x':>5} {'verif_mul':>10} {'per m*r':>8}"]
    prev = None
    for row in rows:
        ri = rp = "-"
        if prev is not None and not row.lazy and not prev.lazy:
            ri = f"{row.init.mul / prev.init.mul:.2f}"
            rp = f"{row.prover.mul / prev.prover.mul:.2f}"
        init = "lazy" if row.lazy else str(row.init.mul)
        out.append(
            f"{row.d:>6} {row.r:>3} {row.m:>6} {row.table_size:>9} {init:>11} {ri:>5} "
            f"{row.prover.mul:>11} {rp:>5} {row.verifier.mul:>10} {row.verifier_per_round:>8.2f}"
        )
        prev = row
    return out
