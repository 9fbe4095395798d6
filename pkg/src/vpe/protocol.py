"""Evaluation phase: honest prover, verifier state machine and session driver.

One session evaluates f at a public point x. The prover commits to a claim
once; then ``m`` independent experiments each walk one random challenge path
of ``r`` rounds. In round ``l`` the prover sends the ``eta`` stripe values of
its current folded polynomial; the verifier checks them against its running
reference, draws ``b_l`` uniformly from ``[0, c*eta)``, and moves the reference
to the interpolated value at ``alpha_{b_l}``. The final reference must match
the look-up table entry for the path.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from vpe.lookup import CoefficientTree, LookupTable, build_table
from vpe.messages import Message
from vpe.ops import OpCount
from vpe.params import ProtocolParams
from vpe.poly import Polynomial, ZTable, fold_coeffs, horner, interpolate_eval, lagrange_table


class SessionError(Exception):
    """A broken run, as opposed to a rejection."""


class ProtocolViolation(SessionError):
    pass


def derive_seed(seed: int, *labels: object) -> int:
    key = ":".join(map(str, ("vpe", seed, *labels))).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def experiment_rng(seed: int | None, experiment: int) -> random.Random:
    if seed is None:
        return random.SystemRandom()
    return random.Random(derive_seed(seed, "exp", experiment))


def level_weights(x: int, eta: int, rounds: int, p: int, ops: OpCount | None = None) -> list[int]:
    """Stripe weight base at each level: [x, x**eta, x**(eta**2), ...]."""
    out = [x % p]
    for _ in range(rounds - 1):
        out.append(_pow(out[-1], eta, p, ops))
    return out


def _pow(a: int, e: int, p: int, ops: OpCount | None) -> int:
    result, base, muls = 1, a, 0
    while e:
        if e & 1:
            result = result * base % p
            muls += 1
        e >>= 1
        if e:
            base = base * base % p
            muls += 1
    if ops is not None:
        ops.mul += muls
    return result


@dataclass
class Verdict:
    accepted: bool
    reason: str
    claim: int
    experiment: int | None = None
    level: int | None = None

    def __bool__(self) -> bool:
        return self.accepted


@dataclass
class Transcript:
    records: list[Message] = field(default_factory=list)

    def add(self, verb: str, *args: int | str) -> None:
        self.records.append(Message(verb, tuple(args)))

    def to_text(self) -> str:
        return "".join(f"{rec}\n" for rec in self.records)

    @classmethod
    def from_text(cls, text: str) -> Transcript:
        from vpe.messages import decode

        return cls([decode(line.encode() + b"\n") for line in text.splitlines()])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    def challenges(self) -> dict[int, list[int]]:
        """Challenge sequence per experiment."""
        out: dict[int, list[int]] = {}
        for rec in self.records:
            if rec.verb == "CHAL":
                out.setdefault(rec.args[0], []).append(rec.args[2])
        return out


class Prover(Protocol):
    rounds: int

    def start(self, x: int) -> int: ...
    def restart(self) -> None: ...
    def round(self) -> list[int]: ...
    def accept_challenge(self, b: int) -> None: ...


class HonestProver:
    """Evaluates stripes of its current folded polynomial.

    With ``cache=True`` folded coefficient vectors and round values are
    memoized per challenge prefix, so repeated experiments reuse work.
    """

    def __init__(
        self,
        f: Polynomial,
        params: ProtocolParams,
        *,
        ztable: ZTable | None = None,
        cache: bool = False,
        ops: OpCount | None = None,
    ) -> None:
        if f.modulus != params.modulus:
            raise ValueError("polynomial and params use different moduli")
        if len(f.coeffs) > params.d_pad:
            raise ValueError(f"polynomial has {len(f.coeffs)} terms, params allow {params.d_pad}")
        self.params = params
        self.ops = ops
        self.z = ztable if ztable is not None else lagrange_table(params)
        self.coeffs = list(f.padded(params.d_pad).coeffs)
        self.rounds = params.r
        self._tree = CoefficientTree(self.coeffs, params.eta, self.z, ops) if cache else None
        self._values: dict[tuple[int, ...], list[int]] = {}
        self.x: int | None = None
        self.restart()

    def _schedule(self, x: int) -> list[int]:
        # one extra entry: the evaluation point of the last round's stripes
        return level_weights(x, self.params.eta, self.rounds + 1, self.params.p, self.ops)

    def start(self, x: int) -> int:
        self.x = x % self.params.p
        self.weights = self._schedule(self.x)
        self._values.clear()
        self.restart()
        return horner(self.coeffs, self.x, self.params.p, self.ops)

    def restart(self) -> None:
        self.level = 0
        self.path: list[int] = []
        self.current = self.coeffs

    def weight(self, level: int) -> int:
        """Base whose powers weight the stripes in the check of round ``level + 1``."""
        return self.weights[level]

    def _eval_stripe(self, coeffs: Sequence[int]) -> int:
        return horner(coeffs, self.weights[self.level + 1], self.params.p, self.ops)

    def round(self) -> list[int]:
        if self.x is None:
            raise ProtocolViolation("round requested before start")
        if self.level >= self.rounds:
            raise ProtocolViolation("no rounds left in this experiment")
        key = tuple(self.path)
        if self._tree is not None and key in self._values:
            return list(self._values[key])
        eta = self.params.eta
        vals = [self._eval_stripe(self.current[s::eta]) for s in range(eta)]
        if self._tree is not None:
            self._values[key] = vals
        return list(vals)

    def accept_challenge(self, b: int) -> None:
        if not 0 <= b < self.params.c_eta:
            raise ProtocolViolation(f"challenge {b} out of range [0, {self.params.c_eta})")
        if self.level >= self.rounds:
            raise ProtocolViolation("challenge past the last round")
        self.path.append(b)
        if self._tree is not None:
            self.current = self._tree.node(self.path)
        else:
            self.current = fold_coeffs(self.current, self.z.column(b), self.params.p, self.ops)
        self.level += 1


class Verifier:
    """Verifier side of one session; experiments are run one after another."""

    def __init__(
        self,
        params: ProtocolParams,
        table: LookupTable,
        x: int,
        *,
        seed: int | None = None,
        ztable: ZTable | None = None,
        weights: Sequence[int] | None = None,
        ops: OpCount | None = None,
    ) -> None:
        table.check_params(params)
        self.params = params
        self.table = table
        self.seed = seed
        self.ops = ops
        self.z = ztable if ztable is not None else lagrange_table(params)
        self.x = x % params.p
        if weights is None:
            weights = level_weights(self.x, params.eta, params.r, params.p, ops)
        self.weights = list(weights)
        self.rounds = len(self.weights)
        self.claim: int | None = None
        self.max_values_read = 0

    def begin(self, claim: int) -> None:
        if not 0 <= claim < self.params.p:
            raise ProtocolViolation(f"claim {claim} is not a canonical field element")
        self.claim = claim

    def start_experiment(self, experiment: int, rng: random.Random | None = None) -> None:
        if self.claim is None:
            raise ProtocolViolation("experiment started before the claim")
        self.experiment = experiment
        self.rng = rng if rng is not None else experiment_rng(self.seed, experiment)
        self.reference = self.claim
        self.level = 0
        self.path: list[int] = []

    def check_round(self, values: Sequence[int]) -> int | None:
        """Run the linear check; return the next challenge, or None to reject."""
        prm = self.params
        if len(values) != prm.eta:
            raise ProtocolViolation(f"expected {prm.eta} round values, got {len(values)}")
        if self.level >= self.rounds:
            raise ProtocolViolation("round values past the last level")
        if any(not 0 <= v < prm.p for v in values):
            raise ProtocolViolation("round value is not a canonical field element")
        self.max_values_read = max(self.max_values_read, len(values))
        if horner(values, self.weights[self.level], prm.p, self.ops) != self.reference:
            return None
        b = self.rng.randrange(prm.c_eta)
        self.reference = interpolate_eval(values, b, self.z, self.ops)
        self.path.append(b)
        self.level += 1
        return b

    def finalize(self) -> bool:
        if self.level != self.rounds:
            raise ProtocolViolation("finalize before the last round")
        return self.reference == self.table.get(self.path)


class LocalLink:
    """In-process transport: calls the prover directly."""

    def __init__(self, prover: Prover) -> None:
        self.prover = prover

    def claim(self, x: int) -> int:
        return self.prover.start(x)

    def round(self, experiment: int, level: int) -> list[int]:
        return self.prover.round()

    def challenge(self, experiment: int, level: int, b: int) -> None:
        self.prover.accept_challenge(b)

    def final(self, experiment: int, value: int) -> None:
        self.prover.restart()

    def close(self, verdict: Verdict) -> None:
        pass


def run_experiment(verifier: Verifier, link, experiment: int, transcript: Transcript,
                   rng: random.Random | None = None) -> tuple[str, int | None] | None:
    """One challenge path. Returns None on pass, else (reason, failing level)."""
    verifier.start_experiment(experiment, rng)
    for level in range(1, verifier.rounds + 1):
        values = link.round(experiment, level)
        transcript.add("ROUND", experiment, level, *values)
        b = verifier.check_round(values)
        if b is None:
            return "check", level
        transcript.add("CHAL", experiment, level, b)
        link.challenge(experiment, level, b)
    transcript.add("FINAL", experiment, verifier.reference)
    if not verifier.finalize():
        return "final", verifier.rounds
    return None


def drive(verifier: Verifier, link, experiments: int | None = None) -> tuple[Verdict, Transcript]:
    """Run a full session, rejecting at the first failed check."""
    m = verifier.params.m if experiments is None else experiments
    transcript = Transcript()
    claim = link.claim(verifier.x)
    verifier.begin(claim)
    transcript.add("CLAIM", claim)
    verdict = Verdict(True, "ok", claim)
    for e in range(m):
        failure = run_experiment(verifier, link, e, transcript)
        if failure is not None:
            verdict = Verdict(False, failure[0], claim, e, failure[1])
            break
        link.final(e, verifier.reference)
    transcript.add("VERDICT", "accept" if verdict.accepted else "reject", verdict.reason)
    link.close(verdict)
    return verdict, transcript


STRATEGIES = ("honest", "corrupt-min", "random-consistent")


def make_prover(
    strategy: str,
    f: Polynomial,
    params: ProtocolParams,
    *,
    delta: int = 1,
    seed: int | None = None,
    cache: bool = False,
    ops: OpCount | None = None,
) -> Prover:
    from vpe.adversary import CorruptMinProver, RandomConsistentProver

    honest = HonestProver(f, params, cache=cache, ops=ops)
    if strategy == "honest":
        return honest
    if strategy in ("corrupt-min", "wrong-claim"):
        return CorruptMinProver(honest, delta)
    if strategy == "random-consistent":
        return RandomConsistentProver(honest, delta, random.Random(seed))
    raise ValueError(f"unknown prover strategy {strategy!r}; expected one of {STRATEGIES}")


def run_protocol(
    f: Polynomial,
    params: ProtocolParams,
    x: int,
    prover: str | Prover = "honest",
    seed: int | None = None,
    *,
    table: LookupTable | None = None,
    delta: int = 1,
    verifier_ops: OpCount | None = None,
) -> tuple[Verdict, Transcript]:
    """In-process session of ``prover`` against a fresh verifier."""
    if table is None:
        table = build_table(f, params)
    if isinstance(prover, str):
        prover = make_prover(prover, f, params, delta=delta, seed=seed)
    verifier = Verifier(params, table, x, seed=seed, ops=verifier_ops)
    return drive(verifier, LocalLink(prover))
