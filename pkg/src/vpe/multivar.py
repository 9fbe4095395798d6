"""n-variate evaluation by folding one variable at a time.

Coefficients are stored densely with ``i_1`` varying fastest, so the flat
array *is* the univariate polynomial ``g(x) = f(x, x**d, ..., x**(d**(n-1)))``.
Folding the flat array consumes the base-eta digits of ``i_1`` first, then
``i_2`` and so on; the per-variable reduction therefore shares its look-up
table with the univariate protocol on ``g``. What differs is the evaluation
schedule: variable ``j`` is folded at powers of ``x_j`` rather than of ``x``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from vpe.adversary import CorruptMinProver, RandomConsistentProver
from vpe.field import PrimeModulus
from vpe.lookup import LookupTable, build_table
from vpe.ops import OpCount
from vpe.params import ParamsError, ProtocolParams, check_table_size, derive_params, rounds_for
from vpe.poly import Polynomial, PolyFormatError, ZTable, _parse_header, horner, is_decimal, lagrange_table
from vpe.protocol import (
    HonestProver,
    LocalLink,
    Prover,
    Transcript,
    Verdict,
    Verifier,
    _pow,
    drive,
)

MPOLY_MAGIC = "VPE-MPOLY v1"


@dataclass(frozen=True)
class MultiPoly:
    n: int
    d: int
    coeffs: tuple[int, ...]
    modulus: PrimeModulus

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 variables and d >= 1 terms per variable")
        if len(self.coeffs) != self.d**self.n:
            raise ValueError(f"expected {self.d ** self.n} coefficients, got {len(self.coeffs)}")
        if any(not 0 <= c < self.modulus.p for c in self.coeffs):
            raise ValueError("coefficients must be canonical")

    def index(self, exps: Sequence[int]) -> int:
        idx = 0
        for e in reversed(exps):
            idx = idx * self.d + e
        return idx

    def padded(self, eta: int) -> MultiPoly:
        """Zero-pad every variable to eta**r terms."""
        size = eta ** rounds_for(self.d, eta)
        if size == self.d:
            return self
        out = [0] * size**self.n
        for exps in itertools.product(range(self.d), repeat=self.n):
            idx = 0
            for e in reversed(exps):
                idx = idx * size + e
            out[idx] = self.coeffs[self.index(exps)]
        return MultiPoly(self.n, size, tuple(out), self.modulus)

    def to_text(self) -> str:
        body = "".join(f"{c}\n" for c in self.coeffs)
        return f"{MPOLY_MAGIC} modulus={self.modulus.p} n={self.n} d={self.d}\n{body}"

    @classmethod
    def from_text(cls, text: str) -> MultiPoly:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise PolyFormatError("empty file")
        header = _parse_header(lines[0], MPOLY_MAGIC, ("modulus", "n", "d"))
        try:
            modulus = PrimeModulus(header["modulus"])
        except ValueError as exc:
            raise PolyFormatError(str(exc)) from exc
        n, d = header["n"], header["d"]
        if n < 1 or d < 1 or len(lines) - 1 != d**n:
            raise PolyFormatError("coefficient count does not match n and d")
        coeffs = []
        for line in lines[1:]:
            if not is_decimal(line) or int(line) >= modulus.p:
                raise PolyFormatError(f"bad coefficient {line!r}")
            coeffs.append(int(line))
        return cls(n, d, tuple(coeffs), modulus)


def eval_dense(coeffs: Sequence[int], sizes: Sequence[int], points: Sequence[int], p: int,
               ops: OpCount | None = None) -> int:
    """Nested Horner over a dense array, fastest axis first."""
    cur = list(coeffs)
    for size, x in zip(sizes, points):
        cur = [horner(cur[i:i + size], x, p, ops) for i in range(0, len(cur), size)]
    if len(cur) != 1:
        raise ValueError("sizes do not cover the coefficient array")
    return cur[0]


def mv_evaluate(f: MultiPoly, point: Sequence[int], ops: OpCount | None = None) -> int:
    if len(point) != f.n:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {f.n} variables")
    p = f.modulus.p
    return eval_dense(f.coeffs, [f.d] * f.n, [int(x) % p for x in point], p, ops)


def univariate_embed(f: MultiPoly) -> Polynomial:
    return Polynomial(f.coeffs, f.modulus)


def mv_params(f: MultiPoly, eta: int, c_eta: int, cap: int | None = None) -> ProtocolParams:
    """Parameters for the padded polynomial: d_input = (eta**r)**n, so rounds = n*r."""
    size = eta ** rounds_for(f.d, eta)
    params = derive_params(f.modulus, size**f.n, eta, c_eta)
    if cap is None:
        check_table_size(params)
    else:
        check_table_size(params, cap)
    return params


def _per_var_rounds(f: MultiPoly, params: ProtocolParams) -> int:
    if params.r % f.n:
        raise ParamsError("degree", "params do not split evenly over the variables")
    r = params.r // f.n
    if params.eta**r != f.d:
        raise ParamsError("degree", f"per-variable size {f.d} is not eta**{r}; pad first")
    return r


def mv_level_weights(point: Sequence[int], eta: int, r: int, p: int, ops: OpCount | None = None) -> list[int]:
    out = []
    for x in point:
        w = x % p
        for k in range(r):
            out.append(w)
            if k + 1 < r:
                w = _pow(w, eta, p, ops)
    return out


class MultiProver(HonestProver):
    """Honest prover for a padded MultiPoly; ``start`` takes the whole point."""

    def __init__(self, f: MultiPoly, params: ProtocolParams, *, ztable: ZTable | None = None,
                 cache: bool = False, ops: OpCount | None = None) -> None:
        self.mpoly = f
        self.per_var = _per_var_rounds(f, params)
        super().__init__(univariate_embed(f), params, ztable=ztable, cache=cache, ops=ops)

    def start(self, point: Sequence[int]) -> int:
        p = self.params.p
        self.point = [int(x) % p for x in point]
        self.x = self.point[0]
        self.weights = mv_level_weights(self.point, self.params.eta, self.per_var, p, self.ops)
        self._values.clear()
        self.restart()
        return mv_evaluate(self.mpoly, self.point, self.ops)

    def _eval_stripe(self, coeffs: Sequence[int]) -> int:
        eta, r, n = self.params.eta, self.per_var, self.mpoly.n
        j, k = divmod(self.level, r)
        size = eta ** (r - k - 1)
        x_next = _pow(self.point[j], eta ** (k + 1), self.params.p, None) if size > 1 else 0
        sizes = [size] + [self.mpoly.d] * (n - j - 1)
        points = [x_next] + self.point[j + 1:]
        return eval_dense(coeffs, sizes, points, self.params.p, self.ops)


def mv_build_table(f: MultiPoly, params: ProtocolParams, ops: OpCount | None = None) -> LookupTable:
    _per_var_rounds(f, params)
    return build_table(univariate_embed(f), params, ops)


def mv_naive_entry(f: MultiPoly, eta: int, c_eta: int, path: Sequence[int], ztable: ZTable) -> int:
    """Fold variable by variable on an explicit exponent-tuple map."""
    r = rounds_for(f.d, eta)
    if len(path) != f.n * r:
        raise ValueError("path length must be n*r")
    p = f.modulus.p
    terms = {exps: f.coeffs[f.index(exps)] for exps in itertools.product(range(f.d), repeat=f.n)}
    for step, b in enumerate(path):
        j = step // r
        out: dict[tuple[int, ...], int] = {}
        for exps, a in terms.items():
            s, rest = exps[j] % eta, exps[j] // eta
            key = exps[:j] + (rest,) + exps[j + 1:]
            out[key] = (out.get(key, 0) + a * ztable.z[s][b]) % p
        terms = out
    (leaf,) = terms.values()
    return leaf


def mv_run_protocol(
    f: MultiPoly,
    params: ProtocolParams,
    point: Sequence[int],
    prover: str | Prover = "honest",
    seed: int | None = None,
    *,
    table: LookupTable | None = None,
    delta: int = 1,
    verifier_ops: OpCount | None = None,
) -> tuple[Verdict, Transcript]:
    """n*r-round session for a padded MultiPoly at ``point``."""
    if len(point) != f.n:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {f.n} variables")
    r = _per_var_rounds(f, params)
    if table is None:
        table = mv_build_table(f, params)
    if isinstance(prover, str):
        honest = MultiProver(f, params)
        if prover == "honest":
            prover = honest
        elif prover in ("corrupt-min", "wrong-claim"):
            prover = CorruptMinProver(honest, delta)
        elif prover == "random-consistent":
            prover = RandomConsistentProver(honest, delta, random.Random(seed))
        else:
            raise ValueError(f"unknown prover strategy {prover!r}")
    p = params.p
    pt = [int(x) % p for x in point]
    z = lagrange_table(params)
    weights = mv_level_weights(pt, params.eta, r, p, verifier_ops)
    verifier = Verifier(params, table, pt[0], seed=seed, ztable=z, weights=weights, ops=verifier_ops)
    link = _PointLink(prover, pt)
    return drive(verifier, link)


class _PointLink(LocalLink):
    def __init__(self, prover: Prover, point: list[int]) -> None:
        super().__init__(prover)
        self.point = point

    def claim(self, x: int) -> int:
        return self.prover.start(self.point)
