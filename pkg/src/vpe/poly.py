"""Dense polynomials, the Lagrange basis table, stripes and folding.

Coefficients are canonical ints, constant term first. A polynomial of length
``n`` (divisible by ``eta``) splits into ``eta`` stripes

    f(x) = sum_s x**s * stripe(f, s)(x**eta)

and folding at challenge ``b`` replaces ``f`` by ``sum_s Z_s(alpha_b) * stripe(f, s)``,
the degree-(eta-1) interpolant through the stripes evaluated at ``alpha_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from operator import mul
from typing import Sequence

from vpe.field import FieldElement, PrimeModulus
from vpe.ops import OpCount, tally
from vpe.params import ProtocolParams

POLY_MAGIC = "VPE-POLY v1"


class PolyFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple[int, ...]
    modulus: PrimeModulus

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        p = self.modulus.p
        if any(not 0 <= c < p for c in self.coeffs):
            raise ValueError(f"coefficients must be canonical mod {p}")

    @classmethod
    def from_ints(cls, values: Sequence[int], modulus: PrimeModulus) -> Polynomial:
        p = modulus.p
        return cls(tuple(int(v) % p for v in values), modulus)

    @classmethod
    def zero(cls, length: int, modulus: PrimeModulus) -> Polynomial:
        return cls((0,) * length, modulus)

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def elements(self) -> list[FieldElement]:
        return [FieldElement(c, self.modulus) for c in self.coeffs]

    def padded(self, length: int) -> Polynomial:
        """Append high-order zeros up to ``length`` terms."""
        if length < len(self.coeffs):
            raise ValueError(f"cannot pad {len(self.coeffs)} terms down to {length}")
        if length == len(self.coeffs):
            return self
        return Polynomial(self.coeffs + (0,) * (length - len(self.coeffs)), self.modulus)

    def padded_for(self, params: ProtocolParams) -> Polynomial:
        if self.modulus != params.modulus:
            raise ValueError("polynomial and params use different moduli")
        if len(self.coeffs) > params.d_pad:
            raise ValueError(f"polynomial has {len(self.coeffs)} terms, params allow {params.d_pad}")
        return self.padded(params.d_pad)

    def to_text(self) -> str:
        body = "".join(f"{c}\n" for c in self.coeffs)
        return f"{POLY_MAGIC} modulus={self.modulus.p} d={len(self.coeffs)}\n{body}"

    @classmethod
    def from_text(cls, text: str) -> Polynomial:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise PolyFormatError("empty polynomial file")
        header = _parse_header(lines[0], POLY_MAGIC, ("modulus", "d"))
        try:
            modulus = PrimeModulus(header["modulus"])
        except ValueError as exc:
            raise PolyFormatError(str(exc)) from exc
        d = header["d"]
        if d < 1 or len(lines) != d + 1:
            raise PolyFormatError(f"header announces d={d} but file has {len(lines) - 1} coefficients")
        coeffs = []
        for line in lines[1:]:
            if not is_decimal(line) or int(line) >= modulus.p:
                raise PolyFormatError(f"bad coefficient {line!r}")
            coeffs.append(int(line))
        return cls(tuple(coeffs), modulus)

    @classmethod
    def load(cls, path) -> Polynomial:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def is_decimal(s: str) -> bool:
    return s.isascii() and s.isdigit() and (s == "0" or s[0] != "0")


def _parse_header(line: str, magic: str, keys: Sequence[str]) -> dict[str, int]:
    if not line.startswith(magic + " "):
        raise PolyFormatError(f"expected header starting with {magic!r}")
    parts = line[len(magic) + 1:].split(" ")
    if len(parts) != len(keys):
        raise PolyFormatError(f"header must carry {', '.join(keys)}")
    out = {}
    for part, key in zip(parts, keys):
        name, sep, value = part.partition("=")
        if name != key or not sep or not is_decimal(value):
            raise PolyFormatError(f"bad header field {part!r}")
        out[key] = int(value)
    return out


def horner(coeffs: Sequence[int], x: int, p: int, ops: OpCount | None = None) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    n = len(coeffs) - 1
    tally(ops, mul=n, add=n)
    return acc


def evaluate(f: Polynomial, x: int | FieldElement, ops: OpCount | None = None) -> int:
    return horner(f.coeffs, int(x) % f.modulus.p, f.modulus.p, ops)


@dataclass(frozen=True)
class ZTable:
    """z[i][j] = Z_i(alpha_j) for i < eta, j < c*eta."""

    z: tuple[tuple[int, ...], ...]
    p: int

    @property
    def eta(self) -> int:
        return len(self.z)

    @property
    def c_eta(self) -> int:
        return len(self.z[0])

    @cached_property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.z))

    def column(self, b: int) -> tuple[int, ...]:
        return self.columns[b]


def lagrange_table(params: ProtocolParams, ops: OpCount | None = None) -> ZTable:
    p = params.p
    alphas = params.L
    eta = params.eta
    rows = []
    for i in range(eta):
        den = 1
        for k in range(eta):
            if k != i:
                den = den * (alphas[i] - alphas[k]) % p
        den_inv = pow(den, -1, p)
        row = []
        for a_j in alphas:
            num = 1
            for k in range(eta):
                if k != i:
                    num = num * (a_j - alphas[k]) % p
            row.append(num * den_inv % p)
        rows.append(tuple(row))
    # eta-1 products per denominator; eta-1 per numerator plus the scaling
    tally(ops, mul=eta * (eta - 1) + eta * len(alphas) * eta, add=eta * (eta - 1) * (1 + len(alphas)), inv=eta)
    return ZTable(tuple(rows), p)


def stripe(f: Polynomial, s: int, eta: int) -> Polynomial:
    if len(f.coeffs) % eta:
        raise ValueError(f"length {len(f.coeffs)} is not divisible by eta={eta}")
    if not 0 <= s < eta:
        raise ValueError(f"stripe index {s} out of range for eta={eta}")
    return Polynomial(f.coeffs[s::eta], f.modulus)


def fold_coeffs(coeffs: Sequence[int], col: Sequence[int], p: int, ops: OpCount | None = None) -> list[int]:
    """One folding step on raw coefficients with Z-column ``col`` (length eta)."""
    eta = len(col)
    n = len(coeffs)
    if n % eta:
        raise ValueError(f"length {n} is not divisible by eta={eta}")
    if eta == 2:
        z0, z1 = col
        out = [(z0 * coeffs[i] + z1 * coeffs[i + 1]) % p for i in range(0, n, 2)]
    else:
        out = [sum(map(mul, coeffs[i:i + eta], col)) % p for i in range(0, n, eta)]
    tally(ops, mul=n, add=n - len(out))
    return out


def fold(f: Polynomial, b: int, ztable: ZTable, ops: OpCount | None = None) -> Polynomial:
    if not 0 <= b < ztable.c_eta:
        raise ValueError(f"challenge {b} out of range [0, {ztable.c_eta})")
    return Polynomial(tuple(fold_coeffs(f.coeffs, ztable.column(b), f.modulus.p, ops)), f.modulus)


def interpolate_eval(values: Sequence[int], b: int, ztable: ZTable, ops: OpCount | None = None) -> int:
    """Evaluate the interpolant through (alpha_s, values[s]) at alpha_b."""
    if len(values) != ztable.eta:
        raise ValueError(f"expected {ztable.eta} values, got {len(values)}")
    col = ztable.column(b)
    tally(ops, mul=len(col), add=len(col) - 1)
    return sum(map(mul, values, col)) % ztable.p
