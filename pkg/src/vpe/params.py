"""Public protocol parameters and their text serialization."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

from vpe.field import PrimeModulus

PARAMS_MAGIC = "VPE-PARAMS v1"

# Desk-scale guard on (c*eta)**r table entries.
MAX_TABLE_ENTRIES = 1 << 20


class ParamsError(ValueError):
    """Invalid parameter combination; ``code`` names the violated precondition."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


def rounds_for(d_input: int, eta: int) -> int:
    """Smallest r >= 1 with eta**r >= d_input, i.e. ceil(log d / log eta)."""
    r, span = 1, eta
    while span < d_input:
        span *= eta
        r += 1
    return r


def amplification(eta: int, c_eta: int, r: int) -> int:
    """ceil((c/(c-1))**r) with c = c_eta/eta, computed exactly."""
    q = Fraction(c_eta, c_eta - eta) ** r
    return math.ceil(q)


@dataclass(frozen=True)
class ProtocolParams:
    modulus: PrimeModulus
    d_input: int
    eta: int
    c_eta: int
    r: int
    m: int

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def c(self) -> Fraction:
        return Fraction(self.c_eta, self.eta)

    @property
    def d_pad(self) -> int:
        return self.eta**self.r

    @property
    def table_size(self) -> int:
        return self.c_eta**self.r

    @property
    def L(self) -> tuple[int, ...]:
        return tuple(range(self.c_eta))

    @property
    def H(self) -> tuple[int, ...]:
        return tuple(range(self.eta))

    def single_bound(self) -> float:
        """Upper bound 1 - (1 - 1/c)**r on one experiment's cheating success."""
        return float(1 - (1 - 1 / self.c) ** self.r)

    def tight_single_bound(self) -> float:
        """Escape probability when each round has eta-1 agreement points out of c*eta."""
        return float(1 - (1 - Fraction(self.eta - 1, self.c_eta)) ** self.r)

    def amplified_bound(self) -> float:
        return self.single_bound() ** self.m

    def to_text(self) -> str:
        return (
            f"{PARAMS_MAGIC}\n"
            f"modulus={self.p}\n"
            f"d={self.d_input}\n"
            f"eta={self.eta}\n"
            f"ceta={self.c_eta}\n"
            f"r={self.r}\n"
            f"m={self.m}\n"
        )

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> ProtocolParams:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) != 7 or lines[0] != PARAMS_MAGIC:
            raise ParamsError("format", "not a VPE-PARAMS v1 file")
        fields = {}
        for line, key in zip(lines[1:], ("modulus", "d", "eta", "ceta", "r", "m")):
            name, sep, value = line.partition("=")
            if name != key or not sep or not _is_decimal(value):
                raise ParamsError("format", f"expected '{key}=<decimal>', got {line!r}")
            fields[key] = int(value)
        try:
            modulus = PrimeModulus(fields["modulus"])
        except ValueError as exc:
            raise ParamsError("modulus", str(exc)) from exc
        params = derive_params(modulus, fields["d"], fields["eta"], fields["ceta"])
        if (params.r, params.m) != (fields["r"], fields["m"]):
            raise ParamsError("format", "r/m inconsistent with d, eta, ceta")
        return params

    @classmethod
    def load(cls, path) -> ProtocolParams:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())


def _is_decimal(s: str) -> bool:
    return s.isascii() and s.isdigit() and (s == "0" or s[0] != "0")


def derive_params(modulus: PrimeModulus | int, d_input: int, eta: int, c_eta: int) -> ProtocolParams:
    if not isinstance(modulus, PrimeModulus):
        try:
            modulus = PrimeModulus(modulus)
        except ValueError as exc:
            raise ParamsError("modulus", str(exc)) from exc
    if d_input < 1:
        raise ParamsError("degree", f"d must be >= 1, got {d_input}")
    if eta < 2:
        raise ParamsError("eta", f"eta must be >= 2, got {eta}")
    if c_eta <= eta:
        raise ParamsError("ceta", f"ceta must exceed eta ({c_eta} <= {eta})")
    if c_eta >= modulus.p:
        raise ParamsError("modulus", f"ceta={c_eta} needs a modulus larger than itself (p={modulus.p})")
    r = rounds_for(d_input, eta)
    m = amplification(eta, c_eta, r)
    params = ProtocolParams(modulus, d_input, eta, c_eta, r, m)
    # (1 - 1/q)**m < 1/2 with q = (c/(c-1))**r
    q = Fraction(c_eta, c_eta - eta) ** r
    if m * math.log1p(-float(1 / q)) >= math.log(0.5):
        raise AssertionError("amplification count does not reach 1/2")
    return params


def check_table_size(params: ProtocolParams, cap: int = MAX_TABLE_ENTRIES) -> None:
    if params.table_size > cap:
        raise ParamsError(
            "table-size",
            f"look-up table would hold {params.table_size} entries (cap {cap})",
        )


@dataclass(frozen=True)
class ParamSelector:
    """Polylog rule eta = round((log2 d)**omega) at a target ratio c."""

    omega: float
    c_target: Fraction

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ParamsError("omega", "omega must be positive")
        object.__setattr__(self, "c_target", Fraction(self.c_target))
        if self.c_target <= 1:
            raise ParamsError("ceta", "c must exceed 1")


def select_eta(d_input: int, selector: ParamSelector) -> tuple[int, int]:
    if d_input < 4:
        raise ParamsError("degree", "eta selection needs d >= 4")
    eta = max(2, math.floor(math.log2(d_input) ** selector.omega + 0.5))
    c_eta = max(eta + 1, math.ceil(selector.c_target * eta))
    return eta, c_eta
