"""Prime-field arithmetic.

Hot paths (folding, Horner evaluation, table construction) work on canonical
Python ints in ``[0, p)`` and reduce through a :class:`PrimeModulus`.
:class:`FieldElement` is the checked, user-facing carrier.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from vpe.ops import OpCount, tally

DEFAULT_MODULUS = (1 << 61) - 1

# Deterministic Miller-Rabin witnesses, sufficient for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ModulusMismatch(ValueError):
    pass


class NotInvertible(ZeroDivisionError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """An odd prime ``p < 2**64`` defining the field GF(p)."""

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise TypeError("modulus must be an int")
        if self.p >= 1 << 64:
            raise ValueError(f"modulus {self.p} does not fit in 64 bits")
        if self.p == 2 or not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not an odd prime")

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self)

    def __int__(self) -> int:
        return self.p

    def reduce(self, value: int) -> int:
        return value % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise NotInvertible("0 is not invertible")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int, ops: OpCount | None = None) -> int:
        """Square-and-multiply; ``0**0 == 1``."""
        if e < 0:
            raise ValueError("negative exponent")
        p = self.p
        result, base = 1, a % p
        muls = 0
        while e:
            if e & 1:
                result = result * base % p
                muls += 1
            e >>= 1
            if e:
                base = base * base % p
                muls += 1
        tally(ops, mul=muls)
        return result

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def random_element(self, rng: random.Random) -> FieldElement:
        return FieldElement(rng.randrange(self.p), self)


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: PrimeModulus

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.modulus.p:
            raise ValueError(f"{self.value} is not a canonical element mod {self.modulus.p}")

    def _peer(self, other: object) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ModulusMismatch(f"mod {self.modulus.p} vs mod {other.modulus.p}")
            return other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return other % self.modulus.p
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement((self.value + self._peer(other)) % self.modulus.p, self.modulus)

    __radd__ = __add__

    def __sub__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement((self.value - self._peer(other)) % self.modulus.p, self.modulus)

    def __rsub__(self, other: int) -> FieldElement:
        return FieldElement((self._peer(other) - self.value) % self.modulus.p, self.modulus)

    def __mul__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.value * self._peer(other) % self.modulus.p, self.modulus)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value % self.modulus.p, self.modulus)

    def inverse(self) -> FieldElement:
        return FieldElement(self.modulus.inv(self.value), self.modulus)

    def __truediv__(self, other: FieldElement | int) -> FieldElement:
        return self * FieldElement(self.modulus.inv(self._peer(other)), self.modulus)

    def __pow__(self, e: int) -> FieldElement:
        return FieldElement(self.modulus.pow(self.value, e), self.modulus)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.value == other.value and self.modulus == other.modulus
        if isinstance(other, int) and not isinstance(other, bool):
            return self.value == other % self.modulus.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.modulus.p))

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.modulus.p})"
