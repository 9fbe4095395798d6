"""Field-operation counters used for the complexity accounts."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OpCount:
    mul: int = 0
    add: int = 0
    inv: int = 0

    def tally(self, mul: int = 0, add: int = 0, inv: int = 0) -> None:
        self.mul += mul
        self.add += add
        self.inv += inv

    def reset(self) -> None:
        self.mul = self.add = self.inv = 0

    @property
    def total(self) -> int:
        return self.mul + self.add + self.inv

    def __add__(self, other: OpCount) -> OpCount:
        return OpCount(self.mul + other.mul, self.add + other.add, self.inv + other.inv)


def tally(ops: OpCount | None, mul: int = 0, add: int = 0, inv: int = 0) -> None:
    if ops is not None:
        ops.tally(mul, add, inv)
