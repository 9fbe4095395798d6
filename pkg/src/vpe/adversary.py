"""Cheating provers for soundness experiments.

Both strategies claim ``f(x) + delta`` and then keep every linear check
satisfied, so they are only caught by the final table comparison. Each
tracks ``err``, the gap between the verifier's running reference and the
true folded value; once a challenge lands on a point where the sent and
true interpolants agree, ``err`` drops to zero and the prover is back on a
path that passes.
"""

from __future__ import annotations

import random

from vpe.poly import interpolate_eval
from vpe.protocol import HonestProver


class _WrongClaimProver:
    def __init__(self, honest: HonestProver, delta: int) -> None:
        p = honest.params.p
        if delta % p == 0:
            raise ValueError("delta must be nonzero in the field")
        self.honest = honest
        self.params = honest.params
        self.rounds = honest.rounds
        self.delta = delta % p
        self.err = self.delta

    def start(self, x: int) -> int:
        true = self.honest.start(x)
        self.restart()
        return (true + self.delta) % self.params.p

    def restart(self) -> None:
        self.honest.restart()
        self.err = self.delta

    def _offsets(self) -> list[int]:
        raise NotImplementedError

    def round(self) -> list[int]:
        true = self.honest.round()
        p = self.params.p
        self._diff = self._offsets() if self.err else [0] * len(true)
        return [(t + e) % p for t, e in zip(true, self._diff)]

    def accept_challenge(self, b: int) -> None:
        self.err = interpolate_eval(self._diff, b, self.honest.z)
        self.honest.accept_challenge(b)


class CorruptMinProver(_WrongClaimProver):
    """Shifts only stripe 0 by the current error.

    The error interpolant is then ``err * Z_0``. It vanishes on the other
    eta-1 points of H, the most agreement any nonzero degree-(eta-1)
    polynomial can have on L.
    """

    def _offsets(self) -> list[int]:
        return [self.err] + [0] * (self.params.eta - 1)


class RandomConsistentProver(_WrongClaimProver):
    """Random stripe errors, with stripe 0 solving the linear check."""

    def __init__(self, honest: HonestProver, delta: int, rng: random.Random | None = None) -> None:
        super().__init__(honest, delta)
        self.rng = rng if rng is not None else random.Random()

    def _offsets(self) -> list[int]:
        p = self.params.p
        w = self.honest.weight(self.honest.level)
        tail = [self.rng.randrange(p) for _ in range(self.params.eta - 1)]
        acc, wpow = 0, w
        for e in tail:
            acc = (acc + wpow * e) % p
            wpow = wpow * w % p
        return [(self.err - acc) % p] + tail
