"""Initialization phase: the table of leaf constants h(b_1, ..., b_r).

Entries are stored flat in lexicographic order of the challenge path with
``b_1`` most significant, so ``index(b) = sum_l b_l * (c*eta)**(r-l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from vpe.ops import OpCount
from vpe.params import ProtocolParams
from vpe.poly import (
    Polynomial,
    PolyFormatError,
    ZTable,
    _parse_header,
    fold_coeffs,
    is_decimal,
    lagrange_table,
)

TABLE_MAGIC = "VPE-TABLE v1"


class TableError(ValueError):
    pass


class DigestMismatch(TableError):
    pass


def path_index(path: Sequence[int], c_eta: int, r: int) -> int:
    if len(path) != r:
        raise TableError(f"challenge path has length {len(path)}, expected {r}")
    idx = 0
    for b in path:
        if not 0 <= b < c_eta:
            raise TableError(f"challenge {b} out of range [0, {c_eta})")
        idx = idx * c_eta + b
    return idx


def index_path(idx: int, c_eta: int, r: int) -> tuple[int, ...]:
    out = []
    for _ in range(r):
        idx, b = divmod(idx, c_eta)
        out.append(b)
    return tuple(reversed(out))


def all_paths(c_eta: int, r: int) -> Iterator[tuple[int, ...]]:
    for idx in range(c_eta**r):
        yield index_path(idx, c_eta, r)


@dataclass
class LookupTable:
    params: ProtocolParams
    entries: list[int]
    params_digest: str

    def __post_init__(self) -> None:
        if len(self.entries) != self.params.table_size:
            raise TableError(f"table holds {len(self.entries)} entries, expected {self.params.table_size}")

    def get(self, path: Sequence[int]) -> int:
        return self.entries[path_index(path, self.params.c_eta, self.params.r)]

    def check_params(self, params: ProtocolParams) -> None:
        if self.params_digest != params.digest():
            raise DigestMismatch("look-up table was built for different parameters")

    def to_text(self) -> str:
        prm = self.params
        header = (
            f"{TABLE_MAGIC} modulus={prm.p} d={prm.d_input} eta={prm.eta} "
            f"ceta={prm.c_eta} r={prm.r} digest={self.params_digest}\n"
        )
        return header + "".join(f"{v}\n" for v in self.entries)

    @classmethod
    def from_text(cls, text: str, params: ProtocolParams) -> LookupTable:
        """Parse a table file and bind it to ``params`` (digest must match)."""
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise TableError("empty table file")
        head, _, digest_part = lines[0].rpartition(" ")
        name, sep, digest = digest_part.partition("=")
        if name != "digest" or not sep or len(digest) != 64 or any(ch not in "0123456789abcdef" for ch in digest):
            raise TableError("table header lacks a digest")
        try:
            header = _parse_header(head, TABLE_MAGIC, ("modulus", "d", "eta", "ceta", "r"))
        except PolyFormatError as exc:
            raise TableError(str(exc)) from exc
        if digest != params.digest():
            raise DigestMismatch("table digest does not match the given parameters")
        expected = (params.p, params.d_input, params.eta, params.c_eta, params.r)
        if tuple(header.values()) != expected:
            raise TableError("table header disagrees with parameters")
        if len(lines) - 1 != params.table_size:
            raise TableError(f"table file has {len(lines) - 1} entries, expected {params.table_size}")
        entries = []
        for line in lines[1:]:
            if not is_decimal(line) or int(line) >= params.p:
                raise TableError(f"bad table entry {line!r}")
            entries.append(int(line))
        return cls(params, entries, digest)

    @classmethod
    def load(cls, path, params: ProtocolParams) -> LookupTable:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), params)


def table_get(table: LookupTable, path: Sequence[int]) -> int:
    return table.get(path)


@dataclass
class BuildStats:
    peak_live: int = 0
    widest_level: int = 0


def _coeffs_for(f: Polynomial, params: ProtocolParams) -> list[int]:
    if f.modulus != params.modulus:
        raise TableError("polynomial and params use different moduli")
    if len(f.coeffs) > params.d_pad:
        raise TableError(f"polynomial has {len(f.coeffs)} terms, params allow {params.d_pad}")
    return list(f.padded(params.d_pad).coeffs)


def build_table(
    f: Polynomial,
    params: ProtocolParams,
    ops: OpCount | None = None,
    stats: BuildStats | None = None,
    ztable: ZTable | None = None,
) -> LookupTable:
    """Breadth-first expansion of the coefficient tree, one level at a time.

    Level ``l`` is a flat list of ``(c*eta)**l`` nodes of ``d_pad / eta**l``
    coefficients each; only the previous level is kept alive.
    """
    level = _coeffs_for(f, params)
    z = ztable if ztable is not None else lagrange_table(params, ops)
    cols = z.columns
    p = params.p
    width = len(level)
    peak = widest = width
    for _ in range(params.r):
        nodes = len(level) // width
        nxt: list[int] = []
        for k in range(nodes):
            node = level[k * width:(k + 1) * width]
            for col in cols:
                nxt.extend(fold_coeffs(node, col, p, ops))
        peak = max(peak, len(level) + len(nxt))
        widest = max(widest, len(nxt))
        level = nxt
        width //= params.eta
    if stats is not None:
        stats.peak_live, stats.widest_level = peak, widest
    return LookupTable(params, level, params.digest())


def naive_entry(
    f: Polynomial,
    params: ProtocolParams,
    path: Sequence[int],
    ztable: ZTable | None = None,
) -> int:
    """Fold ``f`` along ``path`` from scratch and return the leaf constant."""
    if len(path) != params.r:
        raise TableError(f"challenge path has length {len(path)}, expected {params.r}")
    if any(not 0 <= b < params.c_eta for b in path):
        raise TableError(f"challenge path {tuple(path)} out of range")
    z = ztable if ztable is not None else lagrange_table(params)
    coeffs = _coeffs_for(f, params)
    for b in path:
        coeffs = fold_coeffs(coeffs, z.column(b), params.p)
    (leaf,) = coeffs
    return leaf


class CoefficientTree:
    """Lazily expanded, memoized tree of folded coefficient vectors.

    ``node(path)`` holds the coefficients of f folded along ``path``. Used by
    provers that cache their folds across experiments and by :class:`LazyTable`.
    """

    def __init__(
        self,
        coeffs: Sequence[int],
        eta: int,
        ztable: ZTable,
        ops: OpCount | None = None,
    ) -> None:
        self.eta = eta
        self.ztable = ztable
        self.ops = ops
        self._nodes: dict[tuple[int, ...], list[int]] = {(): list(coeffs)}

    @classmethod
    def for_poly(cls, f: Polynomial, params: ProtocolParams, ztable: ZTable | None = None,
                 ops: OpCount | None = None) -> CoefficientTree:
        z = ztable if ztable is not None else lagrange_table(params, ops)
        return cls(_coeffs_for(f, params), params.eta, z, ops)

    def node(self, path: Sequence[int]) -> list[int]:
        path = tuple(path)
        hit = self._nodes.get(path)
        if hit is not None:
            return hit
        parent = self.node(path[:-1])
        child = fold_coeffs(parent, self.ztable.column(path[-1]), self.ztable.p, self.ops)
        self._nodes[path] = child
        return child

    def expand(self, depth: int) -> None:
        """Materialize every node down to ``depth``."""
        frontier = [()]
        for _ in range(depth):
            frontier = [path + (b,) for path in frontier for b in range(self.ztable.c_eta)]
            for path in frontier:
                self.node(path)

    def __len__(self) -> int:
        return len(self._nodes)


class LazyTable:
    """Table-shaped view computing h(path) on demand from a memoized tree.

    Stands in for :class:`LookupTable` when (c*eta)**r is too large to
    materialize; the verifier only ever reads m entries.
    """

    def __init__(self, f: Polynomial, params: ProtocolParams, ops: OpCount | None = None) -> None:
        self.params = params
        self.params_digest = params.digest()
        self._tree = CoefficientTree.for_poly(f, params, ops=ops)

    def get(self, path: Sequence[int]) -> int:
        path_index(path, self.params.c_eta, self.params.r)
        (leaf,) = self._tree.node(path)
        return leaf

    def check_params(self, params: ProtocolParams) -> None:
        if self.params_digest != params.digest():
            raise DigestMismatch("look-up table was built for different parameters")
