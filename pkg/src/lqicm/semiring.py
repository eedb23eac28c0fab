"""The three-valued dependence semiring {∅, 0, 1} and dense matrices over it.

``BOT`` (∅) means no dependence, ``PROP`` (0) means the value is carried
through unchanged and ``DEP`` (1) is any other dependence.  Addition is
``max`` under BOT < PROP < DEP; multiplication is annihilated by BOT and
otherwise takes the max, i.e. the {-inf, 0, 1} corner of the tropical
semiring with (max, +) saturated at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence


class DepValue(IntEnum):
    BOT = 0
    PROP = 1
    DEP = 2

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    @classmethod
    def from_symbol(cls, s: str) -> "DepValue":
        try:
            return _FROM_SYMBOL[s]
        except KeyError:
            raise ValueError(f"not a dependence symbol: {s!r}") from None


BOT, PROP, DEP = DepValue.BOT, DepValue.PROP, DepValue.DEP

# "_" stands for the empty set so that reports stay ASCII
_SYMBOLS = {BOT: "_", PROP: "0", DEP: "1"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()} | {"∅": BOT}

_ADD = {
    (BOT, BOT): BOT, (BOT, PROP): PROP, (BOT, DEP): DEP,
    (PROP, BOT): PROP, (PROP, PROP): PROP, (PROP, DEP): DEP,
    (DEP, BOT): DEP, (DEP, PROP): DEP, (DEP, DEP): DEP,
}
_MUL = {
    (BOT, BOT): BOT, (BOT, PROP): BOT, (BOT, DEP): BOT,
    (PROP, BOT): BOT, (PROP, PROP): PROP, (PROP, DEP): DEP,
    (DEP, BOT): BOT, (DEP, PROP): DEP, (DEP, DEP): DEP,
}


def dep_add(a: DepValue, b: DepValue) -> DepValue:
    return _ADD[a, b]


def dep_mul(a: DepValue, b: DepValue) -> DepValue:
    return _MUL[a, b]


class DimensionError(ValueError):
    pass


class FixpointDefect(RuntimeError):
    """Raised if the star iteration overruns its bound (cannot happen on a finite lattice)."""


@dataclass(frozen=True)
class DepMatrix:
    """Square matrix; row = input variable, column = output variable."""

    cells: tuple[tuple[DepValue, ...], ...]

    def __post_init__(self):
        n = len(self.cells)
        if any(len(row) != n for row in self.cells):
            raise DimensionError("dependence matrix must be square")

    @property
    def n(self) -> int:
        return len(self.cells)

    def __getitem__(self, ij: tuple[int, int]) -> DepValue:
        i, j = ij
        return self.cells[i][j]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "DepMatrix":
        """Build from rows of DepValues, ints 0/1/2 or symbols ``_``/``0``/``1``/``∅``."""
        out = []
        for row in rows:
            out.append(tuple(
                DepValue.from_symbol(x) if isinstance(x, str) else DepValue(x)
                for x in row))
        return cls(tuple(out))

    @classmethod
    def zeros(cls, n: int) -> "DepMatrix":
        return cls(tuple((BOT,) * n for _ in range(n)))

    def symbols(self) -> list[list[str]]:
        return [[v.symbol for v in row] for row in self.cells]

    def __str__(self) -> str:
        return "\n".join(" ".join(row) for row in self.symbols())

    def set(self, updates: dict[tuple[int, int], DepValue]) -> "DepMatrix":
        rows = [list(r) for r in self.cells]
        for (i, j), v in updates.items():
            rows[i][j] = v
        return DepMatrix(tuple(tuple(r) for r in rows))


def mat_identity(n: int) -> DepMatrix:
    return DepMatrix(tuple(
        tuple(PROP if i == j else BOT for j in range(n)) for i in range(n)))


def _check_dims(a: DepMatrix, b: DepMatrix):
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: {a.n} vs {b.n}")


def mat_add(a: DepMatrix, b: DepMatrix) -> DepMatrix:
    _check_dims(a, b)
    return DepMatrix(tuple(
        tuple(_ADD[x, y] for x, y in zip(ra, rb))
        for ra, rb in zip(a.cells, b.cells)))


def mat_mul(a: DepMatrix, b: DepMatrix) -> DepMatrix:
    _check_dims(a, b)
    n = a.n
    cols = list(zip(*b.cells)) if n else []
    rows = []
    for ra in a.cells:
        row = []
        for cb in cols:
            acc = BOT
            for x, y in zip(ra, cb):
                acc = _ADD[acc, _MUL[x, y]]
                if acc is DEP:
                    break
            row.append(acc)
        rows.append(tuple(row))
    return DepMatrix(tuple(rows))


def mat_sum(ms: Sequence[DepMatrix], n: int) -> DepMatrix:
    acc = DepMatrix.zeros(n)
    for m in ms:
        acc = mat_add(acc, m)
    return acc


def mat_star(a: DepMatrix) -> tuple[DepMatrix, int]:
    """Return the stable partial sum A ⊕ A² ⊕ … ⊕ A^k and the least such k.

    Iterates S_{k+1} = A ⊕ S_k·A, which equals the k+1 partial sum; the
    sequence is monotone so the first repeat is the limit.
    """
    cap = a.n * a.n + 1
    s, k = a, 1
    while True:
        nxt = mat_add(a, mat_mul(s, a))
        if nxt == s:
            return s, k
        s, k = nxt, k + 1
        if k > cap:
            raise FixpointDefect(f"star did not stabilize within {cap} steps")
