"""Fuel-bounded reference interpreter.

Integers are 64-bit two's complement with wrapping arithmetic, division
truncates toward zero as in C, a condition holds iff it is nonzero and unbound
variables read as 0.  Every assignment, ``skip``, ``use`` and condition
evaluation costs one step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .lang import (Assign, Binary, Command, Expr, If, IntLit, Seq, Skip,
                   Unary, Use, Var, While, variables)

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def wrap(x: int) -> int:
    x &= _MASK
    return x - (1 << 64) if x & _SIGN else x


class Status(str, enum.Enum):
    FINISHED = "finished"
    FUEL_EXHAUSTED = "fuel_exhausted"
    RUNTIME_ERROR = "runtime_error"


Store = dict[str, int]
Observation = tuple[Optional[int], tuple[int, ...]]


@dataclass
class Outcome:
    status: Status
    store: Store
    trace: list[Observation]
    steps: int
    error: Optional[str] = None  # "div_by_zero" | "mod_by_zero"

    @property
    def finished(self) -> bool:
        return self.status is Status.FINISHED

    def trace_lines(self) -> list[str]:
        return [f"use@{'?' if site is None else site}: {','.join(map(str, vals))}"
                for site, vals in self.trace]

    def values(self, names: Iterable[str]) -> dict[str, int]:
        return {v: self.store.get(v, 0) for v in names}


class _OutOfFuel(Exception):
    pass


class _Fault(Exception):
    def __init__(self, kind: str):
        self.kind = kind


def _div(a: int, b: int) -> int:
    if b == 0:
        raise _Fault("div_by_zero")
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise _Fault("mod_by_zero")
    q = abs(a) // abs(b)
    q = q if (a < 0) == (b < 0) else -q
    return wrap(a - b * q)


_BINOPS = {
    "+": lambda a, b: wrap(a + b),
    "-": lambda a, b: wrap(a - b),
    "*": lambda a, b: wrap(a * b),
    "/": _div,
    "%": _mod,
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
}


class _Machine:
    def __init__(self, store: Store, fuel: int):
        self.store = store
        self.fuel = fuel
        self.steps = 0
        self.trace: list[Observation] = []

    def tick(self):
        if self.steps >= self.fuel:
            raise _OutOfFuel()
        self.steps += 1

    def eval(self, e: Expr) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Var):
            return self.store.get(e.name, 0)
        if isinstance(e, Unary):
            return wrap(-self.eval(e.operand))
        return _BINOPS[e.op](self.eval(e.lhs), self.eval(e.rhs))

    def test(self, e: Expr) -> bool:
        self.tick()
        return self.eval(e) != 0

    def exec(self, c: Command):
        if isinstance(c, Assign):
            self.tick()
            self.store[c.target] = self.eval(c.value)
        elif isinstance(c, Seq):
            for x in c.items:
                self.exec(x)
        elif isinstance(c, Skip):
            self.tick()
        elif isinstance(c, Use):
            self.tick()
            self.trace.append((c.site, tuple(self.store.get(v, 0) for v in c.args)))
        elif isinstance(c, While):
            while self.test(c.cond):
                self.exec(c.body)
        elif isinstance(c, If):
            if self.test(c.cond):
                self.exec(c.then_branch)
            elif c.else_branch is not None:
                self.exec(c.else_branch)
        else:
            raise TypeError(f"not a command: {c!r}")


def run(prog: Command, init: Optional[Mapping[str, int]] = None,
        fuel: int = 100_000) -> Outcome:
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    m = _Machine({k: wrap(v) for k, v in (init or {}).items()}, fuel)
    try:
        m.exec(prog)
    except _OutOfFuel:
        return Outcome(Status.FUEL_EXHAUSTED, m.store, m.trace, m.steps)
    except _Fault as f:
        return Outcome(Status.RUNTIME_ERROR, m.store, m.trace, m.steps, f.kind)
    return Outcome(Status.FINISHED, m.store, m.trace, m.steps)


@dataclass
class Verdict:
    equivalent: bool
    witness: Optional[dict[str, int]] = None
    reason: str = ""
    left: Optional[Outcome] = field(default=None, repr=False)
    right: Optional[Outcome] = field(default=None, repr=False)

    def __bool__(self):
        return self.equivalent


def _trace_values(trace: list[Observation]) -> list[tuple[int, ...]]:
    return [vals for _, vals in trace]


def compare(o1: Outcome, o2: Outcome, names: Iterable[str]) -> Optional[str]:
    """Return a description of the first difference, or None if the outcomes agree."""
    if o1.status is not o2.status:
        return f"status {o1.status.value} vs {o2.status.value}"
    if o1.status is Status.FUEL_EXHAUSTED:
        # runs cut short at different points: observations must agree on the common prefix
        n = min(len(o1.trace), len(o2.trace))
        if o1.trace[:n] != o2.trace[:n]:
            return _trace_diff(o1.trace[:n], o2.trace[:n])
        return None
    if o1.trace != o2.trace:
        return _trace_diff(o1.trace, o2.trace)
    if o1.status is Status.RUNTIME_ERROR:
        return None if o1.error == o2.error else f"error {o1.error} vs {o2.error}"
    for v in sorted(names):
        a, b = o1.store.get(v, 0), o2.store.get(v, 0)
        if a != b:
            return f"final {v}: {a} vs {b}"
    return None


def _trace_diff(t1, t2) -> str:
    for i, (a, b) in enumerate(zip(t1, t2)):
        if a != b:
            return f"trace differs at observation {i + 1}: {a} vs {b}"
    return f"trace length {len(t1)} vs {len(t2)}"


def equivalent(p1: Command, p2: Command, stores: Iterable[Mapping[str, int]],
               fuel: int = 100_000) -> Verdict:
    """Differential check of two programs on every store; stops at the first divergence."""
    names = set(variables(p1)) | set(variables(p2))
    for store in stores:
        o1 = run(p1, store, fuel)
        o2 = run(p2, store, fuel)
        diff = compare(o1, o2, names | set(store))
        if diff is not None:
            return Verdict(False, dict(store), diff, o1, o2)
    return Verdict(True)
