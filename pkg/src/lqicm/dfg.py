"""Data Flow Graphs of commands, built by induction on the command structure.

A :class:`Relation` pairs a dependence matrix over a fixed variable order with
the command's read (``in_set``) and may-write (``out_set``) variable sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .lang import (Assign, Command, Expr, If, Seq, Skip, Use, Var, While,
                   variables, vars_of_expr)
from .semiring import (BOT, DEP, PROP, DepMatrix, mat_add, mat_identity,
                       mat_mul, mat_star)


class EnvError(ValueError):
    pass


@dataclass(frozen=True)
class VarEnv:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise EnvError(f"duplicate variables in environment: {self.names}")

    @classmethod
    def of(cls, names: Iterable[str]) -> "VarEnv":
        return cls(tuple(names))

    @classmethod
    def for_command(cls, c: Command) -> "VarEnv":
        return cls(tuple(variables(c)))

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise EnvError(f"variable {name!r} not in environment {self.names}") from None

    def indices(self, names: Iterable[str]) -> list[int]:
        return [self.index(v) for v in names]


@dataclass(frozen=True)
class Relation:
    env: VarEnv
    matrix: DepMatrix
    in_set: frozenset[str]
    out_set: frozenset[str]
    # set only for while loops: least k at which the partial sums of powers stabilize
    fixpoint_index: Optional[int] = None

    def dep_rows(self) -> frozenset[str]:
        n = len(self.env)
        return frozenset(self.env.names[i] for i in range(n)
                         if any(self.matrix[i, j] is DEP for j in range(n)))

    def dep_cols(self) -> frozenset[str]:
        n = len(self.env)
        return frozenset(self.env.names[j] for j in range(n)
                         if any(self.matrix[i, j] is DEP for i in range(n)))

    def reinitialized(self) -> frozenset[str]:
        """Output variables with no incoming arrow at all."""
        n = len(self.env)
        return frozenset(self.env.names[j] for j in range(n)
                         if all(self.matrix[i, j] is BOT for i in range(n)))

    def to_json(self) -> dict:
        return {"vars": list(self.env.names), "matrix": self.matrix.symbols()}


def _check_env(env: VarEnv, names: Iterable[str]):
    for v in names:
        env.index(v)


def _same_env(rels: Sequence[Relation]) -> VarEnv:
    env = rels[0].env
    for r in rels[1:]:
        if r.env != env:
            raise EnvError("relations built over different environments")
    return env


def dfg_assign(target: str, value: Expr, env: VarEnv) -> Relation:
    reads = vars_of_expr(value)
    _check_env(env, reads | {target})
    t = env.index(target)
    updates = {(t, t): BOT}
    if value != Var(target):
        for v in reads:
            updates[env.index(v), t] = DEP
    else:
        # x = x copies nothing new: plain propagation
        updates[t, t] = PROP
    m = mat_identity(len(env)).set(updates)
    return Relation(env, m, reads, frozenset((target,)))


def dfg_skip(env: VarEnv) -> Relation:
    return Relation(env, mat_identity(len(env)), frozenset(), frozenset())


def dfg_use(args: Iterable[str], env: VarEnv) -> Relation:
    args = frozenset(args)
    _check_env(env, args)
    return Relation(env, mat_identity(len(env)), args, frozenset())


def dfg_seq(parts: Sequence[Relation], env: Optional[VarEnv] = None) -> Relation:
    if not parts:
        if env is None:
            raise EnvError("empty sequence needs an explicit environment")
        return dfg_skip(env)
    env = _same_env(parts)
    m = parts[0].matrix
    for p in parts[1:]:
        m = mat_mul(m, p.matrix)
    return Relation(env, m,
                    frozenset().union(*(p.in_set for p in parts)),
                    frozenset().union(*(p.out_set for p in parts)))


def condition_correction(r: Relation, cond_vars: Iterable[str]) -> Relation:
    """Add a direct dependence from every condition variable to every modified variable."""
    cond_vars = frozenset(cond_vars)
    _check_env(r.env, cond_vars)
    updates = {}
    for e in r.env.indices(sorted(cond_vars)):
        for o in r.env.indices(sorted(r.out_set)):
            updates[e, o] = DEP
    m = r.matrix.set(updates) if updates else r.matrix
    return Relation(r.env, m, r.in_set | cond_vars, r.out_set, r.fixpoint_index)


def dfg_if(then_r: Relation, else_r: Optional[Relation],
           cond_vars: Iterable[str]) -> Relation:
    cond_vars = frozenset(cond_vars)
    corrected = condition_correction(then_r, cond_vars)
    if else_r is None:
        other = mat_identity(len(then_r.env))
        ins, outs = corrected.in_set, corrected.out_set
    else:
        _same_env([then_r, else_r])
        alt = condition_correction(else_r, cond_vars)
        other = alt.matrix
        ins = corrected.in_set | alt.in_set
        outs = corrected.out_set | alt.out_set
    return Relation(then_r.env, mat_add(corrected.matrix, other), ins, outs)


def dfg_while(body_r: Relation, cond_vars: Iterable[str]) -> Relation:
    star, k = mat_star(body_r.matrix)
    iterated = Relation(body_r.env, star, body_r.in_set, body_r.out_set, k)
    return condition_correction(iterated, cond_vars)


def dfg_of_command(c: Command, env: Optional[VarEnv] = None) -> Relation:
    """DFG of ``c`` over ``env`` (default: variables of ``c`` in first-occurrence order)."""
    if env is None:
        env = VarEnv.for_command(c)
    if isinstance(c, Assign):
        return dfg_assign(c.target, c.value, env)
    if isinstance(c, Skip):
        return dfg_skip(env)
    if isinstance(c, Use):
        return dfg_use(c.args, env)
    if isinstance(c, Seq):
        return dfg_seq([dfg_of_command(x, env) for x in c.items], env)
    if isinstance(c, If):
        other = None if c.else_branch is None else dfg_of_command(c.else_branch, env)
        return dfg_if(dfg_of_command(c.then_branch, env), other, vars_of_expr(c.cond))
    if isinstance(c, While):
        return dfg_while(dfg_of_command(c.body, env), vars_of_expr(c.cond))
    raise TypeError(f"not a command: {c!r}")


def to_dot(r: Relation, name: str = "dfg") -> str:
    """Bipartite rendering: inputs on the left, outputs on the right.

    Solid edges are direct dependences, dashed edges propagations; an output
    without incoming edges is a reinitialization.
    """
    names = r.env.names
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;", "  node [shape=plaintext];"]
    lines.append("  subgraph cluster_in { label=\"in\"; color=white;")
    for v in names:
        lines.append(f"    {_dot_id('in_' + v)} [label={_dot_id(v)}];")
    lines.append("  }")
    lines.append("  subgraph cluster_out { label=\"out\"; color=white;")
    for v in names:
        lines.append(f"    {_dot_id('out_' + v)} [label={_dot_id(v)}];")
    lines.append("  }")
    for i, src in enumerate(names):
        for j, dst in enumerate(names):
            cell = r.matrix[i, j]
            if cell is BOT:
                continue
            style = "solid" if cell is DEP else "dashed"
            lines.append(f"  {_dot_id('in_' + src)} -> {_dot_id('out_' + dst)} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
