"""Semantics-preserving loop rewrites: degree-driven peeling and the independence lemmas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .analysis import (INF, LoopAnalysis, analyze_loop, mutually_independent,
                       self_independent)
from .dfg import VarEnv, dfg_of_command
from .lang import (Command, If, Seq, Skip, While, contains_use, flatten,
                   vars_of_expr)


class PlanMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PeelPlan:
    loop_id: int
    peel_count: int
    copies: tuple[tuple[int, ...], ...]  # copies[k-1] = chunk positions kept in copy k
    residual: tuple[int, ...]
    chunk_count: int


def plan_peeling(a: LoopAnalysis, literal_copy_rule: bool = False) -> PeelPlan:
    """Copy k keeps chunks of degree >= k; the residual loop keeps the infinite ones.

    ``literal_copy_rule`` plans from raw degrees instead of effective ones.  It
    is kept for mutation testing of the differential harness and is unsound on
    write-after-write bodies.
    """
    degrees = a.raw_degree if literal_copy_rule else a.effective_degree
    p = max((d for d in degrees if d != INF), default=0)
    copies = tuple(tuple(i for i, d in enumerate(degrees) if d >= k)
                   for k in range(1, p + 1))
    residual = tuple(i for i, d in enumerate(degrees) if d == INF)
    return PeelPlan(a.loop_id, p, copies, residual, len(degrees))


def peel(loop: While, plan: PeelPlan) -> Command:
    """Unfold ``plan.peel_count`` guarded copies of the body in front of the residual loop."""
    chunks = flatten(loop.body)
    if len(chunks) != plan.chunk_count:
        raise PlanMismatch(f"plan for {plan.chunk_count} chunks applied to a "
                           f"loop with {len(chunks)}")
    if plan.peel_count == 0:
        return loop
    out: Command = While(loop.cond, Seq(tuple(chunks[i] for i in plan.residual)))
    for kept in reversed(plan.copies):
        out = If(loop.cond, Seq(tuple(chunks[i] for i in kept) + (out,)))
    return out


def specialize_while(loop: While) -> Optional[Command]:
    """``while E {C}`` to ``if E {C; while E {skip}}`` when C cannot affect itself or E."""
    body = dfg_of_command(loop.body, VarEnv.for_command(loop))
    if contains_use(loop.body):
        return None
    if not self_independent(body) or vars_of_expr(loop.cond) & body.out_set:
        return None
    return If(loop.cond, Seq(tuple(flatten(loop.body)) + (While(loop.cond, Seq((Skip(),))),)))


def swap(c1: Command, c2: Command) -> Optional[Command]:
    """``c1; c2`` to ``c2; c1`` when neither reads what the other writes and they write disjoint variables."""
    env = VarEnv.for_command(Seq((c1, c2)))
    r1, r2 = dfg_of_command(c1, env), dfg_of_command(c2, env)
    if not mutually_independent(r1, r2) or r1.out_set & r2.out_set:
        return None
    if contains_use(c1) and contains_use(c2):
        return None
    return Seq((c2, c1))


def hoist_head(loop: While) -> Optional[Command]:
    """Move the first body statement in front of the loop under a guard.

    Requires the head to be self-independent, mutually independent of the
    rest of the body with disjoint writes, free of ``use`` and unable to
    change the loop condition.
    """
    items = flatten(loop.body)
    if not items:
        return None
    head, rest = items[0], Seq(tuple(items[1:]))
    env = VarEnv.for_command(loop)
    h, r = dfg_of_command(head, env), dfg_of_command(rest, env)
    if contains_use(head) or not self_independent(h):
        return None
    if not mutually_independent(h, r) or h.out_set & r.out_set:
        return None
    if vars_of_expr(loop.cond) & h.out_set:
        return None
    return If(loop.cond, Seq((head, While(loop.cond, rest))))


def optimize_with_report(prog: Command, literal_copy_rule: bool = False
                         ) -> tuple[Command, list[tuple[int, int]]]:
    """Peel every loop with a finite invariance degree, innermost loops first.

    Returns the new program and ``(loop id, peel count)`` per loop in the
    order the loops were processed.  Loop ids number loops in source order.
    """
    report: list[tuple[int, int]] = []
    counter = [0]

    def go(c: Command) -> Command:
        if isinstance(c, Seq):
            return Seq(tuple(go(x) for x in c.items), span=c.span)
        if isinstance(c, If):
            other = None if c.else_branch is None else go(c.else_branch)
            return If(c.cond, go(c.then_branch), other, span=c.span)
        if isinstance(c, While):
            loop_id = counter[0]
            counter[0] += 1
            loop = While(c.cond, go(c.body), span=c.span)
            plan = plan_peeling(analyze_loop(loop, loop_id), literal_copy_rule)
            report.append((loop_id, plan.peel_count))
            return peel(loop, plan)
        return c

    return go(prog), report


def optimize(prog: Command, literal_copy_rule: bool = False) -> Command:
    return optimize_with_report(prog, literal_copy_rule)[0]
