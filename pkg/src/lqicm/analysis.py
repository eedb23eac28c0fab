"""Invariance degrees of the chunks of each loop.

Every top-level statement of a loop body is a chunk; an inner ``if`` or
``while`` is a single chunk summarized by its Relation.  Reads are resolved to
reaching writers inside the body (same iteration, previous iteration, or the
value on loop entry) and degrees follow the recurrence

    deg(s) = max over reads of s:  1                (loop entry)
                                   deg(t)           (t earlier in the same iteration)
                                   deg(t) + 1       (t from the previous iteration)

with ``use`` chunks and members of dependence cycles pinned to infinity.  The
effective degree then closes the raw one under two soundness rules so that
dropping a chunk from late peeled copies never changes what is observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import networkx as nx

from .dfg import Relation, VarEnv, dfg_of_command, dfg_while
from .lang import (Assign, Command, IntLit, Seq, While, contains_use, flatten,
                   iter_commands, vars_of_expr)

INF = math.inf
Degree = Union[int, float]

LOOP_ENTRY = "entry"
SAME_ITERATION = "same_iteration"
LOOP_CARRIED = "loop_carried"
MAYBE_BOTH = "maybe_both"


@dataclass(frozen=True)
class ChunkId:
    loop: int
    position: int


@dataclass(frozen=True)
class Chunk:
    id: ChunkId
    command: Command
    relation: Relation

    @property
    def position(self) -> int:
        return self.id.position

    @property
    def reads(self) -> frozenset[str]:
        return self.relation.in_set

    @property
    def writes(self) -> frozenset[str]:
        return self.relation.out_set

    @property
    def kills(self) -> frozenset[str]:
        # only an unconditional assignment is a strong definition
        if isinstance(self.command, Assign):
            return self.relation.out_set
        return frozenset()

    @property
    def observes(self) -> bool:
        return contains_use(self.command)


@dataclass(frozen=True)
class DepEdge:
    reader: int
    writer: Union[int, str]  # chunk position or LOOP_ENTRY
    var: str
    kind: str


@dataclass
class LoopAnalysis:
    loop_id: int
    loop: While
    chunks: list[Chunk]
    edges: list[DepEdge]
    raw_degree: list[Degree]
    effective_degree: list[Degree]
    relation: Relation
    lemma1: tuple[int, int]  # (fixpoint index, min(|In|, |Out|)) of the body
    basic_invariants: frozenset[int] = field(default_factory=frozenset)

    @property
    def peel_count(self) -> int:
        return max((d for d in self.effective_degree if d != INF), default=0)

    @property
    def raw_peel_count(self) -> int:
        return max((d for d in self.raw_degree if d != INF), default=0)


def chunk_loop(body: Command, env: Optional[VarEnv] = None,
               loop_id: int = 0) -> list[Chunk]:
    if env is None:
        env = VarEnv.for_command(body)
    return [Chunk(ChunkId(loop_id, i), c, dfg_of_command(c, env))
            for i, c in enumerate(flatten(body))]


def reaching_writers(chunks: list[Chunk], reader: int, v: str) -> dict:
    """Map each writer of ``v`` that can reach ``reader`` to the kind of the dependence.

    Scans backward from the reader inside the iteration; if no unconditional
    assignment kills ``v`` first, the value on loop entry reaches, and so does
    everything found scanning backward from the end of the previous iteration.
    """
    found: dict = {}

    def note(w, kind):
        old = found.get(w)
        found[w] = kind if old in (None, kind) else MAYBE_BOTH

    for pos in range(reader - 1, -1, -1):
        c = chunks[pos]
        if v in c.writes:
            note(pos, SAME_ITERATION)
            if v in c.kills:
                return found
    written = any(v in c.writes for c in chunks)
    note(LOOP_ENTRY, LOOP_CARRIED if written else SAME_ITERATION)
    for pos in range(len(chunks) - 1, -1, -1):
        c = chunks[pos]
        if v in c.writes:
            note(pos, LOOP_CARRIED)
            if v in c.kills:
                break
    return found


def dependence_edges(chunks: list[Chunk]) -> list[DepEdge]:
    edges = []
    for c in chunks:
        for v in sorted(c.reads):
            ws = reaching_writers(chunks, c.position, v)
            for w in sorted(ws, key=lambda w: (w == LOOP_ENTRY, w if w != LOOP_ENTRY else 0)):
                edges.append(DepEdge(c.position, w, v, ws[w]))
    return edges


def is_independent(c1: Relation, c2: Relation) -> bool:
    """True when ``c2`` reads nothing that ``c1`` writes."""
    return not (c1.out_set & c2.in_set)


def mutually_independent(c1: Relation, c2: Relation) -> bool:
    return is_independent(c1, c2) and is_independent(c2, c1)


def self_independent(c: Relation) -> bool:
    return is_independent(c, c)


def _dep_graph(n: int, edges: Iterable[DepEdge]) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from((e.reader, e.writer) for e in edges if e.writer != LOOP_ENTRY)
    return g


def raw_degrees(chunks: list[Chunk], edges: list[DepEdge]) -> list[Degree]:
    n = len(chunks)
    g = _dep_graph(n, edges)
    pinned = {c.position for c in chunks if c.observes}
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            pinned |= comp
    pinned |= {u for u, w in g.edges if u == w}

    by_reader: dict[int, list[DepEdge]] = {i: [] for i in range(n)}
    for e in edges:
        by_reader[e.reader].append(e)

    deg: dict[int, Degree] = {i: INF for i in pinned}
    # non-pinned nodes form a DAG, so writers resolve before readers in this order
    for s in reversed(list(nx.topological_sort(g.subgraph(set(range(n)) - pinned)))):
        d: Degree = 1
        for e in by_reader[s]:
            if e.writer == LOOP_ENTRY:
                continue
            dd = deg[e.writer]
            d = max(d, dd if e.kind == SAME_ITERATION else dd + 1)
        deg[s] = d
    return [deg[i] for i in range(n)]


def _overlap_groups(chunks: list[Chunk]) -> list[list[int]]:
    g = nx.Graph()
    g.add_nodes_from(c.position for c in chunks if c.writes)
    by_var: dict[str, list[int]] = {}
    for c in chunks:
        for v in c.writes:
            by_var.setdefault(v, []).append(c.position)
    for ws in by_var.values():
        g.add_edges_from(zip(ws, ws[1:]))
    return [sorted(comp) for comp in nx.connected_components(g)]


def effective_degrees(chunks: list[Chunk], raw: list[Degree],
                      cond_vars: Iterable[str] = ()) -> list[Degree]:
    """Close raw degrees under observer consistency and output-group sharing.

    Observer consistency: if a chunk reads ``v`` at a point where the latest
    writer of ``v`` in the iteration is not the last writer of ``v`` in the
    body, it sees an intermediate value, so every writer of ``v`` must keep
    running at least as long as the reader does.  The loop condition is such a
    reader at the end of the body with infinite degree.

    Output groups: chunks that (transitively) write a common variable are
    dropped together, at the largest degree of the group.
    """
    eff = list(raw)
    n = len(chunks)
    writers: dict[str, list[int]] = {}
    for c in chunks:
        for v in c.writes:
            writers.setdefault(v, []).append(c.position)
    readers = [(c.position, c.reads) for c in chunks]
    readers.append((n, frozenset(cond_vars)))
    groups = _overlap_groups(chunks)

    changed = True
    while changed:
        changed = False
        for pos, reads in readers:
            level = INF if pos == n else eff[pos]
            for v in reads:
                ws = writers.get(v)
                if not ws:
                    continue
                before = [w for w in ws if w < pos]
                if not before or before[-1] == ws[-1]:
                    continue
                for w in ws:
                    if eff[w] < level:
                        eff[w] = level
                        changed = True
        for grp in groups:
            top = max(eff[i] for i in grp)
            for i in grp:
                if eff[i] < top:
                    eff[i] = top
                    changed = True
    return eff


def basic_invariants(chunks: list[Chunk]) -> frozenset[int]:
    """Classic iterative invariant detection (no degrees, no peeling).

    A chunk is invariant when each variable it reads is either never defined
    in the loop, or reached by exactly one definition which is an in-loop
    invariant executed earlier in the same iteration (or a constant
    assignment).  ``use`` chunks are never invariant.
    """
    inv: set[int] = set()
    reach = {(c.position, v): reaching_writers(chunks, c.position, v)
             for c in chunks for v in c.reads}
    changed = True
    while changed:
        changed = False
        for c in chunks:
            if c.position in inv or c.observes:
                continue
            if all(_operand_invariant(chunks, reach[c.position, v], inv) for v in c.reads):
                inv.add(c.position)
                changed = True
    return frozenset(inv)


def _operand_invariant(chunks: list[Chunk], ws: dict, inv: set[int]) -> bool:
    if set(ws) == {LOOP_ENTRY} and ws[LOOP_ENTRY] == SAME_ITERATION:
        return True
    if len(ws) != 1:
        return False
    (w, kind), = ws.items()
    if w == LOOP_ENTRY or kind != SAME_ITERATION:
        return False
    d = chunks[w].command
    constant = isinstance(d, Assign) and isinstance(d.value, IntLit)
    return w in inv or constant


def analyze_loop(loop: While, loop_id: int = 0,
                 env: Optional[VarEnv] = None) -> LoopAnalysis:
    if env is None:
        env = VarEnv.for_command(loop)
    chunks = chunk_loop(loop.body, env, loop_id)
    edges = dependence_edges(chunks)
    raw = raw_degrees(chunks, edges)
    cond_vars = vars_of_expr(loop.cond)
    eff = effective_degrees(chunks, raw, cond_vars)
    body_r = dfg_of_command(Seq(tuple(c.command for c in chunks)), env)
    rel = dfg_while(body_r, cond_vars)
    bound = min(len(body_r.in_set), len(body_r.out_set))
    return LoopAnalysis(loop_id, loop, chunks, edges, raw, eff, rel,
                        (rel.fixpoint_index, bound), basic_invariants(chunks))


def number_loops(prog: Command) -> dict[int, int]:
    """Map ``id(while_node)`` to its loop id (pre-order source position)."""
    ids = {}
    for c in iter_commands(prog):
        if isinstance(c, While):
            ids[id(c)] = len(ids)
    return ids


def _postorder_loops(c: Command):
    if isinstance(c, Seq):
        for x in c.items:
            yield from _postorder_loops(x)
    elif isinstance(c, While):
        yield from _postorder_loops(c.body)
        yield c
    elif hasattr(c, "then_branch"):
        yield from _postorder_loops(c.then_branch)
        if c.else_branch is not None:
            yield from _postorder_loops(c.else_branch)


def analyze_program(prog: Command) -> list[LoopAnalysis]:
    """Analyze every loop, innermost first; loop ids number loops in source order."""
    ids = number_loops(prog)
    return [analyze_loop(w, ids[id(w)]) for w in _postorder_loops(prog)]
