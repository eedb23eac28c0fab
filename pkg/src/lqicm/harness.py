"""Random program generation, differential campaigns and step-count benchmarks."""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .interp import Status, equivalent, run
from .lang import (Assign, Binary, Command, Expr, If, IntLit, Seq, Skip, Use,
                   Var, While, pretty, variables)
from .transform import optimize

Transform = Callable[[Command], Command]


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 2          # nesting depth of while/if
    max_body_len: int = 5
    var_pool_size: int = 5
    loop_probability: float = 0.25
    if_probability: float = 0.15
    use_probability: float = 0.15
    max_uses: int = 3
    terminating: bool = True    # loops are counted: i = 0; while (i < n) {...; i = i + 1;}
    store_low: int = -3
    store_high: int = 5


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.pool = [chr(ord("a") + k) for k in range(cfg.var_pool_size)]
        self.uses = 0
        self.loops = 0
        self.bounds: list[str] = []     # loop bound and counter variables, read-only for statements

    def readable(self) -> list[str]:
        return self.pool + self.bounds

    def expr(self, depth: int = 2) -> Expr:
        r = self.rng
        if depth == 0 or r.random() < 0.35:
            if r.random() < 0.3:
                return IntLit(r.randint(-2, 4))
            return Var(r.choice(self.readable()))
        op = r.choices(["+", "-", "*", "/", "%", "<", "==", "!="],
                       weights=[6, 4, 3, 0.5, 0.5, 1, 1, 1])[0]
        return Binary(op, self.expr(depth - 1), self.expr(depth - 1))

    def assign(self) -> Assign:
        r = self.rng
        target = r.choice(self.pool)
        kind = r.random()
        if kind < 0.2:
            value = IntLit(r.randint(-2, 4))
        elif kind < 0.4:
            value = Var(r.choice(self.readable()))
        else:
            value = self.expr()
        return Assign(target, value)

    def use(self) -> Use:
        args = self.rng.sample(self.pool, self.rng.randint(1, 2))
        site = self.uses
        self.uses += 1
        return Use(tuple(args), site=site)

    def stmt(self, depth: int) -> list[Command]:
        r = self.rng
        cfg = self.cfg
        x = r.random()
        if depth < cfg.max_depth and x < cfg.loop_probability:
            return self.loop(depth + 1)
        x -= cfg.loop_probability
        if depth < cfg.max_depth and x < cfg.if_probability:
            then = Seq(tuple(self.block(depth + 1)))
            other = Seq(tuple(self.block(depth + 1))) if r.random() < 0.4 else None
            return [If(self.expr(1), then, other)]
        x -= cfg.if_probability
        if 0 <= x < cfg.use_probability and self.uses < cfg.max_uses:
            return [self.use()]
        if r.random() < 0.03:
            return [Skip()]
        return [self.assign()]

    def block(self, depth: int, lo: int = 1) -> list[Command]:
        out: list[Command] = []
        for _ in range(self.rng.randint(lo, self.cfg.max_body_len)):
            out.extend(self.stmt(depth))
        return out

    def loop(self, depth: int) -> list[Command]:
        k = self.loops
        self.loops += 1
        if not self.cfg.terminating:
            body = self.block(depth)
            return [While(self.expr(1), Seq(tuple(body)))]
        counter, bound = f"i{k}", f"n{k}"
        self.bounds += [bound, counter]
        body = self.block(depth)
        step = Assign(counter, Binary("+", Var(counter), IntLit(1)))
        body.insert(self.rng.randint(0, len(body)), step)
        cond = Binary("<", Var(counter), Var(bound))
        return [Assign(counter, IntLit(0)), While(cond, Seq(tuple(body)))]

    def program(self) -> Seq:
        items = self.block(0)
        if self.loops == 0:
            items.extend(self.loop(1))
        return Seq(tuple(items))


def _rng(cfg: GenConfig, index: int, salt: str = "") -> random.Random:
    return random.Random(f"{cfg.seed}:{index}:{salt}")


def gen_program(cfg: GenConfig, index: int) -> Seq:
    """The ``index``-th program of the stream defined by ``cfg``; always contains a loop."""
    return _Gen(cfg, _rng(cfg, index)).program()


def gen_stores(cfg: GenConfig, prog: Command, index: int, count: int) -> list[dict[str, int]]:
    rng = _rng(cfg, index, "stores")
    names = variables(prog)
    return [{v: rng.randint(cfg.store_low, cfg.store_high) for v in names}
            for _ in range(count)]


@dataclass
class CampaignResult:
    index: int
    seed: int
    status: str  # "ok" | "fail"
    witness: Optional[dict[str, int]] = None
    reason: str = ""
    program: str = ""

    def to_json(self) -> dict:
        d = {"index": self.index, "seed": self.seed, "status": self.status,
             "witness": self.witness}
        if self.status == "fail":
            d["reason"] = self.reason
            d["program"] = self.program
        return d


@dataclass
class CampaignReport:
    results: list[CampaignResult] = field(default_factory=list)

    @property
    def failures(self) -> list[CampaignResult]:
        return [r for r in self.results if r.status == "fail"]


def iter_campaign(cfg: GenConfig, count: int, stores_per_program: int = 5,
                  fuel: int = 100_000, transform: Transform = optimize
                  ) -> Iterator[CampaignResult]:
    for index in range(count):
        prog = gen_program(cfg, index)
        new = transform(prog)
        stores = gen_stores(cfg, prog, index, stores_per_program)
        v = equivalent(prog, new, stores, fuel)
        if v:
            yield CampaignResult(index, cfg.seed, "ok")
        else:
            yield CampaignResult(index, cfg.seed, "fail", v.witness, v.reason, pretty(prog))


def difftest_campaign(cfg: GenConfig, count: int, stores_per_program: int = 5,
                      fuel: int = 100_000, transform: Transform = optimize
                      ) -> CampaignReport:
    """Compare every generated program with its transformed version on random stores."""
    return CampaignReport(list(iter_campaign(cfg, count, stores_per_program, fuel, transform)))


def literal_rule_optimize(prog: Command) -> Command:
    return optimize(prog, literal_copy_rule=True)


# --- rewrite-lemma instances ----------------------------------------------

_LEMMA_POOL = ("p", "q", "r", "s", "t", "u")


def _small_expr(rng: random.Random, sources: Sequence[str], depth: int = 1) -> Expr:
    if not sources or rng.random() < 0.2:
        return IntLit(rng.randint(-2, 4))
    if depth == 0 or rng.random() < 0.4:
        return Var(rng.choice(sources))
    op = rng.choice(["+", "-", "*", "<", "!="])
    return Binary(op, _small_expr(rng, sources, depth - 1), _small_expr(rng, sources, depth - 1))


def _small_block(rng: random.Random, targets: Sequence[str], sources: Sequence[str],
                 uses: bool = True, length: int = 2) -> list[Command]:
    out: list[Command] = []
    for _ in range(rng.randint(1, length)):
        x = rng.random()
        if uses and sources and x < 0.15:
            out.append(Use((rng.choice(sources),), site=rng.randint(0, 3)))
        elif x < 0.3 and targets:
            then = Seq(tuple(_small_block(rng, targets, sources, uses, 1)))
            out.append(If(_small_expr(rng, sources), then))
        elif targets:
            out.append(Assign(rng.choice(targets), _small_expr(rng, sources)))
    return out or [Skip()]


def _split(rng: random.Random, guarded: bool, parts: int) -> list[list[str]]:
    """Disjoint variable groups when ``guarded``, otherwise overlapping random picks."""
    pool = list(_LEMMA_POOL)
    if guarded:
        rng.shuffle(pool)
        cuts = sorted(rng.sample(range(1, len(pool)), parts - 1))
        return [pool[a:b] for a, b in zip([0] + cuts, cuts + [len(pool)])]
    return [rng.sample(pool, rng.randint(1, 3)) for _ in range(parts)]


def gen_swap_instance(rng: random.Random) -> tuple[Command, Command]:
    guarded = rng.random() < 0.6
    w1, r1, w2, r2 = _split(rng, guarded, 4)
    if guarded:
        # reads may be shared, writes never touch the other side
        shared = rng.sample(r1 + r2, min(2, len(r1 + r2)))
        r1, r2 = r1 + shared, r2 + shared
    c1 = Seq(tuple(_small_block(rng, w1, r1)))
    c2 = Seq(tuple(_small_block(rng, w2, r2, uses=rng.random() < 0.5)))
    return c1, c2


def gen_specialize_instance(rng: random.Random) -> While:
    guarded = rng.random() < 0.6
    w, r = _split(rng, guarded, 2)
    body = Seq(tuple(_small_block(rng, w, r, uses=not guarded, length=3)))
    return While(_small_expr(rng, r), body)


def gen_hoist_instance(rng: random.Random) -> While:
    """``while (k < m) {head; rest...; k = k + 1}`` with a counted loop."""
    guarded = rng.random() < 0.6
    wh, rh, wr = _split(rng, guarded, 3)
    rr = [v for v in _LEMMA_POOL if v not in wh] if guarded else list(_LEMMA_POOL)
    head = _small_block(rng, wh, rh, uses=not guarded, length=1)[0]
    rest = _small_block(rng, wr, rr + ["k"], length=3)
    step = Assign("k", Binary("+", Var("k"), IntLit(1)))
    return While(Binary("<", Var("k"), Var("m")), Seq((head, *rest, step)))


@dataclass
class LemmaReport:
    kind: str
    performed: int = 0
    refused: int = 0
    failures: list[tuple[str, str, dict]] = field(default_factory=list)


def lemma_campaign(kind: str, count: int, seed: int = 0, stores_per_instance: int = 5,
                   fuel: int = 2_000, max_candidates: int = 100_000) -> LemmaReport:
    """Generate candidates until ``count`` of them are rewritten; check each rewrite on random stores.

    ``kind`` is one of ``swap``, ``specialize_while``, ``hoist_head``.
    """
    from .transform import hoist_head, specialize_while, swap

    rng = random.Random(f"lemma:{kind}:{seed}")
    report = LemmaReport(kind)
    for _ in range(max_candidates):
        if report.performed >= count:
            break
        if kind == "swap":
            c1, c2 = gen_swap_instance(rng)
            original, rewritten = Seq((c1, c2)), swap(c1, c2)
        elif kind == "specialize_while":
            original = gen_specialize_instance(rng)
            rewritten = specialize_while(original)
        elif kind == "hoist_head":
            original = gen_hoist_instance(rng)
            rewritten = hoist_head(original)
        else:
            raise ValueError(f"unknown rewrite {kind!r}")
        if rewritten is None:
            report.refused += 1
            continue
        report.performed += 1
        names = variables(original)
        stores = [{v: rng.randint(-3, 5) for v in names} for _ in range(stores_per_instance)]
        v = equivalent(original, rewritten, stores, fuel)
        if not v:
            report.failures.append((pretty(original), v.reason, v.witness))
    return report


# --- complexity benchmark --------------------------------------------------

@dataclass
class BenchRow:
    n: int
    steps_original: Optional[int]
    steps_optimized: Optional[int]
    traces_match: bool


@dataclass
class BenchTable:
    rows: list[BenchRow]
    slope_original: Optional[float]
    slope_optimized: Optional[float]

    def ratios(self, column: str) -> list[float]:
        vals = [getattr(r, column) for r in self.rows]
        return [b / a for a, b in zip(vals, vals[1:])]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x and y]
    if len(pts) < 2:
        return None
    return statistics.linear_regression([p[0] for p in pts], [p[1] for p in pts]).slope


def bench_complexity(prog: Command, sizes: Sequence[int],
                     bind: Callable[[int], Mapping[str, int]],
                     fuel: int = 50_000_000, transform: Transform = optimize) -> BenchTable:
    """Step counts of ``prog`` and its optimized form for each size ``n``.

    ``bind(n)`` gives the initial store for size ``n``.  A run that runs out
    of fuel is reported with ``None`` steps.
    """
    opt = transform(prog)
    rows = []
    for n in sizes:
        store = dict(bind(n))
        a, b = run(prog, store, fuel), run(opt, store, fuel)
        rows.append(BenchRow(
            n,
            a.steps if a.status is not Status.FUEL_EXHAUSTED else None,
            b.steps if b.status is not Status.FUEL_EXHAUSTED else None,
            a.trace == b.trace))
    ok = [r for r in rows if r.steps_original and r.steps_optimized]
    return BenchTable(rows,
                      loglog_slope([r.n for r in ok], [r.steps_original for r in ok]),
                      loglog_slope([r.n for r in ok], [r.steps_optimized for r in ok]))
