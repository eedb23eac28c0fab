from pathlib import Path

import pytest

from lqicm.lang import If, Seq, Var, While, Assign, Binary, IntLit, flatten, parse

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"


def load(name: str) -> Seq:
    return parse((PROGRAMS / name).read_text())


@pytest.fixture
def example2():
    return load("example2.wh")


@pytest.fixture
def example3():
    return load("example3.wh")


def first_loop(prog) -> While:
    return next(c for c in flatten(prog) if isinstance(c, While))


def disable_after(prog: Seq, positions, d: int) -> Seq:
    """Rewrite the first loop of ``prog`` so the chunks at ``positions`` only run in iterations 1..d.

    Semantic oracle for invariance degrees, independent of the analysis.
    """
    items = list(prog.items)
    k = next(i for i, c in enumerate(items) if isinstance(c, While))
    loop = items[k]
    body = []
    for pos, c in enumerate(flatten(loop.body)):
        if pos in positions:
            c = If(Binary("<", Var("__iter"), IntLit(d)), Seq((c,)))
        body.append(c)
    body.append(Assign("__iter", Binary("+", Var("__iter"), IntLit(1))))
    items[k] = While(loop.cond, Seq(tuple(body)))
    return Seq((Assign("__iter", IntLit(0)), *items))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
