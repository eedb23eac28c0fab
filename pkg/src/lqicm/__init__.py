"""Loop quasi-invariant detection and peeling for a small WHILE language."""

from .analysis import INF, LoopAnalysis, analyze_loop, analyze_program
from .interp import Outcome, Status, equivalent, run
from .lang import ParseError, parse, pretty
from .transform import optimize, peel, plan_peeling

__all__ = [
    "INF", "LoopAnalysis", "analyze_loop", "analyze_program",
    "Outcome", "Status", "equivalent", "run",
    "ParseError", "parse", "pretty",
    "optimize", "peel", "plan_peeling",
]
