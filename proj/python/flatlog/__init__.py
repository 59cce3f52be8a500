"""Recursive Datalog with worst-case optimal joins over sorted columns."""

from ._core import (
    Engine,
    FlatlogError,
    InternalError,
    IoError,
    ProgramError,
    rewrite,
    strata,
)

__all__ = [
    "Engine",
    "FlatlogError",
    "InternalError",
    "IoError",
    "ProgramError",
    "evaluate",
    "rewrite",
    "strata",
]


def evaluate(source, facts=None, **options):
    """Runs `source` over `facts` ({relation: rows}) and returns every
    relation's tuples as sorted lists of strings."""
    engine = Engine(source, **options)
    for name, rows in (facts or {}).items():
        engine.add_facts(name, [[str(v) for v in row] for row in rows])
    engine.run()
    return {name: engine.rows(name) for name in engine.relations}
