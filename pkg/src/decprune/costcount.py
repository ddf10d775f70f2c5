"""Arithmetic operation accounting.

Every counted arithmetic step in the probability and solver code calls
:meth:`CostContext.record` right where it happens, tagged with the phase it
belongs to. The counting conventions are:

* path products are built incrementally down a tree; the first chance edge
  on a path copies its probability for free, every later chance edge is one
  multiplication;
* summing ``c`` values is ``c - 1`` additions, and picking the best of
  ``c`` candidates is ``c - 1`` comparisons;
* averaging out a chance node with ``b`` branches is ``b`` multiplications
  plus ``b - 1`` additions;
* each conditional probability derived from a joint is one division;
* each weighted utility is one multiplication.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field


class Op(str, enum.Enum):
    ADD = "add"
    MUL = "mul"
    DIV = "div"
    CMP = "cmp"


class Phase(str, enum.Enum):
    REPRESENTATION = "representation"
    SOLUTION = "solution"


@dataclass(frozen=True)
class OpCounts:
    add: int = 0
    mul: int = 0
    div: int = 0
    cmp: int = 0

    @property
    def total(self) -> int:
        return self.add + self.mul + self.div + self.cmp

    def __add__(self, other: OpCounts) -> OpCounts:
        return OpCounts(
            self.add + other.add,
            self.mul + other.mul,
            self.div + other.div,
            self.cmp + other.cmp,
        )


@dataclass(frozen=True)
class CostReport:
    representation: OpCounts = OpCounts()
    solution: OpCounts = OpCounts()
    info: dict[str, int] = field(default_factory=dict)

    @property
    def overall(self) -> OpCounts:
        return self.representation + self.solution

    @property
    def total(self) -> int:
        return self.representation.total + self.solution.total

    def line(self) -> str:
        return (
            f"ops: representation={self.representation.total} "
            f"solution={self.solution.total} total={self.total}"
        )

    def as_dict(self) -> dict:
        def phase(c: OpCounts) -> dict:
            return {"add": c.add, "mul": c.mul, "div": c.div, "cmp": c.cmp,
                    "total": c.total}

        return {
            "representation": phase(self.representation),
            "solution": phase(self.solution),
            "total": self.total,
            "info": dict(self.info),
        }


class CostContext:
    """Mutable counters for one solver invocation.

    Not thread-safe by design: give each concurrent invocation its own.
    """

    def __init__(self) -> None:
        self._counts: Counter[tuple[Phase, Op]] = Counter()
        self._info: Counter[str] = Counter()

    def record(self, op: Op | str, phase: Phase | str, count: int = 1) -> None:
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        self._counts[Phase(phase), Op(op)] += count

    def note(self, name: str, count: int) -> None:
        """Informational counter that does not enter any total."""
        self._info[name] += count

    def counts(self, phase: Phase | str) -> OpCounts:
        p = Phase(phase)
        return OpCounts(*(self._counts[p, op] for op in Op))

    def report(self) -> CostReport:
        return CostReport(
            representation=self.counts(Phase.REPRESENTATION),
            solution=self.counts(Phase.SOLUTION),
            info=dict(self._info),
        )


REP = Phase.REPRESENTATION
SOL = Phase.SOLUTION
