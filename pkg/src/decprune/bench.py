"""Random symmetric problems and operation-count scaling checks.

Problems are drawn with numpy's PCG64 bit generator seeded through
``SeedSequence([seed, trial])``. Draw order, for reproducibility:

1. ``structure="dag"`` only: for each chance variable after the first, the
   number of parents (``integers(0, min(i, 2) + 1)``) and then the parents
   themselves (``choice`` without replacement among earlier variables).
2. For each chance variable in causal order and each parent assignment in
   frame-product order, ``uniform(0.05, 0.95)`` for the first value; the
   second value gets the complement.
3. For each assignment of all variables (declaration order, chance then
   decision) in frame-product order, a utility ``uniform(0, 10)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from decprune.builders import default_decision_order, requires_bayesian_revision
from decprune.model import (
    Cpt,
    Problem,
    UtilityTable,
    Variable,
    VarKind,
    problem_information_sets,
    validate_problem,
)
from decprune.solvers import METHODS, solve

# Strategy-matrix runs cost about 2**(m+k) steps; skip cells beyond this.
MATRIX_LIMIT = 16


@dataclass(frozen=True)
class BenchConfig:
    """Shape of a generated problem.

    ``observes[j]`` lists the (0-based, causal-order) chance variables that
    decision ``j`` observes. ``None`` means the tail pattern: decision ``j``
    observes chance variable ``m - 1 - j``, the way a symptom at the end of
    a causal chain is observed.
    """

    m: int
    n: int
    seed: int = 0
    trials: int = 1
    observes: tuple[tuple[int, ...], ...] | None = None
    structure: str = "chain"

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 0:
            raise ValueError("need m >= 1 chance and n >= 0 decision variables")
        if self.structure not in ("chain", "dag"):
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.observes is not None:
            if len(self.observes) != self.n:
                raise ValueError("observes needs one entry per decision")
            for obs in self.observes:
                if any(not 0 <= i < self.m for i in obs):
                    raise ValueError(f"observation {obs} names a missing chance variable")

    def observation_pattern(self) -> tuple[tuple[int, ...], ...]:
        if self.observes is not None:
            return self.observes
        return tuple((self.m - 1 - j,) if j < self.m else () for j in range(self.n))


def _rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def generate_problem(cfg: BenchConfig, trial: int = 0) -> Problem:
    """Random binary problem; identical inputs give identical problems."""
    rng = _rng(cfg.seed, trial)
    chance = [f"X{i + 1}" for i in range(cfg.m)]
    decisions = [f"T{j + 1}" for j in range(cfg.n)]
    variables = [
        Variable(c, VarKind.CHANCE, (c.lower(), "~" + c.lower())) for c in chance
    ] + [Variable(d, VarKind.DECISION, (d.lower(), "~" + d.lower())) for d in decisions]
    frames = {v.name: v.frame for v in variables}

    parents: dict[str, tuple[str, ...]] = {chance[0]: ()}
    for i, c in enumerate(chance[1:], start=1):
        if cfg.structure == "chain":
            parents[c] = (chance[i - 1],)
        else:
            k = int(rng.integers(0, min(i, 2) + 1))
            picked = sorted(int(x) for x in rng.choice(i, size=k, replace=False))
            parents[c] = tuple(chance[x] for x in picked)

    cpts = {}
    for c in chance:
        rows = {}
        for key in itertools.product(*(frames[p] for p in parents[c])):
            p = float(rng.uniform(0.05, 0.95))
            rows[key] = (p, 1.0 - p)
        cpts[c] = Cpt(child=c, parents=parents[c], rows=rows)

    scope = tuple(v.name for v in variables)
    entries = {
        key: float(rng.uniform(0.0, 10.0))
        for key in itertools.product(*(frames[v] for v in scope))
    }
    observations = {
        d: tuple(chance[i] for i in sorted(obs))
        for d, obs in zip(decisions, cfg.observation_pattern())
    }
    return validate_problem(
        Problem(
            name=f"bench-m{cfg.m}-n{cfg.n}-s{cfg.seed}-t{trial}",
            variables=tuple(variables),
            cpts=cpts,
            utility=UtilityTable(scope=scope, entries=entries),
            observations=observations,
            causal_order=tuple(chance),
        )
    )


def information_set_count(problem: Problem) -> int:
    return len(problem_information_sets(problem))


def formula_total(method: str, m: int, n: int, k: int, revision: bool = True) -> int:
    """Approximate total operation count predicted for a symmetric binary problem."""
    if method == "matrix":
        return 2 ** (m + k + 1) + 2 ** (m + 1)
    if method == "dt-rollback":
        if revision:
            return 2 ** (m + n + 1) + 2 ** (m + 2) + 2**m
        return 2 ** (m + n + 1)
    if method == "st-prune":
        return 2 ** (m + n + 1) + 2 ** (m + 1)
    if method == "gt-rollback":
        return 2 ** (m + n + 1) + 2 ** (m + n) + 2 ** (m + n - 1) + 2 ** (m + 1)
    if method == "gt-prune":
        return 2 ** (m + n + 1) + 2 ** (m + n - 1) + 2 ** (m + 1)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ScalingRow:
    method: str
    m: int
    n: int
    trial: int
    k: int
    revision: bool
    measured: int
    formula: int
    expected_utility: float

    @property
    def ratio(self) -> float:
        return self.measured / self.formula


def verify_scaling(
    m_values: Iterable[int],
    n_values: Iterable[int],
    methods: Sequence[str] = METHODS,
    *,
    seed: int = 0,
    trials: int = 1,
    matrix_limit: int = MATRIX_LIMIT,
) -> tuple[list[ScalingRow], list[tuple[str, int, int]]]:
    """Measure every method on generated problems and pair with the formulas.

    Returns the rows ordered by (method, m, n, trial) and the
    ``(method, m, n)`` cells skipped because the strategy matrix would be
    too large (``m + k > matrix_limit``).
    """
    rows: list[ScalingRow] = []
    skipped: list[tuple[str, int, int]] = []
    for m in m_values:
        for n in n_values:
            cfg = BenchConfig(m=m, n=n, seed=seed, trials=trials)
            for trial in range(trials):
                problem = generate_problem(cfg, trial)
                k = information_set_count(problem)
                revision = requires_bayesian_revision(
                    problem, default_decision_order(problem)
                )
                for method in methods:
                    if method == "matrix" and m + k > matrix_limit:
                        if (method, m, n) not in skipped:
                            skipped.append((method, m, n))
                        continue
                    sol = solve(problem, method)
                    rows.append(
                        ScalingRow(
                            method=method,
                            m=m,
                            n=n,
                            trial=trial,
                            k=k,
                            revision=revision,
                            measured=sol.cost.total,
                            formula=formula_total(method, m, n, k, revision),
                            expected_utility=sol.expected_utility,
                        )
                    )
    order = {name: i for i, name in enumerate(METHODS)}
    rows.sort(key=lambda r: (order.get(r.method, len(order)), r.m, r.n, r.trial))
    return rows, skipped
