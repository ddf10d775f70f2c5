"""Joint distributions, Bayesian revision, path probabilities and expected utilities.

Everything here routes its arithmetic through a :class:`CostContext`.
"""

from __future__ import annotations

import functools
import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace

from decprune.costcount import REP, SOL, CostContext, Op, Phase
from decprune.errors import ProblemError
from decprune.model import (
    Cpt,
    NodeKind,
    Problem,
    Strategy,
    Tree,
    TreeKind,
    information_set_id,
)

ZERO_MARGINAL = 1e-12


@dataclass(frozen=True)
class JointTable:
    """Joint distribution of the chance variables.

    ``entries`` holds ``(values, probability)`` pairs in depth-first frame
    order of ``scope``, i.e. the leaf order of the probability tree.
    """

    scope: tuple[str, ...]
    entries: tuple[tuple[tuple[str, ...], float], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict[tuple[str, ...], float]:
        return dict(self.entries)

    def probability(self, assignment: Mapping[str, str]) -> float:
        key = tuple(assignment[v] for v in self.scope)
        return self._lookup[key]

    @functools.cached_property
    def _lookup(self) -> dict[tuple[str, ...], float]:
        return dict(self.entries)

    def in_order(
        self, order: Sequence[str], frames: Mapping[str, Sequence[str]]
    ) -> list[float]:
        """Entries re-listed in depth-first frame order of ``order``."""
        if sorted(order) != sorted(self.scope):
            raise ValueError(f"{order} is not a permutation of {self.scope}")
        out = []
        for combo in itertools.product(*(frames[v] for v in order)):
            out.append(self.probability(dict(zip(order, combo))))
        return out


PathProbabilityTable = dict[int, float]


def joint_distribution(
    problem: Problem, ctx: CostContext, phase: Phase = REP
) -> JointTable:
    """Multiply the CPT chain down a probability tree in causal order.

    Depth-1 edges copy their prior; every deeper edge is one multiplication,
    so ``m`` binary variables cost ``2**(m+1) - 4`` multiplications.
    """
    order = problem.causal_order
    entries: list[tuple[tuple[str, ...], float]] = []

    def walk(depth: int, assignment: dict[str, str], prod: float | None) -> None:
        if depth == len(order):
            entries.append((tuple(assignment[v] for v in order), prod))
            return
        var = order[depth]
        row = problem.cpts[var].row(assignment)
        for value, p in zip(problem.frame(var), row):
            assignment[var] = value
            walk(depth + 1, assignment, p if prod is None else prod * p)
        del assignment[var]
        if prod is not None:
            ctx.record(Op.MUL, phase, len(row))

    if order:
        walk(0, {}, None)
    else:
        entries.append(((), 1.0))
    return JointTable(scope=tuple(order), entries=tuple(entries))


def conditionals_from_joint(
    joint: JointTable,
    target_order: Sequence[str],
    frames: Mapping[str, Sequence[str]],
    ctx: CostContext,
    phase: Phase = REP,
) -> list[Cpt]:
    """Bayesian revision: ``Pr(V1), Pr(V2 | V1), ...`` for ``target_order``.

    Marginals are accumulated bottom-up in a probability tree laid out in
    ``target_order`` (``b - 1`` additions per marginal entry), then every
    conditional entry below the first level costs one division.

    Raises:
        ProblemError: ``E_ZERO_MARGINAL`` if a conditioning event has
            probability below ``1e-12``.
    """
    order = tuple(target_order)
    if sorted(order) != sorted(joint.scope):
        raise ValueError(f"{order} is not a permutation of {joint.scope}")
    m = len(order)
    marginal: dict[tuple[str, ...], float] = {}

    def accumulate(prefix: tuple[str, ...]) -> float:
        if len(prefix) == m:
            p = joint.probability(dict(zip(order, prefix)))
        else:
            children = [accumulate(prefix + (v,)) for v in frames[order[len(prefix)]]]
            p = children[0]
            for c in children[1:]:
                p = p + c
            if prefix:
                ctx.record(Op.ADD, phase, len(children) - 1)
        marginal[prefix] = p
        return p

    for v in frames[order[0]] if m else ():
        accumulate((v,))

    cpts: list[Cpt] = []
    for i, var in enumerate(order):
        parents = order[:i]
        rows: dict[tuple[str, ...], tuple[float, ...]] = {}
        for prefix in itertools.product(*(frames[p] for p in parents)):
            if i == 0:
                rows[prefix] = tuple(marginal[(v,)] for v in frames[var])
                continue
            denom = marginal[prefix]
            if denom < ZERO_MARGINAL:
                event = ", ".join(f"{p}={x}" for p, x in zip(parents, prefix))
                raise ProblemError(
                    "E_ZERO_MARGINAL",
                    f"cannot condition {var} on zero-probability event ({event})",
                )
            rows[prefix] = tuple(marginal[prefix + (v,)] / denom for v in frames[var])
            ctx.record(Op.DIV, phase, len(frames[var]))
        cpts.append(Cpt(child=var, parents=parents, rows=rows))
    return cpts


def node_path_products(
    tree: Tree,
    targets: Sequence[int],
    ctx: CostContext,
    phase: Phase = SOL,
) -> dict[int, float]:
    """Product of chance-edge probabilities from the root to each target.

    Products are shared between targets with a common prefix: each chance
    edge that lies above some target is multiplied in once, except the
    first chance edge on a path, whose probability is copied. Decision edges
    contribute a factor of one.
    """
    needed = set(targets)
    stack = list(targets)
    parents = tree.parent_of
    while stack:
        nid = stack.pop()
        if nid in parents:
            parent = parents[nid][0]
            if parent not in needed:
                needed.add(parent)
                stack.append(parent)

    products: dict[int, float | None] = {tree.root: None}
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        node = tree.nodes[nid]
        prod = products[nid]
        for e in reversed(node.edges):
            if e.child not in needed:
                continue
            if e.child in products:
                raise ProblemError(
                    "E_TREE", f"node {e.child} is shared; path products need a tree"
                )
            if node.kind is NodeKind.CHANCE:
                if e.probability is None:
                    raise ProblemError(
                        "E_MISSING_PROBABILITY",
                        f"chance edge {node.variable}={e.value} has no probability",
                    )
                if prod is None:
                    products[e.child] = e.probability
                else:
                    products[e.child] = prod * e.probability
                    ctx.record(Op.MUL, phase)
            else:
                products[e.child] = prod
            stack.append(e.child)
    return {t: (1.0 if products[t] is None else products[t]) for t in targets}


def path_probabilities(
    tree: Tree, ctx: CostContext, phase: Phase = SOL
) -> PathProbabilityTable:
    """Path probability of every scenario (leaf) of ``tree``.

    Trees with edge probabilities get incremental path products. Scenario
    trees already carry their path probabilities on the leaves, which are
    returned as they are.
    """
    leaves = tree.leaves()
    if tree.kind is TreeKind.SCENARIO:
        out = {}
        for leaf in leaves:
            pi = tree.nodes[leaf].path_probability
            if pi is None:
                raise ProblemError(
                    "E_MISSING_PATH_PROBABILITY", f"leaf {leaf} has no path probability"
                )
            out[leaf] = pi
        return out
    return node_path_products(tree, leaves, ctx, phase)


def with_path_probabilities(tree: Tree, table: Mapping[int, float]) -> Tree:
    updates = {
        leaf: replace(tree.nodes[leaf], path_probability=pi)
        for leaf, pi in table.items()
    }
    return tree.replace_nodes(updates)


def weighted_utilities(
    tree: Tree,
    ctx: CostContext,
    table: Mapping[int, float] | None = None,
    phase: Phase = SOL,
) -> Tree:
    """Copy of ``tree`` whose leaves carry ``pi(x) * v(x)``; one mul per leaf.

    ``table`` supplies the path probabilities; when omitted they are read
    from the leaves.
    """
    updates = {}
    for leaf in tree.leaves():
        node = tree.nodes[leaf]
        pi = node.path_probability if table is None else table[leaf]
        if pi is None:
            raise ProblemError(
                "E_MISSING_PATH_PROBABILITY", f"leaf {leaf} has no path probability"
            )
        ctx.record(Op.MUL, phase)
        updates[leaf] = replace(node, path_probability=pi, weighted_utility=pi * node.utility)
    return tree.replace_nodes(updates)


def strategy_expected_utility(
    strategy: Strategy,
    joint: JointTable,
    problem: Problem,
    ctx: CostContext,
    phase: Phase = SOL,
) -> float:
    """Expected utility of ``strategy`` as one row of the strategy matrix.

    Costs one multiplication per chance event plus the additions that sum
    the terms.
    """
    choices = strategy.as_dict()
    decisions = problem.decision_variables
    total: float | None = None
    for values, p in joint.entries:
        assignment = dict(zip(joint.scope, values))
        for d in decisions:
            assignment[d] = choices[information_set_id(problem, d, assignment)]
        term = p * problem.utility.value(assignment)
        ctx.record(Op.MUL, phase)
        if total is None:
            total = term
        else:
            total = total + term
            ctx.record(Op.ADD, phase)
    return total
