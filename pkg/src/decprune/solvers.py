"""The five solution methods and a one-call :func:`solve` front end.

=============  ==========================================================
method         what it does
=============  ==========================================================
matrix         expected utility of every strategy, then the best one
dt-rollback    decision tree, averaging out and folding back
st-prune       scenario tree, weighted utilities summed and maximised
gt-rollback    game tree, maximisation of (unnormalised) conditional
               expectation per information set
gt-prune       game tree, weighted utilities summed per information set
=============  ==========================================================

Ties are broken by frame order everywhere: a candidate replaces the
incumbent only when it is strictly larger.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from decprune import builders
from decprune.costcount import REP, SOL, CostContext, CostReport, Op
from decprune.errors import ProblemError
from decprune.model import (
    InformationSet,
    NodeKind,
    Problem,
    Strategy,
    Tree,
    enumerate_strategies,
    problem_information_sets,
)
from decprune.probability import (
    joint_distribution,
    node_path_products,
    path_probabilities,
    strategy_expected_utility,
    weighted_utilities,
)

METHODS = ("matrix", "dt-rollback", "st-prune", "gt-rollback", "gt-prune")


@dataclass(frozen=True)
class SetTrace:
    """How one information set was pruned.

    ``terms[value]`` are the per-member quantities that were summed into
    ``scores[value]``: probability-weighted values for rollback, weighted
    utilities for pruning, a single child value for singleton sets.
    """

    id: str
    members: tuple[int, ...]
    member_probabilities: tuple[float, ...] | None
    terms: dict[str, tuple[float, ...]]
    scores: dict[str, float]
    chosen: str


@dataclass
class Trace:
    node_values: dict[int, float] = field(default_factory=dict)
    chosen_edges: dict[int, str] = field(default_factory=dict)
    sets: dict[str, SetTrace] = field(default_factory=dict)


@dataclass(frozen=True)
class Solution:
    method: str
    strategy: Strategy
    expected_utility: float
    cost: CostReport
    per_strategy_utilities: dict[Strategy, float] | None = None
    trace: Trace | None = None
    tree: Tree | None = None


def _argmax(values: Sequence[float], ctx: CostContext) -> int:
    best = 0
    for i in range(1, len(values)):
        ctx.record(Op.CMP, SOL)
        if values[i] > values[best]:
            best = i
    return best


def _sum(values: Sequence[float], ctx: CostContext) -> float:
    total = values[0]
    for v in values[1:]:
        total = total + v
    if len(values) > 1:
        ctx.record(Op.ADD, SOL, len(values) - 1)
    return total


def _strategy(tree: Tree, choices: dict[str, str]) -> Strategy:
    return Strategy(
        tuple((sid, choices[tree.aliases.get(sid, sid)]) for sid in tree.set_ids)
    )


# --------------------------------------------------------------------------
# strategy matrix
# --------------------------------------------------------------------------


def solve_strategy_matrix(problem: Problem, ctx: CostContext) -> Solution:
    """Evaluate every strategy against the joint distribution.

    The joint is representation work; the per-strategy expected utilities
    and the final comparison are solution work.
    """
    joint = joint_distribution(problem, ctx, REP)
    strategies = enumerate_strategies(problem_information_sets(problem))
    eus = [strategy_expected_utility(s, joint, problem, ctx, SOL) for s in strategies]
    best = _argmax(eus, ctx)
    return Solution(
        method="matrix",
        strategy=strategies[best],
        expected_utility=eus[best],
        cost=ctx.report(),
        per_strategy_utilities=dict(zip(strategies, eus)),
    )


# --------------------------------------------------------------------------
# decision and scenario trees
# --------------------------------------------------------------------------


def rollback_decision_tree(tree: Tree, ctx: CostContext) -> Solution:
    """Average out chance nodes and fold back decision nodes, leaves first.

    Works on coalesced DAGs too: a shared node is evaluated once.

    Raises:
        ProblemError: ``E_MISSING_PROBABILITY`` if a chance edge carries no
            probability, ``E_NOT_DECISION_TREE`` if an information set has
            more than one member.
    """
    if any(len(s.members) > 1 for s in tree.information_sets):
        raise ProblemError(
            "E_NOT_DECISION_TREE", "rollback needs singleton information sets"
        )
    trace = Trace()
    memo = trace.node_values

    def value(nid: int) -> float:
        if nid in memo:
            return memo[nid]
        node = tree.nodes[nid]
        if node.is_leaf:
            v = node.utility
        elif node.kind is NodeKind.CHANCE:
            terms = []
            for e in node.edges:
                if e.probability is None:
                    raise ProblemError(
                        "E_MISSING_PROBABILITY",
                        f"chance edge {node.variable}={e.value} has no probability",
                    )
                terms.append(e.probability * value(e.child))
            ctx.record(Op.MUL, SOL, len(terms))
            v = _sum(terms, ctx)
        else:
            vals = [value(e.child) for e in node.edges]
            best = _argmax(vals, ctx)
            v = vals[best]
            _record_singleton(tree, nid, vals, best, trace)
        memo[nid] = v
        return v

    eu = value(tree.root)
    choices = {st.id: st.chosen for st in trace.sets.values()}
    return Solution(
        method="dt-rollback",
        strategy=_strategy(tree, choices),
        expected_utility=eu,
        cost=ctx.report(),
        trace=trace,
        tree=tree,
    )


def _record_singleton(
    tree: Tree, nid: int, vals: list[float], best: int, trace: Trace
) -> None:
    node = tree.nodes[nid]
    s = tree.set_of[nid]
    labels = [e.value for e in node.edges]
    trace.chosen_edges[nid] = labels[best]
    trace.sets[s.id] = SetTrace(
        id=s.id,
        members=(nid,),
        member_probabilities=None,
        terms={lab: (v,) for lab, v in zip(labels, vals)},
        scores=dict(zip(labels, vals)),
        chosen=labels[best],
    )


def prune_scenario_tree(tree: Tree, ctx: CostContext) -> Solution:
    """Pruning on weighted utilities: sum at chance nodes, max at decisions.

    Reads the path probabilities stored on the leaves.

    Raises:
        ProblemError: ``E_MISSING_PATH_PROBABILITY`` if a leaf has none.
    """
    if any(len(s.members) > 1 for s in tree.information_sets):
        raise ProblemError(
            "E_NOT_DECISION_TREE", "scenario trees have singleton information sets"
        )
    pis = {}
    for leaf in tree.leaves():
        pi = tree.nodes[leaf].path_probability
        if pi is None:
            raise ProblemError(
                "E_MISSING_PATH_PROBABILITY", f"leaf {leaf} has no path probability"
            )
        pis[leaf] = pi
    weighted = weighted_utilities(tree, ctx, pis, SOL)
    trace = Trace()
    memo = trace.node_values

    def value(nid: int) -> float:
        if nid in memo:
            return memo[nid]
        node = weighted.nodes[nid]
        if node.is_leaf:
            v = node.weighted_utility
        elif node.kind is NodeKind.CHANCE:
            v = _sum([value(e.child) for e in node.edges], ctx)
        else:
            vals = [value(e.child) for e in node.edges]
            best = _argmax(vals, ctx)
            v = vals[best]
            _record_singleton(weighted, nid, vals, best, trace)
        memo[nid] = v
        return v

    eu = value(weighted.root)
    choices = {st.id: st.chosen for st in trace.sets.values()}
    return Solution(
        method="st-prune",
        strategy=_strategy(weighted, choices),
        expected_utility=eu,
        cost=ctx.report(),
        trace=trace,
        tree=weighted,
    )


# --------------------------------------------------------------------------
# game trees
# --------------------------------------------------------------------------


def rollback_game_tree(tree: Tree, ctx: CostContext) -> Solution:
    """Rollback with pruning by maximisation of conditional expectation.

    Member probabilities of every non-singleton information set come from
    one shared pass of incremental path products. The normalisation by the
    probability of reaching the set is skipped because it cannot change
    the argmax. Singleton sets are folded back by plain maximisation.

    Raises:
        ProblemError: ``E_SET_NOT_READY`` if a set is needed while one of
            its own members' subtrees is still being pruned;
            ``E_MISSING_PROBABILITY`` as for decision trees.
    """
    members = [m for s in tree.information_sets if len(s.members) > 1 for m in s.members]
    probs = node_path_products(tree, members, ctx, SOL)
    return _solve_game(tree, ctx, "gt-rollback", probs)


def prune_game_tree(tree: Tree, ctx: CostContext) -> Solution:
    """Pruning method on a game tree.

    Path probabilities and weighted utilities come first; each information
    set then picks the value with the largest sum of weighted utilities and
    chance nodes are pruned by summation.
    """
    pis = path_probabilities(tree, ctx, SOL)
    weighted = weighted_utilities(tree, ctx, pis, SOL)
    return _solve_game(weighted, ctx, "gt-prune", None)


def _solve_game(
    tree: Tree,
    ctx: CostContext,
    method: str,
    probs: dict[int, float] | None,
) -> Solution:
    rollback = probs is not None
    trace = Trace()
    memo = trace.node_values
    active: set[str] = set()

    def value(nid: int) -> float:
        if nid in memo:
            return memo[nid]
        node = tree.nodes[nid]
        if node.is_leaf:
            v = node.utility if rollback else node.weighted_utility
        elif node.kind is NodeKind.CHANCE:
            if rollback:
                terms = []
                for e in node.edges:
                    if e.probability is None:
                        raise ProblemError(
                            "E_MISSING_PROBABILITY",
                            f"chance edge {node.variable}={e.value} has no probability",
                        )
                    terms.append(e.probability * value(e.child))
                ctx.record(Op.MUL, SOL, len(terms))
                v = _sum(terms, ctx)
            else:
                v = _sum([value(e.child) for e in node.edges], ctx)
        else:
            prune_set(tree.set_of[nid])
            return memo[nid]
        memo[nid] = v
        return v

    def prune_set(s: InformationSet) -> None:
        if s.id in active:
            raise ProblemError(
                "E_SET_NOT_READY",
                f"information set {s.id} is reached again from inside one of "
                "its members' subtrees",
            )
        active.add(s.id)
        child_vals = {
            m: [value(e.child) for e in tree.nodes[m].edges] for m in s.members
        }
        active.discard(s.id)

        if len(s.members) == 1:
            (m,) = s.members
            best = _argmax(child_vals[m], ctx)
            memo[m] = child_vals[m][best]
            _record_singleton(tree, m, child_vals[m], best, trace)
            return

        member_p = tuple(probs[m] for m in s.members) if rollback else None
        terms: dict[str, tuple[float, ...]] = {}
        scores: list[float] = []
        for j, label in enumerate(s.values):
            if rollback:
                col = tuple(p * child_vals[m][j] for p, m in zip(member_p, s.members))
                ctx.record(Op.MUL, SOL, len(col))
            else:
                col = tuple(child_vals[m][j] for m in s.members)
            terms[label] = col
            scores.append(_sum(col, ctx))
        best = _argmax(scores, ctx)
        for m in s.members:
            memo[m] = child_vals[m][best]
            trace.chosen_edges[m] = s.values[best]
        trace.sets[s.id] = SetTrace(
            id=s.id,
            members=s.members,
            member_probabilities=member_p,
            terms=terms,
            scores=dict(zip(s.values, scores)),
            chosen=s.values[best],
        )

    eu = value(tree.root)
    choices = {st.id: st.chosen for st in trace.sets.values()}
    return Solution(
        method=method,
        strategy=_strategy(tree, choices),
        expected_utility=eu,
        cost=ctx.report(),
        trace=trace,
        tree=tree,
    )


# --------------------------------------------------------------------------
# front end
# --------------------------------------------------------------------------


def solve(
    problem: Problem,
    method: str,
    *,
    order: Sequence[str] | None = None,
    coalesce: bool = False,
) -> Solution:
    """Represent and solve ``problem`` with one fresh accounting context.

    ``order`` is the decision/scenario tree variable sequence;
    ``coalesce`` applies to ``dt-rollback`` only.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if coalesce and method != "dt-rollback":
        raise ValueError("coalescence only applies to dt-rollback")
    if order is not None and method not in ("dt-rollback", "st-prune"):
        raise ValueError(f"a variable order does not apply to {method}")
    ctx = CostContext()
    if method == "matrix":
        return solve_strategy_matrix(problem, ctx)
    if method == "dt-rollback":
        tree = builders.build_decision_tree(problem, order, ctx)
        if coalesce:
            tree = builders.coalesce(tree, ctx=ctx)
        return rollback_decision_tree(tree, ctx)
    if method == "st-prune":
        return prune_scenario_tree(builders.build_scenario_tree(problem, order, ctx), ctx)
    tree = builders.build_game_tree(problem, ctx)
    if method == "gt-rollback":
        return rollback_game_tree(tree, ctx)
    return prune_game_tree(tree, ctx)
