"""Build decision, scenario and game trees from a :class:`Problem`.

All three builders lay out a symmetric tree over a variable sequence and
number nodes in depth-first pre-order. They differ in what the chance edges
and leaves carry:

* decision trees: edge conditionals ``Pr(V | everything before V)``, which
  need Bayesian revision whenever the sequence is not causal;
* scenario trees: no edge probabilities, one joint probability per leaf;
* game trees: the CPT probabilities verbatim, with decision nodes grouped
  into information sets.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence

from decprune.costcount import REP, CostContext
from decprune.errors import ProblemError
from decprune.model import (
    Edge,
    InformationSet,
    Node,
    NodeKind,
    Problem,
    Tree,
    TreeKind,
    information_set_id,
    information_set_rank,
)
from decprune.probability import conditionals_from_joint, joint_distribution


def default_decision_order(problem: Problem) -> tuple[str, ...]:
    """Default decision-tree sequence.

    Each decision comes right after the chance variables it newly observes
    (those in causal order); the unobserved chance variables follow all
    decisions in reverse causal order, so revision runs from the evidence
    back towards the root causes (``S T P D`` for medical diagnosis).
    """
    seq: list[str] = []
    causal = problem.causal_order
    for d in problem.decision_variables:
        known = set(problem.information_vars(d))
        seq.extend(c for c in causal if c in known and c not in seq)
        seq.append(d)
    seq.extend(c for c in reversed(causal) if c not in seq)
    return tuple(seq)


def game_tree_order(problem: Problem) -> tuple[str, ...]:
    """Causal order, each decision inserted right after the last thing it knows."""
    seq = list(problem.causal_order)
    for d in problem.decision_variables:
        known = problem.information_vars(d)
        pos = max((seq.index(v) for v in known), default=-1)
        seq.insert(pos + 1, d)
    return tuple(seq)


def check_decision_order(problem: Problem, order: Sequence[str]) -> tuple[str, ...]:
    """Validate a decision-tree variable sequence.

    Raises:
        ProblemError: ``E_BAD_ORDER`` when ``order`` is not a permutation of
            the variables, ``E_ORDER_VIOLATES_INFORMATION`` when what
            precedes a decision differs from what that decision knows.
    """
    order = tuple(order)
    names = [v.name for v in problem.variables]
    unknown = [v for v in order if v not in names]
    if unknown:
        raise ProblemError(
            "E_UNKNOWN_VARIABLE", f"order names unknown variable {unknown[0]!r}"
        )
    if sorted(order) != sorted(names):
        raise ProblemError(
            "E_BAD_ORDER", "order must list every variable exactly once"
        )
    for i, var in enumerate(order):
        if problem.variable(var).is_chance:
            continue
        before = set(order[:i])
        known = set(problem.information_vars(var))
        if before != known:
            late = sorted(known - before)
            extra = sorted(before - known)
            why = (
                f"{var} observes {late[0]} but precedes it"
                if late
                else f"{extra[0]} precedes {var} but is not observed by it"
            )
            raise ProblemError("E_ORDER_VIOLATES_INFORMATION", why)
    return order


def requires_bayesian_revision(problem: Problem, order: Sequence[str]) -> bool:
    """True when some chance variable comes before one of its CPT parents."""
    chance = [v for v in order if problem.variable(v).is_chance]
    for i, var in enumerate(chance):
        if any(p not in chance[:i] for p in problem.cpts[var].parents):
            return True
    return False


def build_decision_tree(
    problem: Problem,
    order: Sequence[str] | None = None,
    ctx: CostContext | None = None,
) -> Tree:
    """Decision tree over ``order`` (default :func:`default_decision_order`).

    When the chance variables appear out of causal order, the edge
    conditionals are derived from the joint distribution, and that
    preprocessing is charged to the representation phase.
    """
    ctx = ctx or CostContext()
    order = check_decision_order(
        problem, default_decision_order(problem) if order is None else order
    )
    chance_seq = [v for v in order if problem.variable(v).is_chance]
    cpts = problem.cpts
    if requires_bayesian_revision(problem, order):
        joint = joint_distribution(problem, ctx, REP)
        frames = {v: problem.frame(v) for v in chance_seq}
        revised = conditionals_from_joint(joint, chance_seq, frames, ctx, REP)
        cpts = {c.child: c for c in revised}

    def edge_probs(var: str, assignment: Mapping[str, str]):
        return cpts[var].row(assignment)

    return _build(problem, order, TreeKind.DECISION, edge_probs, None)


def build_scenario_tree(
    problem: Problem,
    order: Sequence[str] | None = None,
    ctx: CostContext | None = None,
) -> Tree:
    """Scenario tree: decision-tree shape, path probabilities on the leaves.

    The leaves get joint probabilities from the causal-order joint, so no
    conditionals are ever needed.
    """
    ctx = ctx or CostContext()
    order = check_decision_order(
        problem, default_decision_order(problem) if order is None else order
    )
    joint = joint_distribution(problem, ctx, REP)
    return _build(problem, order, TreeKind.SCENARIO, None, joint.probability)


def build_game_tree(problem: Problem, ctx: CostContext | None = None) -> Tree:
    """Game tree in causal order with information sets; costs nothing."""

    def edge_probs(var: str, assignment: Mapping[str, str]):
        return problem.cpts[var].row(assignment)

    return _build(problem, game_tree_order(problem), TreeKind.GAME, edge_probs, None)


def _build(
    problem: Problem,
    order: Sequence[str],
    kind: TreeKind,
    edge_probs: Callable[[str, Mapping[str, str]], Sequence[float]] | None,
    leaf_pi: Callable[[Mapping[str, str]], float] | None,
) -> Tree:
    nodes: list[Node | None] = []
    groups: dict[str, tuple[tuple, str, list[int]]] = {}

    def grow(depth: int, assignment: dict[str, str]) -> int:
        nid = len(nodes)
        nodes.append(None)
        if depth == len(order):
            nodes[nid] = Node(
                kind=NodeKind.LEAF,
                utility=problem.utility.value(assignment),
                path_probability=None if leaf_pi is None else leaf_pi(assignment),
            )
            return nid
        var = order[depth]
        frame = problem.frame(var)
        chance = problem.variable(var).is_chance
        probs = edge_probs(var, assignment) if chance and edge_probs else None
        edges = []
        for i, value in enumerate(frame):
            assignment[var] = value
            child = grow(depth + 1, assignment)
            edges.append(Edge(value, child, None if probs is None else probs[i]))
        del assignment[var]
        if chance:
            nodes[nid] = Node(NodeKind.CHANCE, var, tuple(edges))
        else:
            nodes[nid] = Node(NodeKind.DECISION, var, tuple(edges))
            set_id = information_set_id(problem, var, assignment)
            if set_id not in groups:
                rank = information_set_rank(problem, var, assignment)
                groups[set_id] = (rank, var, [])
            groups[set_id][2].append(nid)
        return nid

    root = grow(0, {})
    sets = sorted(groups.items(), key=lambda item: item[1][0])
    info = tuple(
        InformationSet(
            id=set_id,
            variable=var,
            values=problem.frame(var),
            members=tuple(members),
        )
        for set_id, (_, var, members) in sets
    )
    return Tree(kind=kind, nodes=tuple(nodes), root=root, information_sets=info)


def coalesce(
    tree: Tree, tolerance: float = 1e-12, ctx: CostContext | None = None
) -> Tree:
    """Merge structurally identical subtrees of a decision tree.

    Subtrees hash equal when kind, variable, edge values, edge probabilities
    and leaf utilities coincide after snapping reals to a ``tolerance``
    grid. The result is a rooted DAG; decision nodes that merge keep the
    first information-set id and record the others as aliases. The number
    of nodes removed is noted on ``ctx`` as ``coalesced_nodes`` and is not
    part of any operation total.
    """
    if tree.kind is not TreeKind.DECISION:
        raise ProblemError("E_COALESCE", "coalescence applies to decision trees")

    def snap(x: float | None):
        return None if x is None else round(x / tolerance)

    canon: dict[tuple, int] = {}
    canon_nodes: list[Node] = []
    rep_of: dict[int, int] = {}

    for nid in reversed(tree.reachable()):
        node = tree.nodes[nid]
        if node.is_leaf:
            key = ("leaf", snap(node.utility), snap(node.path_probability))
            edges: tuple[Edge, ...] = ()
        else:
            edges = tuple(
                Edge(e.value, rep_of[e.child], e.probability) for e in node.edges
            )
            key = (
                node.kind,
                node.variable,
                tuple((e.value, snap(e.probability), e.child) for e in edges),
            )
        if key not in canon:
            canon[key] = len(canon_nodes)
            canon_nodes.append(
                Node(
                    node.kind,
                    node.variable,
                    edges,
                    node.utility,
                    node.path_probability,
                    node.weighted_utility,
                )
            )
        rep_of[nid] = canon[key]

    # renumber in depth-first pre-order from the root
    new_id: dict[int, int] = {}
    order: list[int] = []
    stack = [rep_of[tree.root]]
    while stack:
        cid = stack.pop()
        if cid in new_id:
            continue
        new_id[cid] = len(order)
        order.append(cid)
        stack.extend(e.child for e in reversed(canon_nodes[cid].edges))
    nodes = tuple(
        Node(
            n.kind,
            n.variable,
            tuple(Edge(e.value, new_id[e.child], e.probability) for e in n.edges),
            n.utility,
            n.path_probability,
            n.weighted_utility,
        )
        for n in (canon_nodes[c] for c in order)
    )

    sets: list[InformationSet] = []
    aliases: dict[str, str] = {}
    owner: dict[int, str] = {}
    for s in tree.information_sets:
        members = []
        for m in s.members:
            target = new_id[rep_of[m]]
            if target in owner:
                aliases[s.id] = owner[target]
            else:
                owner[target] = s.id
                members.append(target)
        if members:
            sets.append(InformationSet(s.id, s.variable, s.values, tuple(members)))

    removed = len(tree.reachable()) - len(nodes)
    if ctx is not None:
        ctx.note("coalesced_nodes", removed)
    return Tree(
        kind=TreeKind.DECISION,
        nodes=nodes,
        root=0,
        information_sets=tuple(sets),
        aliases=aliases,
        set_ids=tree.set_ids,
    )
