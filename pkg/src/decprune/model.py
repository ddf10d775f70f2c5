"""Domain types: problems, trees, information sets and strategies.

A :class:`Problem` is the single source every tree representation is built
from. Trees are immutable arenas of :class:`Node` objects addressed by
integer ids; the root is usually node ``0`` and nodes are numbered in
depth-first pre-order, so iterating ``tree.nodes`` visits them in the same
top-to-bottom order a drawing of the tree would show.

Decision nodes are grouped into :class:`InformationSet` blocks. In decision
and scenario trees every decision node is its own singleton set, which
gives :class:`Strategy` one uniform shape across all solvers.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from decprune.errors import ProblemError

PROB_TOL = 1e-9


class VarKind(str, enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    frame: tuple[str, ...]

    @property
    def is_chance(self) -> bool:
        return self.kind is VarKind.CHANCE


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table ``Pr(child | parents)``.

    ``rows`` maps a tuple of parent values (in ``parents`` order; the empty
    tuple for a root variable) to a distribution over the child's frame.
    """

    child: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[float, ...]]

    def row(self, assignment: Mapping[str, str]) -> tuple[float, ...]:
        return self.rows[tuple(assignment[p] for p in self.parents)]


@dataclass(frozen=True)
class UtilityTable:
    scope: tuple[str, ...]
    entries: Mapping[tuple[str, ...], float]

    def value(self, assignment: Mapping[str, str]) -> float:
        return self.entries[tuple(assignment[v] for v in self.scope)]


@dataclass(frozen=True)
class Problem:
    """A finite Bayesian decision problem.

    Attributes:
        name: Free-form problem name.
        variables: All variables in declaration order. The relative order
            of decision variables is the order in which decisions are made.
        cpts: One :class:`Cpt` per chance variable, keyed by child name.
        utility: The decision maker's utility function.
        observations: For each decision variable, the variables observed
            right before it is chosen (earlier decisions and whatever they
            observed are remembered automatically).
        causal_order: A topological order of the chance variables under
            CPT parenthood. Filled in by :func:`validate_problem` when empty.
    """

    name: str
    variables: tuple[Variable, ...]
    cpts: Mapping[str, Cpt]
    utility: UtilityTable
    observations: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    causal_order: tuple[str, ...] = ()

    @functools.cached_property
    def _by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ProblemError(
                "E_UNKNOWN_VARIABLE", f"unknown variable {name!r}"
            ) from None

    def frame(self, name: str) -> tuple[str, ...]:
        return self.variable(name).frame

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    @property
    def chance_variables(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.is_chance)

    @property
    def decision_variables(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.is_chance)

    def declaration_index(self, name: str) -> int:
        return self.variables.index(self.variable(name))

    @functools.cached_property
    def _information(self) -> dict[str, tuple[str, ...]]:
        known: set[str] = set()
        out: dict[str, tuple[str, ...]] = {}
        for d in self.decision_variables:
            known.update(self.observations.get(d, ()))
            out[d] = tuple(v.name for v in self.variables if v.name in known)
            known.add(d)
        return out

    def information_vars(self, decision: str) -> tuple[str, ...]:
        """Everything known when ``decision`` is chosen, in declaration order.

        Decisions remember their own earlier choices and everything observed
        before them, so the result is cumulative over the decision sequence.
        """
        try:
            return self._information[decision]
        except KeyError:
            raise ProblemError(
                "E_UNKNOWN_VARIABLE", f"{decision!r} is not a decision variable"
            ) from None


def information_set_id(
    problem: Problem, decision: str, assignment: Mapping[str, str]
) -> str:
    """Canonical id such as ``T[S=s]``, shared by every representation."""
    info = problem.information_vars(decision)
    return f"{decision}[{','.join(f'{v}={assignment[v]}' for v in info)}]"


def information_set_rank(
    problem: Problem, decision: str, assignment: Mapping[str, str]
) -> tuple[int, tuple[int, ...]]:
    info = problem.information_vars(decision)
    return (
        problem.declaration_index(decision),
        tuple(problem.frame(v).index(assignment[v]) for v in info),
    )


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def validate_problem(problem: Problem) -> Problem:
    """Check every structural invariant of ``problem``.

    Returns a copy whose ``observations`` has an entry for every decision
    and whose ``causal_order`` is filled in (topological sort of CPT
    parenthood, ties broken by declaration order) when it was empty.

    Raises:
        ProblemError: with codes ``E_CPT_ROW_SUM``, ``E_CYCLE``,
            ``E_MISSING_ROW``, ``E_UTILITY_INCOMPLETE``,
            ``E_UNKNOWN_VARIABLE`` and a few more specific ones.
    """
    names: set[str] = set()
    for var in problem.variables:
        if var.name in names:
            raise ProblemError(
                "E_DUPLICATE_VARIABLE",
                f"variable {var.name!r} declared twice",
                where=("variable", var.name),
            )
        names.add(var.name)
        if len(var.frame) < 2 or len(set(var.frame)) != len(var.frame):
            raise ProblemError(
                "E_FRAME",
                f"frame of {var.name!r} needs at least 2 distinct values",
                where=("variable", var.name),
            )

    for child in problem.cpts:
        if child not in names:
            raise ProblemError(
                "E_UNKNOWN_VARIABLE",
                f"cpt for undeclared variable {child!r}",
                where=("cpt", child),
            )
        if not problem.variable(child).is_chance:
            raise ProblemError(
                "E_DECISION_CPT",
                f"decision variable {child!r} cannot have a cpt",
                where=("cpt", child),
            )
    for name in problem.chance_variables:
        if name not in problem.cpts:
            raise ProblemError(
                "E_MISSING_CPT", f"chance variable {name!r} has no cpt"
            )
        _check_cpt(problem, problem.cpts[name])

    causal = _causal_order(problem)
    _check_utility(problem)
    observations = _check_observations(problem)

    return Problem(
        name=problem.name,
        variables=problem.variables,
        cpts=problem.cpts,
        utility=problem.utility,
        observations=observations,
        causal_order=causal,
    )


def _check_cpt(problem: Problem, cpt: Cpt) -> None:
    where = ("cpt", cpt.child)
    for parent in cpt.parents:
        if not problem.has_variable(parent):
            raise ProblemError(
                "E_UNKNOWN_VARIABLE",
                f"cpt {cpt.child!r}: unknown parent {parent!r}",
                where=where,
            )
        if not problem.variable(parent).is_chance:
            raise ProblemError(
                "E_DECISION_PARENT",
                f"cpt {cpt.child!r}: parent {parent!r} is a decision",
                where=where,
            )
    if len(set(cpt.parents)) != len(cpt.parents) or cpt.child in cpt.parents:
        raise ProblemError(
            "E_CYCLE", f"cpt {cpt.child!r} lists a parent twice or itself",
            where=where,
        )
    size = len(problem.frame(cpt.child))
    expected = set(itertools.product(*(problem.frame(p) for p in cpt.parents)))
    for key, row in cpt.rows.items():
        row_where = ("cpt", cpt.child, key)
        if key not in expected:
            raise ProblemError(
                "E_UNKNOWN_VALUE",
                f"cpt {cpt.child!r}: row {key} is not a parent assignment",
                where=row_where,
            )
        if len(row) != size:
            raise ProblemError(
                "E_ROW_ARITY",
                f"cpt {cpt.child!r}: row {key} has {len(row)} entries, "
                f"frame has {size}",
                where=row_where,
            )
        if any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in row):
            raise ProblemError(
                "E_PROBABILITY_RANGE",
                f"cpt {cpt.child!r}: row {key} has an entry outside [0, 1]",
                where=row_where,
            )
        if abs(math.fsum(row) - 1.0) > PROB_TOL:
            raise ProblemError(
                "E_CPT_ROW_SUM",
                f"cpt {cpt.child!r}: row {key} sums to {math.fsum(row)!r}",
                where=row_where,
            )
    missing = expected.difference(cpt.rows)
    if missing:
        first = min(missing, key=lambda k: _frame_rank(problem, cpt.parents, k))
        raise ProblemError(
            "E_MISSING_ROW",
            f"cpt {cpt.child!r}: no row for parent assignment {first}",
            where=where,
        )


def _frame_rank(problem: Problem, scope: Sequence[str], key: Sequence[str]):
    return tuple(problem.frame(v).index(x) for v, x in zip(scope, key))


def _causal_order(problem: Problem) -> tuple[str, ...]:
    chance = problem.chance_variables
    parents = {c: problem.cpts[c].parents for c in chance}
    placed: list[str] = []
    pending = list(chance)
    while pending:
        ready = next(
            (c for c in pending if all(p in placed for p in parents[c])), None
        )
        if ready is None:
            raise ProblemError(
                "E_CYCLE",
                "cpt parent graph is cyclic among " + ", ".join(pending),
            )
        placed.append(ready)
        pending.remove(ready)

    if not problem.causal_order:
        return tuple(placed)
    given = tuple(problem.causal_order)
    if sorted(given) != sorted(chance):
        raise ProblemError(
            "E_CAUSAL_ORDER",
            "order must list every chance variable exactly once",
            where=("order",),
        )
    for i, c in enumerate(given):
        late = [p for p in parents[c] if p not in given[:i]]
        if late:
            raise ProblemError(
                "E_CAUSAL_ORDER",
                f"order puts {c!r} before its parent {late[0]!r}",
                where=("order",),
            )
    return given


def _check_utility(problem: Problem) -> None:
    util = problem.utility
    for v in util.scope:
        if not problem.has_variable(v):
            raise ProblemError(
                "E_UNKNOWN_VARIABLE",
                f"utility scope names unknown variable {v!r}",
                where=("utility",),
            )
    if len(set(util.scope)) != len(util.scope):
        raise ProblemError(
            "E_UTILITY_SCOPE", "utility scope repeats a variable",
            where=("utility",),
        )
    expected = set(itertools.product(*(problem.frame(v) for v in util.scope)))
    for key, value in util.entries.items():
        if key not in expected:
            raise ProblemError(
                "E_UNKNOWN_VALUE",
                f"utility entry {key} is not an assignment of the scope",
                where=("utility", key),
            )
        if not math.isfinite(value):
            raise ProblemError(
                "E_UTILITY_VALUE", f"utility entry {key} is not finite",
                where=("utility", key),
            )
    missing = expected.difference(util.entries)
    if missing:
        first = min(missing, key=lambda k: _frame_rank(problem, util.scope, k))
        raise ProblemError(
            "E_UTILITY_INCOMPLETE",
            f"utility has no entry for {first}",
            where=("utility",),
        )


def _check_observations(problem: Problem) -> dict[str, tuple[str, ...]]:
    decisions = problem.decision_variables
    out: dict[str, tuple[str, ...]] = {}
    for d in problem.observations:
        if not problem.has_variable(d):
            raise ProblemError(
                "E_UNKNOWN_VARIABLE", f"observations for unknown {d!r}",
                where=("variable", d),
            )
        if d not in decisions:
            raise ProblemError(
                "E_OBSERVATION",
                f"{d!r} is a chance variable and observes nothing",
                where=("variable", d),
            )
    for i, d in enumerate(decisions):
        seen = tuple(problem.observations.get(d, ()))
        for o in seen:
            if not problem.has_variable(o):
                raise ProblemError(
                    "E_UNKNOWN_VARIABLE",
                    f"decision {d!r} observes unknown variable {o!r}",
                    where=("variable", d),
                )
            if o == d or (o in decisions and o not in decisions[:i]):
                raise ProblemError(
                    "E_OBSERVATION",
                    f"decision {d!r} cannot observe {o!r}, which is chosen "
                    "at the same time or later",
                    where=("variable", d),
                )
        out[d] = seen
    return out


# --------------------------------------------------------------------------
# trees
# --------------------------------------------------------------------------


class NodeKind(str, enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"
    LEAF = "leaf"


class TreeKind(str, enum.Enum):
    DECISION = "decision-tree"
    SCENARIO = "scenario-tree"
    GAME = "game-tree"


@dataclass(frozen=True, slots=True)
class Edge:
    value: str
    child: int
    probability: float | None = None


@dataclass(frozen=True, slots=True)
class Node:
    kind: NodeKind
    variable: str | None = None
    edges: tuple[Edge, ...] = ()
    utility: float | None = None
    path_probability: float | None = None
    weighted_utility: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind is NodeKind.LEAF


@dataclass(frozen=True)
class InformationSet:
    id: str
    variable: str
    values: tuple[str, ...]
    members: tuple[int, ...] = ()


@dataclass(frozen=True)
class Tree:
    """A rooted tree (or, after coalescence, a rooted DAG) of nodes.

    ``aliases`` maps information-set ids that were merged away by
    coalescence onto the id of the surviving set; ``set_ids`` is the full
    canonical list of ids a strategy for this tree must cover.
    """

    kind: TreeKind
    nodes: tuple[Node, ...]
    root: int
    information_sets: tuple[InformationSet, ...] = ()
    aliases: Mapping[str, str] = field(default_factory=dict)
    set_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.set_ids:
            ids = tuple(s.id for s in self.information_sets)
            object.__setattr__(self, "set_ids", ids)

    def __getitem__(self, node_id: int) -> Node:
        return self.nodes[node_id]

    @functools.cached_property
    def set_of(self) -> dict[int, InformationSet]:
        """Information set of every decision node."""
        return {m: s for s in self.information_sets for m in s.members}

    @functools.cached_property
    def parent_of(self) -> dict[int, tuple[int, str]]:
        """First (parent, edge value) pair for every non-root node."""
        out: dict[int, tuple[int, str]] = {}
        for nid in self.reachable():
            for e in self.nodes[nid].edges:
                out.setdefault(e.child, (nid, e.value))
        return out

    def reachable(self) -> list[int]:
        """Reachable node ids in depth-first pre-order, each listed once."""
        seen: set[int] = set()
        order: list[int] = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            order.append(nid)
            stack.extend(e.child for e in reversed(self.nodes[nid].edges))
        return order

    def leaves(self) -> list[int]:
        return [n for n in self.reachable() if self.nodes[n].is_leaf]

    def count(self, kind: NodeKind) -> int:
        return sum(1 for n in self.reachable() if self.nodes[n].kind is kind)

    def paths(self) -> Iterator[tuple[int, tuple[tuple[int, str], ...]]]:
        """Yield ``(leaf, path)`` for every root-to-leaf path (scenario).

        ``path`` lists ``(node, edge value)`` for each internal node passed.
        On a coalesced DAG a shared leaf is yielded once per path.
        """
        stack: list[tuple[int, tuple[tuple[int, str], ...]]] = [(self.root, ())]
        while stack:
            nid, path = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                yield nid, path
                continue
            for e in reversed(node.edges):
                stack.append((e.child, path + ((nid, e.value),)))

    def path_to(self, leaf: int) -> tuple[tuple[int, str], ...]:
        path: list[tuple[int, str]] = []
        nid = leaf
        while nid != self.root:
            try:
                parent, value = self.parent_of[nid]
            except KeyError:
                raise ProblemError(
                    "E_TREE", f"node {leaf} is not reachable from the root"
                ) from None
            path.append((parent, value))
            nid = parent
        return tuple(reversed(path))

    def replace_nodes(self, updates: Mapping[int, Node]) -> Tree:
        nodes = list(self.nodes)
        for nid, node in updates.items():
            nodes[nid] = node
        return Tree(
            kind=self.kind,
            nodes=tuple(nodes),
            root=self.root,
            information_sets=self.information_sets,
            aliases=self.aliases,
            set_ids=self.set_ids,
        )


def validate_tree(tree: Tree) -> None:
    """Check the structural invariants of a built tree.

    Raises:
        ProblemError: ``E_TREE`` describing the first violation found.
    """
    order = tree.reachable()
    _check_acyclic(tree)
    for nid in order:
        node = tree.nodes[nid]
        if node.is_leaf:
            if node.utility is None:
                raise ProblemError("E_TREE", f"leaf {nid} carries no utility")
            continue
        if not node.edges:
            raise ProblemError("E_TREE", f"internal node {nid} has no edges")
        if node.kind is NodeKind.CHANCE:
            probs = [e.probability for e in node.edges]
            if any(p is not None for p in probs):
                if any(p is None for p in probs):
                    raise ProblemError(
                        "E_TREE", f"chance node {nid} mixes missing probabilities"
                    )
                if abs(math.fsum(probs) - 1.0) > PROB_TOL:
                    raise ProblemError(
                        "E_TREE", f"edge probabilities at node {nid} do not sum to 1"
                    )

    for leaf, path in tree.paths():
        names = [tree.nodes[n].variable for n, _ in path]
        if len(names) != len(set(names)):
            raise ProblemError(
                "E_TREE", f"a path to leaf {leaf} repeats a variable"
            )

    decision_nodes = {
        n for n in order if tree.nodes[n].kind is NodeKind.DECISION
    }
    covered: list[int] = []
    for s in tree.information_sets:
        for m in s.members:
            node = tree.nodes[m]
            if node.kind is not NodeKind.DECISION or node.variable != s.variable:
                raise ProblemError(
                    "E_TREE", f"set {s.id}: node {m} is not a {s.variable} node"
                )
            if tuple(e.value for e in node.edges) != s.values:
                raise ProblemError(
                    "E_TREE", f"set {s.id}: node {m} has different edge values"
                )
        covered.extend(s.members)
    if len(covered) != len(set(covered)) or set(covered) != decision_nodes:
        raise ProblemError(
            "E_TREE", "information sets do not partition the decision nodes"
        )


def _check_acyclic(tree: Tree) -> None:
    state: dict[int, int] = {}
    stack: list[tuple[int, int]] = [(tree.root, 0)]
    while stack:
        nid, i = stack.pop()
        edges = tree.nodes[nid].edges
        if i == 0:
            state[nid] = 1
        if i < len(edges):
            stack.append((nid, i + 1))
            child = edges[i].child
            if state.get(child) == 1:
                raise ProblemError("E_TREE", f"cycle through node {child}")
            if child not in state:
                stack.append((child, 0))
        else:
            state[nid] = 2


# --------------------------------------------------------------------------
# strategies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    """One chosen decision value per information set, in canonical order."""

    choices: tuple[tuple[str, str], ...]

    def __getitem__(self, set_id: str) -> str:
        for key, value in self.choices:
            if key == set_id:
                return value
        raise KeyError(set_id)

    def __contains__(self, set_id: object) -> bool:
        return any(key == set_id for key, _ in self.choices)

    def as_dict(self) -> dict[str, str]:
        return dict(self.choices)

    @property
    def values(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.choices)

    def label(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.choices)

    def __str__(self) -> str:
        return "(" + ", ".join(self.values) + ")"


def enumerate_strategies(
    source: Tree | Sequence[InformationSet],
) -> list[Strategy]:
    """All pure strategies, lexicographic in (set order, frame order).

    For ``k`` binary information sets this returns ``2**k`` strategies.
    """
    sets = source.information_sets if isinstance(source, Tree) else source
    ids = [s.id for s in sets]
    return [
        Strategy(tuple(zip(ids, combo)))
        for combo in itertools.product(*(s.values for s in sets))
    ]


def strategy_indicator(strategy: Strategy, leaf: int, tree: Tree) -> int:
    """1 if ``strategy`` lets the scenario ending at ``leaf`` happen, else 0."""
    return _path_indicator(strategy, tree.path_to(leaf), tree)


def _path_indicator(
    strategy: Strategy, path: Sequence[tuple[int, str]], tree: Tree
) -> int:
    for nid, value in path:
        if tree.nodes[nid].kind is NodeKind.DECISION:
            if strategy[tree.set_of[nid].id] != value:
                return 0
    return 1


def problem_information_sets(problem: Problem) -> tuple[InformationSet, ...]:
    """Information sets of ``problem`` without building any tree.

    One set per decision variable and per assignment of everything known
    at decision time, in canonical order. ``members`` is left empty.
    """
    out: list[InformationSet] = []
    for d in problem.decision_variables:
        info = problem.information_vars(d)
        for combo in itertools.product(*(problem.frame(v) for v in info)):
            assignment = dict(zip(info, combo))
            out.append(
                InformationSet(
                    id=information_set_id(problem, d, assignment),
                    variable=d,
                    values=problem.frame(d),
                )
            )
    return tuple(out)
