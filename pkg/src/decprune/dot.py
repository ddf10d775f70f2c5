"""Graphviz DOT rendering of trees and solutions."""

from __future__ import annotations

from decprune.model import NodeKind, Tree
from decprune.solvers import Solution

_SHAPES = {
    NodeKind.DECISION: "box",
    NodeKind.CHANCE: "circle",
    NodeKind.LEAF: "diamond",
}


def _q(text: str) -> str:
    # labels may contain the DOT line-break escape \n, so only quotes are escaped
    return '"' + text.replace('"', '\\"') + '"'


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".") if x != int(x) else str(int(x))


def export_dot(tree: Tree, solution: Solution | None = None) -> str:
    """Render ``tree`` as a DOT digraph.

    Decision nodes are boxes, chance nodes circles and leaves diamonds.
    Edges are labelled ``value`` or ``value:probability``. Members of a
    non-singleton information set share a dashed cluster. With a
    ``solution``, chosen decision edges are bold and every node is
    annotated with the value it was pruned to.
    """
    trace = solution.trace if solution is not None else None
    values = trace.node_values if trace else {}
    chosen = trace.chosen_edges if trace else {}

    lines = [f"digraph {_q(tree.kind.value)} {{", "  rankdir=LR;",
             '  node [fontname="Helvetica"];', '  edge [fontname="Helvetica"];']
    order = tree.reachable()
    for nid in order:
        node = tree.nodes[nid]
        if node.is_leaf:
            label = _fmt(node.utility)
            if node.path_probability is not None:
                label += f"\\npi={_fmt(node.path_probability)}"
        else:
            label = node.variable
        if nid in values:
            label += f"\\n[{_fmt(values[nid])}]"
        lines.append(
            f"  n{nid} [shape={_SHAPES[node.kind]}, label={_q(label)}];"
        )

    for i, s in enumerate(tree.information_sets):
        if len(s.members) < 2:
            continue
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append("    style=dashed;")
        lines.append(f"    label={_q(s.id)};")
        lines.append("    " + " ".join(f"n{m};" for m in s.members))
        lines.append("  }")

    for nid in order:
        node = tree.nodes[nid]
        for e in node.edges:
            label = e.value if e.probability is None else f"{e.value}:{_fmt(e.probability)}"
            attrs = [f"label={_q(label)}"]
            if chosen.get(nid) == e.value:
                attrs.append("style=bold")
            lines.append(f"  n{nid} -> n{e.child} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
