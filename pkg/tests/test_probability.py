from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decprune import (
    CostContext,
    Cpt,
    ProblemError,
    Strategy,
    build_decision_tree,
    build_game_tree,
    build_scenario_tree,
    conditionals_from_joint,
    enumerate_strategies,
    joint_distribution,
    path_probabilities,
    strategy_expected_utility,
    strategy_indicator,
    validate_problem,
    weighted_utilities,
)
from decprune.bench import BenchConfig, generate_problem
from decprune.costcount import SOL
from decprune.model import NodeKind
from decprune.probability import JointTable, node_path_products
from oracles import brute_joint, md_joint_exact

TOL = 1e-9


def _assignment(tree, leaf):
    return {tree.nodes[n].variable: v for n, v in tree.path_to(leaf)}


def _md_key(values):
    d, p, s = values
    return (d == "d", p == "p", s == "s")


class TestJoint:
    def test_md_values_and_cost(self, md):
        ctx = CostContext()
        joint = joint_distribution(md, ctx)
        exact = md_joint_exact()
        for values, p in joint.entries:
            assert abs(p - float(exact[_md_key(values)])) <= TOL
        assert ctx.report().representation.mul == 12
        assert ctx.report().total == 12

    def test_single_variable_copies_prior(self):
        problem = generate_problem(BenchConfig(m=1, n=0))
        ctx = CostContext()
        joint = joint_distribution(problem, ctx)
        prior = problem.cpts["X1"].rows[()]
        assert [p for _, p in joint.entries] == list(prior)
        assert ctx.report().total == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_random_chain_matches_brute_force(self, seed):
        problem = generate_problem(BenchConfig(m=4, n=0, seed=seed))
        ctx = CostContext()
        joint = joint_distribution(problem, ctx)
        oracle = brute_joint(problem)
        assert len(joint) == 16
        for values, p in joint.entries:
            assert abs(p - oracle[values]) <= 1e-15
        assert ctx.report().total == 2 ** (4 + 1) - 4

    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(1, 5), seed=st.integers(0, 10_000), dag=st.booleans())
    def test_joint_is_a_distribution(self, m, seed, dag):
        cfg = BenchConfig(m=m, n=0, seed=seed, structure="dag" if dag else "chain")
        joint = joint_distribution(generate_problem(cfg), CostContext())
        probs = [p for _, p in joint.entries]
        assert min(probs) >= 0
        assert abs(sum(probs) - 1.0) <= TOL


class TestConditionals:
    def test_md_revision(self, md):
        ctx = CostContext()
        joint = joint_distribution(md, CostContext())
        frames = {v: md.frame(v) for v in "SPD"}
        s_cpt, p_cpt, d_cpt = conditionals_from_joint(joint, "SPD", frames, ctx)
        exact = md_joint_exact()
        pr_s = sum(v for (d, p, s), v in exact.items() if s)
        pr_sp = sum(v for (d, p, s), v in exact.items() if s and p)
        pr_spd = exact[(True, True, True)]
        assert abs(s_cpt.rows[()][0] - float(pr_s)) <= TOL
        assert abs(s_cpt.rows[()][0] - 0.3075) <= TOL
        assert abs(p_cpt.rows[("s",)][0] - float(pr_sp / pr_s)) <= TOL
        assert abs(d_cpt.rows[("s", "p")][0] - float(pr_spd / pr_sp)) <= TOL
        assert p_cpt.parents == ("S",) and d_cpt.parents == ("S", "P")
        rep = ctx.report().representation
        assert (rep.add, rep.div, rep.total) == (6, 12, 18)

    def test_causal_order_is_identity(self, md):
        joint = joint_distribution(md, CostContext())
        frames = {v: md.frame(v) for v in md.causal_order}
        for cpt in conditionals_from_joint(joint, md.causal_order, frames, CostContext()):
            original = md.cpts[cpt.child]
            for key, row in original.rows.items():
                full = dict(zip(original.parents, key))
                # revised cpts condition on every predecessor; the extra
                # ones must not matter
                for rkey, rrow in cpt.rows.items():
                    ctx = dict(zip(cpt.parents, rkey))
                    if all(ctx[k] == v for k, v in full.items()):
                        assert all(abs(a - b) <= TOL for a, b in zip(row, rrow))

    def test_independence_passes_through(self, md):
        joint = joint_distribution(md, CostContext())
        frames = {v: md.frame(v) for v in "SPD"}
        *_, d_cpt = conditionals_from_joint(joint, "SPD", frames, CostContext())
        for p in ("p", "~p"):
            assert abs(d_cpt.rows[("s", p)][0] - d_cpt.rows[("~s", p)][0]) <= TOL

    def test_zero_marginal(self, md):
        cpts = dict(md.cpts)
        cpts["S"] = Cpt("S", ("P",), {("p",): (0.0, 1.0), ("~p",): (0.0, 1.0)})
        problem = validate_problem(replace(md, cpts=cpts))
        joint = joint_distribution(problem, CostContext())
        frames = {v: md.frame(v) for v in "SPD"}
        with pytest.raises(ProblemError) as err:
            conditionals_from_joint(joint, "SPD", frames, CostContext())
        assert err.value.code == "E_ZERO_MARGINAL"

    def test_order_must_be_permutation(self, md):
        joint = joint_distribution(md, CostContext())
        with pytest.raises(ValueError):
            conditionals_from_joint(joint, "SP", {}, CostContext())


class TestPathProbabilities:
    def test_scenario_tree_top_path(self, md):
        tree = build_scenario_tree(md)
        pi = path_probabilities(tree, CostContext())
        top = tree.leaves()[0]
        assert _assignment(tree, top) == {"S": "s", "T": "t", "P": "p", "D": "d"}
        assert abs(pi[top] - 0.0560) <= TOL

    def test_game_tree_leaves_and_cost(self, md):
        tree = build_game_tree(md)
        ctx = CostContext()
        pi = path_probabilities(tree, ctx, SOL)
        exact = md_joint_exact()
        seen = {}
        for leaf, p in pi.items():
            a = _assignment(tree, leaf)
            key = _md_key((a["D"], a["P"], a["S"]))
            assert abs(p - float(exact[key])) <= TOL
            seen.setdefault(key, set()).add(a["T"])
        assert all(ts == {"t", "~t"} for ts in seen.values()) and len(seen) == 8
        assert ctx.report().solution.mul == 12

    def test_decision_only_path_is_one(self):
        problem = generate_problem(BenchConfig(m=1, n=1, observes=((),)))
        tree = build_game_tree(problem)
        assert tree.nodes[tree.root].kind is NodeKind.DECISION
        assert node_path_products(tree, [tree.root], CostContext()) == {tree.root: 1.0}

    def test_decision_tree_matches_joint(self, md):
        tree = build_decision_tree(md)
        pi = path_probabilities(tree, CostContext())
        exact = md_joint_exact()
        for leaf, p in pi.items():
            a = _assignment(tree, leaf)
            assert abs(p - float(exact[_md_key((a["D"], a["P"], a["S"]))])) <= TOL

    @pytest.mark.parametrize("builder", [build_decision_tree, build_scenario_tree, build_game_tree])
    def test_strategy_mass_is_one(self, md, builder):
        tree = builder(md)
        pi = path_probabilities(tree, CostContext())
        for y in enumerate_strategies(tree):
            mass = sum(pi[x] * strategy_indicator(y, x, tree) for x in tree.leaves())
            assert abs(mass - 1.0) <= TOL


class TestWeightedUtilities:
    def test_md_examples(self, md):
        tree = build_game_tree(md)
        ctx = CostContext()
        weighted = weighted_utilities(tree, ctx, path_probabilities(tree, ctx))
        assert ctx.report().solution.mul == 12 + 16
        by_path = {
            tuple(sorted(_assignment(weighted, x).items())): weighted.nodes[x].weighted_utility
            for x in weighted.leaves()
        }
        top = tuple(sorted({"D": "d", "P": "p", "S": "s", "T": "t"}.items()))
        bottom = tuple(sorted({"D": "~d", "P": "~p", "S": "~s", "T": "~t"}.items()))
        assert abs(by_path[top] - 0.560) <= TOL
        assert abs(by_path[bottom] - 6.120) <= TOL
        zero = tuple(sorted({"D": "d", "P": "p", "S": "s", "T": "~t"}.items()))
        assert by_path[zero] == 0.0

    def test_missing_probability(self, md):
        tree = build_game_tree(md)
        with pytest.raises(ProblemError) as err:
            weighted_utilities(tree, CostContext())
        assert err.value.code == "E_MISSING_PATH_PROBABILITY"


class TestStrategyExpectedUtility:
    @pytest.mark.parametrize(
        "choice, eu", [(("t", "~t"), 7.9880), (("t", "t"), 4.8300)]
    )
    def test_md(self, md, choice, eu):
        ctx = CostContext()
        joint = joint_distribution(md, CostContext())
        y = Strategy(tuple(zip(("T[S=s]", "T[S=~s]"), choice)))
        assert abs(strategy_expected_utility(y, joint, md, ctx) - eu) <= TOL
        assert ctx.report().solution.total == 8 + 7

    def test_constant_utility(self, md):
        util = replace(md.utility, entries={k: 3.25 for k in md.utility.entries})
        problem = replace(md, utility=util)
        joint = joint_distribution(problem, CostContext())
        for y in enumerate_strategies(build_game_tree(problem)):
            assert abs(strategy_expected_utility(y, joint, problem, CostContext()) - 3.25) <= TOL

    def test_joint_table_lookup(self):
        joint = JointTable(("A",), ((("a",), 0.25), (("b",), 0.75)))
        assert joint.probability({"A": "b"}) == 0.75
        assert joint.as_dict() == {("a",): 0.25, ("b",): 0.75}
