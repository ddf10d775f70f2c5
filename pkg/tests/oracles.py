"""Independent reference computations used by the tests.

Nothing here goes through the library's trees, cost accounting or
information-set machinery: joints are plain CPT products over every full
assignment and strategies are enumerated as lookup tables from scratch.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def brute_joint(problem) -> dict[tuple[str, ...], float]:
    """Joint over the chance variables in declaration order."""
    names = list(problem.chance_variables)
    frames = [problem.variable(n).frame for n in names]
    out = {}
    for combo in itertools.product(*frames):
        a = dict(zip(names, combo))
        p = 1.0
        for n in names:
            cpt = problem.cpts[n]
            row = cpt.rows[tuple(a[q] for q in cpt.parents)]
            p *= row[problem.variable(n).frame.index(a[n])]
        out[combo] = p
    return out


def knowledge(problem) -> dict[str, list[str]]:
    """Cumulative information: own observations, earlier decisions and theirs."""
    known: list[str] = []
    out = {}
    for v in problem.variables:
        if v.kind.value != "decision":
            continue
        for o in problem.observations.get(v.name, ()):
            if o not in known:
                known.append(o)
        out[v.name] = [w.name for w in problem.variables if w.name in known]
        known.append(v.name)
    return out


def all_policies(problem):
    """Every pure policy as {(decision, known values): action}."""
    know = knowledge(problem)
    slots = []
    for d, info in know.items():
        for combo in itertools.product(*(problem.variable(v).frame for v in info)):
            slots.append((d, combo))
    choices = [problem.variable(d).frame for d, _ in slots]
    for pick in itertools.product(*choices):
        yield dict(zip(slots, pick))


def policy_value(problem, policy, joint=None) -> float:
    joint = joint if joint is not None else brute_joint(problem)
    know = knowledge(problem)
    names = list(problem.chance_variables)
    total = 0.0
    for combo, p in joint.items():
        a = dict(zip(names, combo))
        for d, info in know.items():
            a[d] = policy[(d, tuple(a[v] for v in info))]
        scope = problem.utility.scope
        total += p * problem.utility.entries[tuple(a[v] for v in scope)]
    return total


def policy_from_strategy(problem, strategy) -> dict:
    """Translate ``Strategy`` ids like ``T2[X1=x1,T1=t1]`` into a policy."""
    know = knowledge(problem)
    out = {}
    for sid, action in strategy.choices:
        d, rest = sid.split("[", 1)
        rest = rest.rstrip("]")
        vals = dict(item.split("=", 1) for item in rest.split(",")) if rest else {}
        out[(d, tuple(vals[v] for v in know[d]))] = action
    return out


def best_value(problem) -> float:
    joint = brute_joint(problem)
    return max(policy_value(problem, pol, joint) for pol in all_policies(problem))


# Medical diagnosis numbers worked by hand in exact arithmetic.
F = Fraction
MD_PD = F(1, 10)
MD_PP = {True: F(8, 10), False: F(15, 100)}
MD_PS = {True: F(7, 10), False: F(2, 10)}


def md_joint_exact() -> dict[tuple[bool, bool, bool], Fraction]:
    out = {}
    for d, p, s in itertools.product((True, False), repeat=3):
        pd = MD_PD if d else 1 - MD_PD
        pp = MD_PP[d] if p else 1 - MD_PP[d]
        ps = MD_PS[p] if s else 1 - MD_PS[p]
        out[(d, p, s)] = pd * pp * ps
    return out


def random_problems(count: int, seed: int = 2024, max_sets: int = 8):
    """``count`` small random problems (m <= 4, n <= 2), chain and DAG shaped.

    Observation patterns are drawn at random and redrawn until the number
    of information sets stays at most ``max_sets``, which keeps the
    brute-force policy enumeration cheap.
    """
    import numpy as np

    from decprune.bench import BenchConfig, generate_problem, information_set_count

    rng = np.random.default_rng(seed)
    out = []
    i = 0
    while len(out) < count:
        i += 1
        m = int(rng.integers(1, 5))
        n = int(rng.choice(3, p=(0.1, 0.45, 0.45)))
        observes = tuple(
            tuple(int(x) for x in np.flatnonzero(rng.random(m) < 0.4)) for _ in range(n)
        )
        structure = "dag" if rng.random() < 0.5 else "chain"
        cfg = BenchConfig(m=m, n=n, seed=seed, observes=observes, structure=structure)
        problem = generate_problem(cfg, trial=i)
        if information_set_count(problem) <= max_sets:
            out.append(problem)
    return out
