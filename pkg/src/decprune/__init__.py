"""Decision trees, scenario trees and game trees with operation counting."""

from decprune.builders import (
    build_decision_tree,
    build_game_tree,
    build_scenario_tree,
    coalesce,
    default_decision_order,
    game_tree_order,
)
from decprune.costcount import CostContext, CostReport, Op, Phase
from decprune.errors import ProblemError
from decprune.model import (
    Cpt,
    InformationSet,
    Problem,
    Strategy,
    Tree,
    UtilityTable,
    Variable,
    VarKind,
    enumerate_strategies,
    strategy_indicator,
    validate_problem,
)
from decprune.probability import (
    conditionals_from_joint,
    joint_distribution,
    path_probabilities,
    strategy_expected_utility,
    weighted_utilities,
)
from decprune.solvers import (
    METHODS,
    Solution,
    prune_game_tree,
    prune_scenario_tree,
    rollback_decision_tree,
    rollback_game_tree,
    solve,
    solve_strategy_matrix,
)
from decprune.textio import medical_diagnosis, parse_problem, render_problem

__all__ = [
    "METHODS",
    "CostContext",
    "CostReport",
    "Cpt",
    "InformationSet",
    "Op",
    "Phase",
    "Problem",
    "ProblemError",
    "Solution",
    "Strategy",
    "Tree",
    "UtilityTable",
    "VarKind",
    "Variable",
    "build_decision_tree",
    "build_game_tree",
    "build_scenario_tree",
    "coalesce",
    "conditionals_from_joint",
    "default_decision_order",
    "enumerate_strategies",
    "game_tree_order",
    "joint_distribution",
    "medical_diagnosis",
    "parse_problem",
    "path_probabilities",
    "prune_game_tree",
    "prune_scenario_tree",
    "render_problem",
    "rollback_decision_tree",
    "rollback_game_tree",
    "solve",
    "solve_strategy_matrix",
    "strategy_expected_utility",
    "strategy_indicator",
    "validate_problem",
    "weighted_utilities",
]
