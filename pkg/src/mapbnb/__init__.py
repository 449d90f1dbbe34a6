"""Exact MAP inference and 0-1 integer programming toolkit.

Solves binary pairwise models (and general 0-1 programs over box-bounded
LPs) exactly by best-first branch and bound, with supporting machinery for
the fractional vertices of the pairwise-consistency polytope: rounding,
frustrated-cycle vertex tests, cycle-inequality separation, ranked
enumeration of integral solutions, and an estimator for the number of
fractional optima that beat the best integral one.
"""

from mapbnb.lp import (
    EQ,
    LE,
    BasisSnapshot,
    KERNEL_NAME,
    LinearProgram,
    LpInputError,
    LpResult,
    LpStatus,
    SimplexSolver,
    add_row,
    dual_objective,
    solve,
    solve_fixed,
    warm_solve,
)
from mapbnb.model import (
    PairwiseModel,
    brute_force_map,
    build_local_lp,
    config_objective,
    extend_to_point,
    load_model,
    make_model,
    objective_value,
    parse_model,
    format_model,
    random_instance,
    reparametrize_agreement,
    save_model,
)
from mapbnb.vertices import (
    CycleCut,
    best_vertex_completion_value,
    eval_cycle_inequality,
    find_frustrated_cycle,
    fractional_components,
    is_vertex,
    make_cycle_cut,
    parity_rank,
    round_half,
    separate_cycle,
    snap_half_integral,
)
from mapbnb.bnb import BranchNode, SolveStats, solve_ilp, solve_map
from mapbnb.mbest import MBestResult, m_best_integral
from mapbnb.svf import ConfoundingReport, estimate_svc
from mapbnb.cuts import CutOutcome, CuttingPlaneResult, count_cut_induced, cutting_plane_solve

__version__ = "0.1.0"
