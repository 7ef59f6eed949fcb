"""Threshold-one contact processes on finite tori and trees.

A healthy site becomes infected at rate ``lam`` as soon as at least one
neighbour is infected, and heals at rate one.  The package simulates
this spin process together with its coupled companions (an integer
counting system, a drift-corrected real system, a dual set process and
an oriented branching process), computes the exact random-walk
quantities behind the high-dimension critical-rate bounds, and runs the
replica experiments that check every identity numerically.
"""
from . import clocks, engines, experiments, graphs, moments, processes, walk
from .clocks import ClockSchedule, build_schedule, merged_events
from .experiments import (
    bounds_report,
    branching_survival,
    critical_estimate,
    duality_check,
    lambda_scan,
    survival_probability,
)
from .graphs import FiniteGraph, LazyTree, build_torus, build_tree, parse_graph_spec
from .moments import build_h, build_q, expm_apply, integrate_second_moment, mean_xi_closed_form
from .walk import green_function, hitting_prob_e1, hitting_table, mc_return_oracle

__version__ = "0.1.0"

__all__ = [
    "clocks",
    "engines",
    "experiments",
    "graphs",
    "moments",
    "processes",
    "walk",
    "ClockSchedule",
    "build_schedule",
    "merged_events",
    "bounds_report",
    "branching_survival",
    "critical_estimate",
    "duality_check",
    "lambda_scan",
    "survival_probability",
    "FiniteGraph",
    "LazyTree",
    "build_torus",
    "build_tree",
    "parse_graph_spec",
    "build_h",
    "build_q",
    "expm_apply",
    "integrate_second_moment",
    "mean_xi_closed_form",
    "green_function",
    "hitting_prob_e1",
    "hitting_table",
    "mc_return_oracle",
    "__version__",
]
