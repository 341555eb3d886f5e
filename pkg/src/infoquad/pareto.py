"""Tracing the Pareto-optimal compression/relevance pairs of a world.

A min-rate solve alone need not be Pareto efficient: several trees can share
the optimal rate while retaining different amounts of relevant information.
Each traced point therefore runs two stages: minimize the rate under the
relevance floor, then maximize relevance among trees pinned to that optimal
rate.  Sweeping the floor adaptively (next query = last achieved relevance
plus a small step) visits every achievable relevance level without a grid.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

from .increments import IncrementVectors
from .quadtree import TreeSelection
from .solver import (
    DEFAULT_NODE_LIMIT,
    TOL,
    solve_equality_max_relevance,
    solve_min_rate,
)

__all__ = [
    "ParetoPoint",
    "is_dominated",
    "pareto_point",
    "trace_pareto",
    "write_pareto_csv",
    "DEFAULT_EPS_STEP",
]

# Smallest step that still rules the previous point infeasible (the relevance
# floor is enforced within TOL).  Any two value pairs distinct beyond TOL are
# then both visited; pass a larger step to trade completeness for speed.
DEFAULT_EPS_STEP = 2 * TOL


@dataclass(frozen=True)
class ParetoPoint:
    """A (rate, relevance) pair on the frontier with a witnessing tree."""

    d_star: float
    d_hat_star: float
    selection: TreeSelection
    d_hat_query: float = 0.0
    stage1_ms: float = 0.0
    stage2_ms: float = 0.0


def is_dominated(a, b, tol: float = TOL) -> bool:
    """True iff b is at least as good as a in both coordinates and better in one."""
    a_ix, a_iy = a
    b_ix, b_iy = b
    return (
        b_ix <= a_ix + tol
        and b_iy >= a_iy - tol
        and (b_ix < a_ix - tol or b_iy > a_iy + tol)
    )


def pareto_point(inc: IncrementVectors, d_hat: float,
                 node_limit: int = DEFAULT_NODE_LIMIT) -> ParetoPoint:
    """Pareto-optimal value pair for one relevance floor.

    Stage one finds the minimal rate D* meeting the floor; stage two maximizes
    relevance among trees whose rate equals D*.  The result dominates the
    floor: d_hat_star >= d_hat - 1e-9.
    """
    total = float(inc.delta_y.sum())
    if d_hat < 0:
        raise ValueError(f"negative d_hat: {d_hat}")
    if d_hat > total + TOL:
        raise ValueError(
            f"d_hat {d_hat!r} exceeds the total relevance I(X;Y) = {total!r}"
        )
    t0 = time.perf_counter()
    stage1 = solve_min_rate(inc, d_hat, node_limit=node_limit)
    t1 = time.perf_counter()
    stage2 = solve_equality_max_relevance(
        inc, stage1.i_x, node_limit=node_limit, seed_selection=stage1.selection,
    )
    t2 = time.perf_counter()
    return ParetoPoint(
        d_star=stage2.i_x,
        d_hat_star=stage2.i_y,
        selection=stage2.selection,
        d_hat_query=d_hat,
        stage1_ms=(t1 - t0) * 1e3,
        stage2_ms=(t2 - t1) * 1e3,
    )


def trace_pareto(inc: IncrementVectors, eps_step: float = DEFAULT_EPS_STEP,
                 node_limit: int = DEFAULT_NODE_LIMIT) -> list[ParetoPoint]:
    """All Pareto-optimal value pairs, ascending, from (0, 0) up to full relevance.

    After a point achieving relevance v the next floor queried is v + eps_step,
    so every level distinguishable at eps_step resolution is visited; the value
    set is finite and the loop provably terminates.
    """
    if eps_step <= TOL:
        raise ValueError(
            f"eps_step must exceed the feasibility tolerance {TOL}, got {eps_step}"
        )
    total = float(inc.delta_y.sum())
    points = [pareto_point(inc, 0.0, node_limit=node_limit)]
    while points[-1].d_hat_star < total - TOL:
        query = min(points[-1].d_hat_star + eps_step, total)
        point = pareto_point(inc, query, node_limit=node_limit)
        if point.d_hat_star <= points[-1].d_hat_star + 1e-15:
            break  # floating-point guard; cannot happen for eps_step > tol
        points.append(point)
    return points


def write_pareto_csv(path, points, include_timings: bool = False, float_fmt: str = ".12g"):
    """One row per traced point; timing columns are zeroed unless requested.

    Timings vary run to run, so deterministic output (the default) writes 0.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["d_hat_query", "i_x_nats", "i_y_nats", "leaf_count", "stage1_ms", "stage2_ms"]
        )
        for p in points:
            writer.writerow([
                format(p.d_hat_query, float_fmt),
                format(p.d_star, float_fmt),
                format(p.d_hat_star, float_fmt),
                p.selection.leaf_count,
                format(p.stage1_ms if include_timings else 0.0, float_fmt),
                format(p.stage2_ms if include_timings else 0.0, float_fmt),
            ])
