"""LP relaxation of the min-rate program and threshold rounding back to a tree.

Dropping the integrality constraint leaves a linear program over the box with
one relevance row and one precedence row per parent/child candidate pair.  It
is solved with HiGHS dual simplex (an exact basis-seeking method, so the
returned point is a vertex and the objective is a true lower bound on the
integer optimum).  Thresholding a precedence-feasible fractional vector always
yields a valid tree because the threshold map is monotone; what it does not
guarantee is that the rounded tree still meets the relevance floor, which is
why relax_and_round reports a flag instead of failing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .increments import IncrementVectors, tree_information
from .quadtree import (
    TreeSelection,
    depth_from_candidate_count,
    depth_offset,
    num_candidates,
)
from .solver import TOL, SolveResult, _result_from_z, _MIN_RATE

__all__ = [
    "FractionalSelection",
    "solve_lp_relaxation",
    "round_selection",
    "relax_and_round",
]

_PRECEDENCE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class FractionalSelection:
    """Relaxed selection vector with entries in [0, 1] up to solver slack."""

    z: np.ndarray

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        depth_l = depth_from_candidate_count(z.size)
        if np.any(z < -_PRECEDENCE_SLACK) or np.any(z > 1.0 + _PRECEDENCE_SLACK):
            raise ValueError("fractional entries must lie in [0, 1] up to 1e-9")
        for d in range(1, depth_l):
            parents = z[depth_offset(d - 1):depth_offset(d)]
            children = z[depth_offset(d):depth_offset(d + 1)]
            if np.any(children > np.repeat(parents, 4) + _PRECEDENCE_SLACK):
                raise ValueError("fractional selection violates precedence beyond 1e-9")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def depth_l(self) -> int:
        return depth_from_candidate_count(self.z.size)

    @property
    def values(self) -> np.ndarray:
        """Entries clamped to [0, 1]."""
        return np.clip(self.z, 0.0, 1.0)


@lru_cache(maxsize=8)
def _precedence_matrix(depth_l: int):
    """Sparse rows z_child - z_parent <= 0 for every parent/child candidate pair."""
    n = num_candidates(depth_l)
    parents = np.arange(num_candidates(depth_l - 1)) if depth_l >= 2 else np.arange(0)
    rows = []
    cols = []
    data = []
    for k in range(4):
        children = 4 * parents + 1 + k
        base = 4 * parents + k
        rows.extend([base, base])
        cols.extend([children, parents])
        data.extend([np.ones(parents.size), -np.ones(parents.size)])
    if parents.size:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.concatenate(data)
        return sp.csr_matrix((data, (rows, cols)), shape=(4 * parents.size, n))
    return sp.csr_matrix((0, n))


def solve_lp_relaxation(inc: IncrementVectors, d_hat: float) -> tuple[FractionalSelection, float]:
    """Optimal vertex of the relaxed min-rate program and its objective value."""
    if d_hat < 0:
        raise ValueError(f"negative d_hat: {d_hat}")
    total = float(inc.delta_y.sum())
    if d_hat > total + TOL:
        raise ValueError(
            f"infeasible d_hat: {d_hat!r} exceeds total relevance {total!r}"
        )
    n = inc.num_candidates
    if n == 0:
        return FractionalSelection(np.zeros(0)), 0.0
    depth_l = depth_from_candidate_count(n)
    prec = _precedence_matrix(depth_l)
    a_ub = sp.vstack([sp.csr_matrix(-inc.delta_y[None, :]), prec], format="csr")
    b_ub = np.zeros(a_ub.shape[0])
    b_ub[0] = -d_hat
    res = linprog(
        inc.delta_x, A_ub=a_ub, b_ub=b_ub, bounds=(0.0, 1.0), method="highs-ds",
    )
    if res.status != 0:
        raise RuntimeError(f"LP solve failed with status {res.status}: {res.message}")
    x = np.asarray(res.x, dtype=np.float64)
    # the simplex basis solution can stray from the box and the precedence
    # rows by its own feasibility tolerance; snap it back onto the vertex
    if np.any(x < -1e-6) or np.any(x > 1.0 + 1e-6):
        raise RuntimeError("LP solution violates box bounds beyond solver tolerance")
    x = np.clip(x, 0.0, 1.0)
    for d in range(1, depth_l):
        parents = x[depth_offset(d - 1):depth_offset(d)]
        lo, hi = depth_offset(d), depth_offset(d + 1)
        if np.any(x[lo:hi] > np.repeat(parents, 4) + 1e-6):
            raise RuntimeError(
                "LP solution violates precedence beyond solver tolerance"
            )
        x[lo:hi] = np.minimum(x[lo:hi], np.repeat(parents, 4))
    return FractionalSelection(x), float(res.fun)


def round_selection(zfrac: FractionalSelection, delta: float) -> TreeSelection:
    """Threshold at delta: z >= delta selects the node; always yields a valid tree.

    Monotonicity of the threshold preserves exact precedence; entries that sit
    within solver slack of their parent are forced back under it so validity
    holds unconditionally.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    values = zfrac.values
    z = (values >= delta).astype(np.uint8)
    depth_l = zfrac.depth_l
    for d in range(1, depth_l):
        parents = z[depth_offset(d - 1):depth_offset(d)]
        lo, hi = depth_offset(d), depth_offset(d + 1)
        z[lo:hi] &= np.repeat(parents, 4)
    return TreeSelection(z)


def relax_and_round(inc: IncrementVectors, d_hat: float,
                    delta: float = 0.5) -> tuple[SolveResult, bool]:
    """Relax, threshold at delta, and report whether the relevance floor survived.

    The returned result carries the rounded tree's exact information pair; the
    flag (not an exception) states whether i_y >= d_hat - 1e-9 still holds.
    """
    t0 = time.perf_counter()
    zfrac, _ = solve_lp_relaxation(inc, d_hat)
    selection = round_selection(zfrac, delta)
    result = _result_from_z(selection.z, inc, _MIN_RATE, 0, t0)
    _, i_y = tree_information(selection, inc)
    return result, bool(i_y >= d_hat - TOL)
