"""Shared world builders and random generators for the test suite."""

import numpy as np

import infoquad as iq


def quadrant_world():
    """4x4 world, uniform prior, relevance 1 on Morton cells 0 and 2 only.

    Frozen facts: I(X;Y) = 0.37677016125643675, the cheapest tree retaining
    all of it is [1,1,0,0,0] with rate 1.7328679513998633.
    """
    p1 = np.zeros(16)
    p1[[0, 2]] = 1.0
    return iq.world_from_cells(2, np.column_stack([1.0 - p1, p1]))


def random_world(rng, depth_l, binary=False, uniform_prior=True, zero_prior=False,
                 y_size=2):
    cells = 4 ** depth_l
    if y_size == 2:
        p1 = rng.integers(0, 2, cells).astype(float) if binary else rng.random(cells)
        relevance = np.column_stack([1.0 - p1, p1])
    else:
        raw = rng.random((cells, y_size))
        relevance = raw / raw.sum(axis=1, keepdims=True)
    prior = None
    if not uniform_prior:
        weights = rng.random(cells)
        if zero_prior:
            weights[rng.random(cells) < 0.25] = 0.0
        if weights.sum() == 0:
            weights[0] = 1.0
        prior = weights / weights.sum()
    return iq.world_from_cells(depth_l, relevance, prior)


def random_valid_selection(rng, depth_l, p_expand=0.6):
    """Top-down random tree: each available candidate selected with p_expand."""
    n = (4 ** depth_l - 1) // 3
    z = np.zeros(n, dtype=np.uint8)
    stack = [0] if n else []
    while stack:
        i = stack.pop()
        if rng.random() < p_expand:
            z[i] = 1
            child = 4 * i + 1
            if child + 3 < n:
                stack.extend((child, child + 1, child + 2, child + 3))
    return iq.TreeSelection(z)


def random_monotone_fractional(rng, depth_l):
    """Random vector satisfying the exact parent>=child precedence invariant."""
    from infoquad.quadtree import depth_offset

    n = (4 ** depth_l - 1) // 3
    z = np.zeros(n)
    if n:
        z[0] = rng.random()
    for d in range(1, depth_l):
        parents = z[depth_offset(d - 1):depth_offset(d)]
        scale = rng.random(4 ** d)
        z[depth_offset(d):depth_offset(d + 1)] = np.repeat(parents, 4) * scale
    return z


def write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)
