"""Shared fixtures: hand-built sparse instances, seeded random instances,
and discovery of the public benchmark files (optional, large tests skip
without them)."""

import os
import random

import numpy as np
import pytest

from orienteer.instance import StopInstance

# vertex ids of the 6-vertex sparse example used throughout
S, I, L, K, J, T = 0, 1, 2, 3, 4, 5

FIGURE_ARCS = {
    (S, I): 1.0,
    (S, L): 1.0,
    (I, K): 1.0,
    (L, J): 1.0,
    (L, T): 1.0,
    (K, J): 2.0,
    (J, T): 1.0,
}


def make_figure_instance(time_limit=4.0, fleet=1, mandatory=(), rewards=None):
    """Sparse 6-vertex digraph where the only route through both vertex 1 and
    vertex 4 lasts 5 time units; the default limit 4 makes them conflict."""
    n = 6
    d = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for (a, b), w in FIGURE_ARCS.items():
        d[a, b] = w
        mask[a, b] = True
    mand = frozenset(mandatory)
    prof = frozenset({I, L, K, J}) - mand
    rew = {i: (rewards or {}).get(i, 1) for i in sorted(prof)}
    return StopInstance(
        vertex_count=n,
        origin=S,
        destination=T,
        mandatory=mand,
        profitable=prof,
        rewards=rew,
        travel_time=d,
        arc_mask=mask,
        fleet_size=fleet,
        time_limit=time_limit,
    )


def make_random_instance(rng, n_max=9, m_max=3, tightness=(1.0, 2.2), mandatory_share=0.5):
    """Complete Euclidean instance with integer rewards; sometimes a slice of
    the inner vertices is mandatory (instances may then be infeasible)."""
    n = rng.randint(5, n_max)
    coords = np.array([[rng.uniform(0, 10), rng.uniform(0, 10)] for _ in range(n)])
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    mask = ~np.eye(n, dtype=bool)
    inner = list(range(1, n - 1))
    if rng.random() < mandatory_share:
        mand = frozenset(rng.sample(inner, rng.randint(0, max(0, len(inner) // 2))))
    else:
        mand = frozenset()
    prof = frozenset(inner) - mand
    rewards = {i: rng.randint(0, 10) for i in sorted(prof)}
    return StopInstance(
        vertex_count=n,
        origin=0,
        destination=n - 1,
        mandatory=mand,
        profitable=prof,
        rewards=rewards,
        travel_time=d,
        arc_mask=mask,
        fleet_size=rng.randint(1, m_max),
        time_limit=float(d[0, n - 1] * rng.uniform(*tightness)),
        coordinates=coords,
    )


def make_reward_universe(n_items, rewards, fleet=2, time_limit=10.0):
    """Complete instance whose geometry is irrelevant; used to test the
    reward-knapsack machinery with a controlled profitable set 1..n_items."""
    n = n_items + 2
    d = np.ones((n, n))
    np.fill_diagonal(d, 0.0)
    mask = ~np.eye(n, dtype=bool)
    mask[:, 0] = False
    mask[n - 1, :] = False
    return StopInstance(
        vertex_count=n,
        origin=0,
        destination=n - 1,
        mandatory=frozenset(),
        profitable=frozenset(range(1, n - 1)),
        rewards={i + 1: int(rewards[i]) for i in range(n_items)},
        travel_time=d,
        arc_mask=mask,
        fleet_size=fleet,
        time_limit=time_limit,
    )


def point_of_routes(inst, routes):
    """Integral (x, y) point encoding a route set."""
    xv = {a: 0.0 for a in inst.arcs()}
    yv = {v: 0.0 for v in sorted(inst.present)}
    yv[inst.origin] = 1.0
    yv[inst.destination] = 1.0
    for route in routes:
        for a, b in zip(route, route[1:]):
            xv[(a, b)] = 1.0
        for v in route[1:-1]:
            yv[v] = 1.0
    return xv, yv


@pytest.fixture
def figure_instance():
    return make_figure_instance()


@pytest.fixture
def rng():
    return random.Random(20260808)


def chao_dir():
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    cand = os.environ.get("ORIENTEER_CHAO_DIR", os.path.join(here, "data", "chao"))
    return cand if os.path.isdir(cand) else None


def chao_path(name):
    root = chao_dir()
    if root is None:
        return None
    for suffix in (".txt", ""):
        p = os.path.join(root, name + suffix)
        if os.path.exists(p):
            return p
    return None


def require_chao(names=()):
    root = chao_dir()
    missing = [n for n in names if chao_path(n) is None]
    if root is None or missing:
        pytest.skip(
            "public benchmark files not present under data/chao "
            f"(missing: {missing or 'directory'}); see data/README.md for how "
            "to fetch them"
        )
    return root
