import random
from dataclasses import replace

import numpy as np
import pytest

from orienteer.oracle import OracleBudgetExceeded, enumerate_feasible, enumerate_optimal

from conftest import I, J, K, L, S, T, make_figure_instance, make_random_instance


def test_figure_optimum():
    best = enumerate_optimal(make_figure_instance())
    assert best.total_reward == 2
    assert best.routes == ((S, L, J, T),)
    assert best.durations == (3.0,)


def test_figure_infeasible_with_mandatory_detour():
    assert enumerate_optimal(make_figure_instance(fleet=2, mandatory=(I,))) is None


def test_empty_instance_yields_zero_routes():
    inst = make_figure_instance(rewards={I: 0, L: 0, K: 0, J: 0})
    best = enumerate_optimal(inst)
    assert best.total_reward == 0
    assert best.routes == ()


def test_feasible_sets_are_disjoint_and_within_limit(rng):
    for _ in range(10):
        inst = make_random_instance(rng, n_max=8)
        for rs in enumerate_feasible(inst):
            assert len(rs.routes) <= inst.fleet_size
            seen = set()
            for route, dur in zip(rs.routes, rs.durations):
                assert route[0] == inst.origin and route[-1] == inst.destination
                assert dur <= inst.time_limit + 1e-9
                body = set(route[1:-1])
                assert not body & seen
                seen |= body
            assert inst.mandatory <= seen or not inst.mandatory
            assert rs.total_reward == sum(inst.rewards.get(v, 0) for v in seen)


def test_relabeling_invariance(rng):
    for _ in range(8):
        inst = make_random_instance(rng, n_max=7)
        base = enumerate_optimal(inst)
        perm = list(range(inst.vertex_count))
        mid = perm[1:-1]
        rng.shuffle(mid)
        perm[1:-1] = mid
        inv = {v: i for i, v in enumerate(perm)}
        n = inst.vertex_count
        d = np.empty_like(inst.travel_time)
        mask = np.zeros_like(inst.arc_mask)
        for a in range(n):
            for b in range(n):
                d[inv[a], inv[b]] = inst.travel_time[a, b]
                mask[inv[a], inv[b]] = inst.arc_mask[a, b]
        relabeled = replace(
            inst,
            mandatory=frozenset(inv[v] for v in inst.mandatory),
            profitable=frozenset(inv[v] for v in inst.profitable),
            rewards={inv[v]: p for v, p in inst.rewards.items()},
            travel_time=d,
            arc_mask=mask,
            coordinates=None,
        )
        other = enumerate_optimal(relabeled)
        if base is None:
            assert other is None
        else:
            assert other.total_reward == base.total_reward


def test_scaling_invariance(rng):
    for _ in range(8):
        inst = make_random_instance(rng, n_max=7)
        base = enumerate_optimal(inst)
        scaled = replace(
            inst, travel_time=inst.travel_time * 3.5, time_limit=inst.time_limit * 3.5
        )
        other = enumerate_optimal(scaled)
        if base is None:
            assert other is None
        else:
            assert other.total_reward == base.total_reward


def test_budget_refusal():
    rng = random.Random(0)
    inst = make_random_instance(rng, n_max=9, tightness=(2.0, 2.5))
    with pytest.raises(OracleBudgetExceeded):
        enumerate_optimal(inst, hard_cap=5)
