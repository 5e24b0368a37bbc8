"""Exact solution pipelines.

Two modes share one branch-and-bound engine:

* main pipeline: preprocess, screen for obviously unroutable mandatory
  vertices, build the flow formulation with the per-arc flow lower bounds
  marked poolable, run the root cutting loop (connectivity, conflict and
  lifted-cover separation against successive LP optima), then close the
  integrality gap by LP-based branch-and-bound where pooled inequalities are
  appended lazily whenever a node optimum violates them.

* baseline: the arrival-time formulation with the aggregate travel-time row
  kept, connectivity cuts separated at every tree node until the bound gain
  drops below a tolerance, no cut filtering and no pool.

Everything is deterministic for a fixed configuration: node selection is
best-bound with deeper-first then insertion-order tie-breaks, branching picks
the most fractional arc variable (then visit variable), ties on the lowest
column index.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .formulation import build_arrival_formulation, build_flow_formulation
from .instance import min_time_matrix, preprocess
from .separation import (
    CONFLICT,
    CONNECTIVITY,
    COVER,
    SeparationParams,
    build_conflict_set,
    filter_cuts,
    floor_bound,
    separate_conflict,
    separate_connectivity,
    separate_lifted_cover,
)

ALL_FAMILIES = frozenset({CONNECTIVITY, CONFLICT, COVER})

INTEGER_TOL = 1e-6
POOL_TOL = 1e-6


@dataclass(frozen=True)
class SolveConfig:
    time_limit_s: float = 7200.0
    phase_tolerance: float = 1e-3  # root cutting loop stopping tolerance
    node_tolerance: float = 1e-3  # baseline per-node tailing-off tolerance
    params: SeparationParams = SeparationParams()
    families: frozenset = ALL_FAMILIES
    lp_backend: str = "highs"
    max_nodes: int = 50_000_000


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | time-limit
    lower_bound: float
    upper_bound: float
    routes: list
    gap: float
    timings: dict
    cut_counts: dict
    node_count: int
    lp_bound: float | None = None
    root_bound: float | None = None
    cut_pool: list = field(default_factory=list)
    reason: str = ""

    @property
    def optimal_value(self):
        return self.lower_bound if self.status == "optimal" else None


def compute_gap(status, lower, upper):
    """(upper - lower)/upper, with 0% on proven infeasible and 100% when
    nothing is known; a 0/0 bound pair counts as closed."""
    if status == "infeasible":
        return 0.0
    if lower is None or lower == -math.inf:
        return 1.0
    if upper == lower:
        return 0.0
    if upper <= 0:
        return 0.0
    return (upper - lower) / upper


@dataclass
class PhaseResult:
    status: str  # bound | infeasible | time-limit
    handle: object
    upper_bound: float
    lp_bound: float
    cuts: list
    iterations: int
    solution: object


def _point(handle, sol):
    return handle.point_from_solution(sol)


def _open_session(model, config):
    """Warm-start session when the incremental engine exists; the stateless
    path stays the fallback for every call, so failures here only cost
    speed."""
    if config.lp_backend != "highs" or not lp.incremental_available():
        return None
    try:
        return lp.HighsSession(model)
    except Exception:
        return None


def cutting_plane_phase(inst, config=SolveConfig(), conflicts=None, handle=None, deadline=None):
    """Root reinforcement loop.

    Starting from the full linear relaxation, each round separates the
    enabled cut families against the current optimum, keeps the most violated
    plus sufficiently orthogonal ones (connectivity and conflict families
    filtered separately, at most one cover cut), appends and re-solves.
    Stops when a round finds nothing or the bound improves by at most the
    phase tolerance.  The instance must already be preprocessed.
    """
    if handle is None:
        handle = build_flow_formulation(inst, bounds_as_cuts=True)
    if conflicts is None and CONFLICT in config.families:
        conflicts = build_conflict_set(inst, handle.min_times)
    model = handle.model
    session = _open_session(model, config)

    def resolve():
        if session is not None:
            out = session.solve()
            if out is not None:
                return out
        return lp.solve(model, backend=config.lp_backend)

    sol = resolve()
    if sol.status == "infeasible":
        return PhaseResult("infeasible", handle, -math.inf, -math.inf, [], 0, None)
    if sol.status != "optimal":
        raise lp.LpError(f"relaxation came back {sol.status}")
    lp_bound = sol.objective
    ub = lp_bound
    cuts = []
    iterations = 0
    params = config.params
    while True:
        if deadline is not None and time.monotonic() > deadline:
            return PhaseResult("time-limit", handle, ub, lp_bound, cuts, iterations, sol)
        xv, yv = _point(handle, sol)
        fresh = []
        if CONNECTIVITY in config.families:
            cand = separate_connectivity(xv, yv, inst, params.connectivity)
            fresh += filter_cuts(cand, params.connectivity, xv, yv)
        if CONFLICT in config.families:
            cand = separate_conflict(xv, yv, inst, conflicts, params.conflict)
            fresh += filter_cuts(cand, params.conflict, xv, yv)
        if COVER in config.families:
            cover = separate_lifted_cover(yv, inst, dual_bound=sol.objective)
            if cover is not None and cover.violation(xv, yv) > params.cover_violation:
                fresh.append(cover)
        if not fresh:
            return PhaseResult("bound", handle, ub, lp_bound, cuts, iterations, sol)
        iterations += 1
        new_rows = [cut.to_row(handle) for cut in fresh]
        for row in new_rows:
            model.add_row(row)
        if session is not None:
            try:
                session.add_rows(new_rows)
            except Exception:
                session = None
        cuts.extend(fresh)
        sol = resolve()
        if sol.status == "infeasible":
            # cuts never exclude feasible integer points, so an emptied
            # relaxation certifies the instance itself is infeasible
            return PhaseResult("infeasible", handle, -math.inf, lp_bound, cuts, iterations, None)
        if sol.status != "optimal":
            raise lp.LpError(f"reinforced relaxation came back {sol.status}")
        improvement = ub - sol.objective
        ub = min(ub, sol.objective)
        if improvement <= config.phase_tolerance:
            return PhaseResult("bound", handle, ub, lp_bound, cuts, iterations, sol)


# -- branch and bound --------------------------------------------------------


def _pool_matrix(pool, n_cols):
    """(csr matrix, ge mask, rhs) for vectorized pool-violation scans."""
    if not pool:
        return None
    from scipy.sparse import csr_matrix

    data, indices, indptr = [], [], [0]
    ge = np.zeros(len(pool), dtype=bool)
    rhs = np.zeros(len(pool))
    for k, row in enumerate(pool):
        data.extend(row.values)
        indices.extend(row.indices)
        indptr.append(len(indices))
        ge[k] = row.relation == lp.GE
        rhs[k] = row.rhs
    mat = csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(len(pool), n_cols),
    )
    return mat, ge, rhs


def _violated_pool_rows(pool_matrix, pool_active, x):
    if pool_matrix is None:
        return []
    mat, ge, rhs = pool_matrix
    act = mat @ x
    bad = np.where(ge, act < rhs - POOL_TOL, act > rhs + POOL_TOL)
    return [int(k) for k in np.nonzero(bad)[0] if not pool_active[k]]


class _Tree:
    """Best-bound search with deeper-first, then FIFO tie-breaks."""

    def __init__(self):
        self.heap = []
        self.seq = 0

    def push(self, bound, depth, fixings):
        heapq.heappush(self.heap, (-bound, -depth, self.seq, fixings))
        self.seq += 1

    def pop(self):
        nb, nd, _, fixings = heapq.heappop(self.heap)
        return -nb, -nd, fixings

    def best_open_bound(self):
        return -self.heap[0][0] if self.heap else -math.inf

    def __len__(self):
        return len(self.heap)


def _fractional(value):
    return abs(value - round(value))


def _branch_order(handle):
    """Column ids of the arc block then the visit block, in index order
    (ties in fractionality resolve to the lowest column id)."""
    xs = np.fromiter((handle.x_index[a] for a in sorted(handle.x_index)), dtype=np.int64)
    ys = np.fromiter((handle.y_index[i] for i in sorted(handle.y_index)), dtype=np.int64)
    return xs, ys


def _pick_branch_column(order, x):
    for cols in order:
        if not len(cols):
            continue
        vals = x[cols]
        frac = np.abs(vals - np.round(vals))
        k = int(np.argmax(frac))
        if frac[k] > INTEGER_TOL:
            return int(cols[k])
    return None


def extract_routes(handle, x):
    """Walk the arcs set to one in an integral solution; one route per
    origin departure."""
    inst = handle.instance
    s, t = inst.origin, inst.destination
    succ = {}
    starts = []
    for (i, j), c in handle.x_index.items():
        if x[c] > 0.5:
            if i == s:
                starts.append(j)
            else:
                succ[i] = j
    routes = []
    for j in sorted(starts):
        route = [s, j]
        guard = 0
        while route[-1] != t:
            route.append(succ[route[-1]])
            guard += 1
            if guard > inst.vertex_count + 1:
                raise AssertionError("cyclic successor walk in an accepted solution")
        routes.append(route)
    return routes


def _incumbent_value(handle, x):
    return sum(
        inst_reward
        for i, inst_reward in handle.instance.rewards.items()
        if x[handle.y_index[i]] > 0.5
    )


def branch_and_bound(
    handle,
    work_model,
    pool,
    config,
    deadline,
    node_cut_hook=None,
    stats=None,
):
    """LP branch-and-bound over ``work_model`` with a lazy inequality pool.

    ``pool`` holds LpRow objects valid for every feasible solution; a node's
    LP must satisfy all of them before it may branch or improve the
    incumbent.  ``node_cut_hook(sol, round_idx, add_row)`` may append extra
    valid rows at each node (the baseline's per-node connectivity loop).
    """
    stats = stats if stats is not None else {}
    stats.setdefault("nodes", 0)
    stats.setdefault("pool_activated", 0)
    base_bounds = np.array([work_model.lower, work_model.upper], dtype=float).T

    session = _open_session(work_model, config)

    def node_solve(node_bounds):
        if session is not None:
            out = session.solve(bounds_override=node_bounds)
            if out is not None:
                return out
        return lp.solve(work_model, backend=config.lp_backend, bounds_override=node_bounds)

    def add_row(row):
        nonlocal session
        work_model.add_row(row)
        if session is not None:
            try:
                session.add_rows([row])
            except Exception:
                session = None  # stateless solves keep the run correct

    pool_active = [False] * len(pool)
    pool_matrix = _pool_matrix(pool, work_model.n_cols)
    order = _branch_order(handle)
    tree = _Tree()
    tree.push(math.inf, 0, ())
    best_value = -math.inf
    best_routes = None
    status = "optimal"
    dive = None  # (bound, depth, fixings): child processed before the heap

    while dive is not None or len(tree):
        if time.monotonic() > deadline or stats["nodes"] >= config.max_nodes:
            status = "time-limit"
            break
        if dive is not None:
            parent_bound, depth, fixings = dive
            dive = None
        else:
            parent_bound, depth, fixings = tree.pop()
        if (
            best_value > -math.inf
            and parent_bound < math.inf
            and floor_bound(parent_bound + INTEGER_TOL) <= best_value
        ):
            continue
        stats["nodes"] += 1

        bounds = base_bounds.copy()
        for col, lo, up in fixings:
            bounds[col, 0] = lo
            bounds[col, 1] = up

        sol = node_solve(bounds)
        feasible = sol.status == "optimal"
        round_idx = 0
        while feasible:
            violated = _violated_pool_rows(pool_matrix, pool_active, sol.x)
            hooked = False
            if node_cut_hook is not None and not violated:
                hooked = node_cut_hook(sol, round_idx, add_row)
            if not violated and not hooked:
                break
            round_idx += 1
            for k in violated:
                add_row(pool[k])
                pool_active[k] = True
                stats["pool_activated"] += 1
            sol = node_solve(bounds)
            feasible = sol.status == "optimal"
        if not feasible:
            continue
        if floor_bound(sol.objective + INTEGER_TOL) <= best_value:
            continue  # integral rewards: nothing better in this subtree

        col = _pick_branch_column(order, sol.x)
        if col is None:
            value = _incumbent_value(handle, sol.x)
            if value > best_value:
                best_value = value
                best_routes = extract_routes(handle, sol.x)
            continue
        lo, up = bounds[col]
        down = fixings + ((col, lo, math.floor(sol.x[col])),)
        upn = fixings + ((col, math.ceil(sol.x[col]), up),)
        # dive into the child agreeing with the fractional value's rounding;
        # the sibling waits on the best-bound heap
        if sol.x[col] - math.floor(sol.x[col]) >= 0.5:
            dive = (sol.objective, depth + 1, upn)
            tree.push(sol.objective, depth + 1, down)
        else:
            dive = (sol.objective, depth + 1, down)
            tree.push(sol.objective, depth + 1, upn)

    open_bound = tree.best_open_bound()
    if dive is not None:
        open_bound = max(open_bound, dive[0])
    if status == "time-limit":
        upper = max(best_value, open_bound)
        if upper == -math.inf:
            upper = math.inf
    else:
        upper = best_value if best_value > -math.inf else -math.inf
    return status, best_value, upper, best_routes, stats


# -- public pipelines --------------------------------------------------------


def _screen(inst):
    """Cheap certificate: a mandatory vertex that cannot reach both ends."""
    R = min_time_matrix(inst).values
    s, t = inst.origin, inst.destination
    for i in sorted(inst.mandatory):
        if R[s, i] + R[i, t] > inst.time_limit:
            return i
    return None


def _infeasible_report(timings, reason, cut_counts=None):
    return SolveReport(
        status="infeasible",
        lower_bound=-math.inf,
        upper_bound=-math.inf,
        routes=[],
        gap=0.0,
        timings=timings,
        cut_counts=cut_counts or {},
        node_count=0,
        reason=reason,
    )


def _family_counts(cuts):
    counts = {CONNECTIVITY: 0, CONFLICT: 0, COVER: 0}
    for c in cuts:
        counts[c.family] += 1
    return counts


def solve_stop(inst, config=SolveConfig()):
    """Cutting-plane pipeline: root reinforcement then branch-and-bound with
    the flow lower bounds and all root cuts handled as a lazy pool."""
    t0 = time.monotonic()
    deadline = t0 + config.time_limit_s
    blocker = _screen(inst)
    if blocker is not None:
        return _infeasible_report(
            {"total": time.monotonic() - t0},
            f"mandatory vertex {blocker} cannot be routed within the limit",
        )
    pre, report = preprocess(inst)
    conflicts = build_conflict_set(inst, pre.min_times) if CONFLICT in config.families else ()
    t_pre = time.monotonic() - t0

    phase = cutting_plane_phase(pre, config, conflicts=conflicts, deadline=deadline)
    t_root = time.monotonic() - t0 - t_pre
    if phase.status == "infeasible":
        return _infeasible_report(
            {"preprocess": t_pre, "root": t_root, "total": time.monotonic() - t0},
            "linear relaxation infeasible",
        )
    handle = phase.handle

    # rebuild the model with hard rows only; pooled rows join on demand
    soft = set(handle.soft_rows)
    work = lp.LpModel()
    for lo, up, obj in zip(handle.model.lower, handle.model.upper, handle.model.objective):
        work.add_column(lo, up, obj)
    n_structural = len(handle.model.rows) - len(phase.cuts)
    pool = []
    for ridx, row in enumerate(handle.model.rows):
        if ridx < n_structural and ridx not in soft:
            work.add_row(row)
        elif ridx in soft:
            pool.append(row)
    for cut in phase.cuts:
        pool.append(cut.to_row(handle))

    status, best_value, upper, routes, stats = branch_and_bound(
        handle, work, pool, config, deadline
    )
    upper = min(upper, phase.upper_bound)
    t_total = time.monotonic() - t0
    timings = {"preprocess": t_pre, "root": t_root, "search": t_total - t_pre - t_root, "total": t_total}
    counts = _family_counts(phase.cuts)
    counts["pool_activated"] = stats["pool_activated"]

    if status != "time-limit" and best_value == -math.inf:
        return _infeasible_report(timings, "search exhausted without a feasible point", counts)
    if best_value == -math.inf:
        return SolveReport(
            status="time-limit",
            lower_bound=-math.inf,
            upper_bound=upper,
            routes=[],
            gap=1.0,
            timings=timings,
            cut_counts=counts,
            node_count=stats["nodes"],
            lp_bound=phase.lp_bound,
            root_bound=phase.upper_bound,
            cut_pool=list(phase.cuts),
        )
    return SolveReport(
        status=status,
        lower_bound=float(best_value),
        upper_bound=float(upper if status == "time-limit" else best_value),
        routes=routes or [],
        gap=compute_gap(status, best_value, upper if status == "time-limit" else best_value),
        timings=timings,
        cut_counts=counts,
        node_count=stats["nodes"],
        lp_bound=phase.lp_bound,
        root_bound=phase.upper_bound,
        cut_pool=list(phase.cuts),
    )


def solve_baseline(inst, config=SolveConfig()):
    """Branch-and-cut on the arrival-time formulation: connectivity cuts
    separated at every node until the gain per round drops to the node
    tolerance; every violated cut found is added (no orthogonality filter)."""
    t0 = time.monotonic()
    deadline = t0 + config.time_limit_s
    blocker = _screen(inst)
    if blocker is not None:
        return _infeasible_report(
            {"total": time.monotonic() - t0},
            f"mandatory vertex {blocker} cannot be routed within the limit",
        )
    pre, report = preprocess(inst)
    t_pre = time.monotonic() - t0

    handle = build_arrival_formulation(pre, include_total_time_row=True)
    work = handle.model
    root = lp.solve(work, backend=config.lp_backend)
    if root.status == "infeasible":
        return _infeasible_report(
            {"preprocess": t_pre, "total": time.monotonic() - t0},
            "linear relaxation infeasible",
        )
    lp_bound = root.objective

    added = []
    prev_obj = [None]

    def node_hook(sol, round_idx, add_row):
        # one separation round per call; the engine re-solves between rounds,
        # and rounds at a node stop once the gain falls to the tolerance
        if round_idx == 0:
            prev_obj[0] = None
        if prev_obj[0] is not None and prev_obj[0] - sol.objective <= config.node_tolerance:
            return False
        xv, yv = _point(handle, sol)
        cand = separate_connectivity(xv, yv, pre, config.params.connectivity)
        if not cand:
            return False
        for cut in cand:
            add_row(cut.to_row(handle))
            added.append(cut)
        prev_obj[0] = sol.objective
        return True

    status, best_value, upper, routes, stats = branch_and_bound(
        handle, work, [], config, deadline, node_cut_hook=node_hook
    )
    upper = min(upper, lp_bound)
    t_total = time.monotonic() - t0
    timings = {"preprocess": t_pre, "search": t_total - t_pre, "total": t_total}
    counts = {CONNECTIVITY: len(added), CONFLICT: 0, COVER: 0}

    if status != "time-limit" and best_value == -math.inf:
        return _infeasible_report(timings, "search exhausted without a feasible point", counts)
    if best_value == -math.inf:
        return SolveReport(
            "time-limit", -math.inf, upper, [], 1.0, timings, counts, stats["nodes"],
            lp_bound=lp_bound, cut_pool=list(added),
        )
    return SolveReport(
        status=status,
        lower_bound=float(best_value),
        upper_bound=float(upper if status == "time-limit" else best_value),
        routes=routes or [],
        gap=compute_gap(status, best_value, upper if status == "time-limit" else best_value),
        timings=timings,
        cut_counts=counts,
        node_count=stats["nodes"],
        lp_bound=lp_bound,
        cut_pool=list(added),
    )


def solve_lp_only(inst, config=SolveConfig()):
    """Bound from the plain relaxation (flow kind, hard flow lower bounds)."""
    t0 = time.monotonic()
    blocker = _screen(inst)
    if blocker is not None:
        return _infeasible_report({"total": time.monotonic() - t0}, f"mandatory vertex {blocker} unroutable")
    pre, _ = preprocess(inst)
    handle = build_flow_formulation(pre, bounds_as_cuts=False)
    sol = lp.solve(handle.model, backend=config.lp_backend)
    t_total = time.monotonic() - t0
    if sol.status == "infeasible":
        return _infeasible_report({"total": t_total}, "linear relaxation infeasible")
    return SolveReport(
        status="time-limit",
        lower_bound=-math.inf,
        upper_bound=sol.objective,
        routes=[],
        gap=1.0,
        timings={"total": t_total},
        cut_counts={},
        node_count=0,
        lp_bound=sol.objective,
    )
