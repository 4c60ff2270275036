"""Joint construction of a configuration-model multigraph and its matching.

Each iteration explores one node I chosen by the criterion's first choice
function over the unexplored availabilities, completes all of I's half-edges
by sequential uniform pairing (one stub of I in hand, partner drawn uniformly
among all other remaining stubs, so self-loops are possible and consume two
of I's stubs), then either blocks I (no neighbor besides itself) or matches
it to a neighbor I' chosen by the match choice function over the neighbors'
pre-step availabilities, completing I''s remaining stubs the same way.

The empirical availability measure of unexplored-or-isolated nodes is
maintained incrementally together with its first moments and tail counts, and
the stub pool is kept as a flat array with swap-removal and per-node slot
lists for O(1) deletions.

The module also provides the with-replacement auxiliary sampler used to
validate the mean transition increment against its closed form, and a plain
uniform-pairing multigraph draw for coupling tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import CriterionKind, choose_first, choose_match
from .errors import OddSum, ZeroFirstMoment
from .measures import CountingMeasure, RealMeasure

UNEXPLORED, MATCHED, ISOLATED, BLOCKED = 0, 1, 2, 3

#: per-step recorded functionals of the availability measure:
#: mass, 1st moment, 2nd moment, tail counts #{atoms >= k} for k = 1..5
MOMENT_COLUMNS = ("mass", "m1", "m2", "tail1", "tail2", "tail3", "tail4", "tail5")


class SimState:
    """Mutable state of one joint-construction run (pure-Python backend)."""

    def __init__(self, degrees):
        degrees = [int(d) for d in degrees]
        if sum(degrees) % 2 != 0:
            raise OddSum(f"degree total {sum(degrees)} is odd")
        self.n = len(degrees)
        self.degrees = degrees
        self.avail = list(degrees)
        self.cls = [UNEXPLORED if d > 0 else ISOLATED for d in degrees]
        self.j = 0
        self.matching: list[tuple[int, int]] = []
        self.selfloops = 0
        self.multiedges = 0
        self.blocked = 0
        self.edges: list[tuple[int, int]] | None = None

        # unexplored nodes, swap-remove list
        self.u_list = [v for v in range(self.n) if degrees[v] > 0]
        self.u_pos = {v: i for i, v in enumerate(self.u_list)}

        # stub pool: flat slot array + per-node slot lists + back-links
        self.stub_node: list[int] = []
        self.stub_link: list[int] = []
        self.node_slots: list[list[int]] = [[] for _ in range(self.n)]
        for v, d in enumerate(degrees):
            for _ in range(d):
                self.node_slots[v].append(len(self.stub_node))
                self.stub_link.append(len(self.node_slots[v]) - 1)
                self.stub_node.append(v)

        # availability measure over unexplored + isolated nodes
        top = max(degrees, default=0)
        self.mu_counts = [0] * (top + 1)
        self.mu_mass = 0
        self.mu_m1 = 0
        self.mu_m2 = 0
        self.mu_tails = [0] * 6  # index k = 1..5
        for d in degrees:
            self._mu_add(d)

    # -- availability measure bookkeeping --------------------------------
    def _mu_add(self, y):
        self.mu_counts[y] += 1
        self.mu_mass += 1
        self.mu_m1 += y
        self.mu_m2 += y * y
        for k in range(1, 6):
            if y >= k:
                self.mu_tails[k] += 1

    def _mu_remove(self, y):
        if self.mu_counts[y] < 1:
            raise RuntimeError(f"measure bookkeeping: no atom at {y}")
        self.mu_counts[y] -= 1
        self.mu_mass -= 1
        self.mu_m1 -= y
        self.mu_m2 -= y * y
        for k in range(1, 6):
            if y >= k:
                self.mu_tails[k] -= 1

    def mu(self) -> CountingMeasure:
        return CountingMeasure({y: c for y, c in enumerate(self.mu_counts) if c > 0})

    def moment_row(self):
        return (self.mu_mass, self.mu_m1, self.mu_m2, *self.mu_tails[1:6])

    # -- unexplored set ----------------------------------------------------
    def _u_remove(self, v):
        i = self.u_pos.pop(v)
        last = self.u_list.pop()
        if last != v:
            self.u_list[i] = last
            self.u_pos[last] = i

    # -- stub pool ----------------------------------------------------------
    def _remove_slot(self, p):
        v = self.stub_node[p]
        li = self.stub_link[p]
        slots = self.node_slots[v]
        s_last = slots.pop()
        if s_last != p:
            slots[li] = s_last
            self.stub_link[s_last] = li
        q = len(self.stub_node) - 1
        w = self.stub_node.pop()
        wl = self.stub_link.pop()
        if p != q:
            self.stub_node[p] = w
            self.stub_link[p] = wl
            self.node_slots[w][wl] = p

    def _take_stub_of(self, v):
        self._remove_slot(self.node_slots[v][-1])
        self.avail[v] -= 1

    def _draw_partner(self, rng) -> int:
        p = rng.below(len(self.stub_node))
        w = self.stub_node[p]
        self._remove_slot(p)
        self.avail[w] -= 1
        return w


def init(dv) -> SimState:
    """Initial state for a degree vector (arraylike or DegreeVector)."""
    degrees = getattr(dv, "degrees", dv)
    return SimState(degrees)


def step(state: SimState, kind: CriterionKind, rng) -> SimState:
    """Advance the construction by one iteration (mutates and returns state)."""
    s = state
    if s.j >= s.n:
        raise RuntimeError("construction already terminated")
    if not s.u_list:
        s.j += 1
        return s

    if kind in (CriterionKind.MIN_MIN, CriterionKind.MAX_MAX):
        idx = choose_first(kind, [s.avail[v] for v in s.u_list], rng)
    else:
        # uniform first choice: same single draw, without materializing
        # the availability vector of the whole unexplored set
        idx = rng.below(len(s.u_list))
    explorer = s.u_list[idx]
    k_first = s.avail[explorer]
    s._u_remove(explorer)

    first_edges: dict[int, int] = {}  # neighbor -> multiplicity, discovery order
    while s.avail[explorer] > 0:
        s._take_stub_of(explorer)
        w = s._draw_partner(rng)
        if w == explorer:
            s.selfloops += 1
        else:
            c = first_edges.get(w, 0)
            if c > 0:
                s.multiedges += 1
            first_edges[w] = c + 1
        if s.edges is not None:
            s.edges.append((min(explorer, w), max(explorer, w)))

    if not first_edges:
        # every pairing was a self-loop: the explorer is blocked
        s.cls[explorer] = BLOCKED
        s.blocked += 1
        s._mu_remove(k_first)
        s.j += 1
        _check_parity(s)
        return s

    neighbors = list(first_edges)
    pre_avail = [s.avail[w] + first_edges[w] for w in neighbors]
    match = neighbors[choose_match(kind, pre_avail, rng)]
    k_match = s.avail[match] + first_edges[match]
    s._u_remove(match)

    match_edges: dict[int, int] = {}
    while s.avail[match] > 0:
        s._take_stub_of(match)
        w = s._draw_partner(rng)
        if w == match:
            s.selfloops += 1
        else:
            c = match_edges.get(w, 0)
            if c > 0:
                s.multiedges += 1
            match_edges[w] = c + 1
        if s.edges is not None:
            s.edges.append((min(match, w), max(match, w)))

    s.cls[explorer] = MATCHED
    s.cls[match] = MATCHED
    s.matching.append((explorer, match))
    s._mu_remove(k_first)
    s._mu_remove(k_match)

    losses: dict[int, int] = {}
    for w, c in first_edges.items():
        if w != match:
            losses[w] = c
    for w, c in match_edges.items():
        losses[w] = losses.get(w, 0) + c
    for w, d in losses.items():
        pre = s.avail[w] + d
        s._mu_remove(pre)
        s._mu_add(s.avail[w])
        if s.avail[w] == 0:
            s.cls[w] = ISOLATED
            s._u_remove(w)

    s.j += 1
    _check_parity(s)
    return s


def _check_parity(s: SimState):
    if len(s.stub_node) % 2 != 0:
        raise RuntimeError(f"stub pool parity violated at step {s.j}")


@dataclass
class Trajectory:
    """Time-sampled normalized measures plus the final run accounting."""

    n: int
    criterion: CriterionKind
    grid: tuple[float, ...]
    measures: list[RealMeasure]
    matched: int
    isolated: int
    blocked: int
    selfloops: int
    multiedges: int
    step_moments: np.ndarray | None = None
    edges: list[tuple[int, int]] | None = None
    matching: list[tuple[int, int]] | None = None
    final_zero_count: int = 0

    def __post_init__(self):
        if self.matched + self.isolated + self.blocked != self.n:
            raise RuntimeError("node classes do not partition the graph")
        if self.final_zero_count != self.isolated:
            raise RuntimeError("final measure mass differs from the isolated count")

    @property
    def coverage(self) -> float:
        return self.matched / self.n

    @property
    def blocked_frac(self) -> float:
        return self.blocked / self.n


def grid_steps(n: int, grid) -> list[int]:
    """Map sample times to construction steps floor(n*t)."""
    return [min(int(np.floor(n * t)), n) for t in grid]


def _run_pure(degrees, kind: CriterionKind, rng, grid, record_moments, record_edges):
    state = SimState(degrees)
    n = state.n
    steps = grid_steps(n, grid)
    wanted = set(steps)
    snapshots: dict[int, np.ndarray] = {}
    if record_moments:
        moments = np.empty((n + 1, 8), dtype=np.int64)
        moments[0] = state.moment_row()
    else:
        moments = None
    if record_edges:
        state.edges = []
    if 0 in wanted:
        snapshots[0] = np.array(state.mu_counts, dtype=np.int64)
    for _ in range(n):
        step(state, kind, rng)
        if record_moments:
            moments[state.j] = state.moment_row()
        if state.j in wanted:
            snapshots[state.j] = np.array(state.mu_counts, dtype=np.int64)
    return state, snapshots, moments


def run(dv, kind: CriterionKind, rng, grid=(0.0, 1.0), *,
        record_moments: bool = False, record_edges: bool = False,
        backend: str | None = None) -> Trajectory:
    """Full construction on a degree vector; samples the scaled measure on grid.

    `backend` forces "pure" or "compiled"; by default the compiled core is
    used when available and no per-step detail beyond moments is requested.
    """
    from . import backend as _backend

    degrees = getattr(dv, "degrees", dv)
    degrees = np.asarray(degrees, dtype=np.int64)
    n = degrees.size
    if int(degrees.sum()) % 2 != 0:
        raise OddSum(f"degree total {int(degrees.sum())} is odd")
    grid = tuple(float(t) for t in grid)
    if any(t < 0 or t > 1 for t in grid):
        raise ValueError("grid times must lie in [0, 1]")

    impl = _backend.select(backend)
    if impl.name == "compiled":
        res = impl.core.cm_run(degrees, _backend.KIND_CODES[kind], rng,
                               np.array(sorted(set(grid_steps(n, grid))), dtype=np.int64),
                               record_moments, record_edges)
        (counts_by_step, matched, isolated, blocked, selfloops, multi,
         moments, zero_final, edges, matching) = res
        snapshots = {int(j): c for j, c in counts_by_step}
    else:
        state, snapshots, moments = _run_pure(degrees, kind, rng, grid,
                                              record_moments, record_edges)
        matched = 2 * len(state.matching)
        isolated = sum(1 for c in state.cls if c == ISOLATED)
        blocked = state.blocked
        selfloops = state.selfloops
        multi = state.multiedges
        zero_final = state.mu_counts[0]
        matching = list(state.matching)
        edges = state.edges

    measures = [RealMeasure(snapshots[j] / n) for j in grid_steps(n, grid)]
    return Trajectory(
        n=n, criterion=kind, grid=grid, measures=measures,
        matched=int(matched), isolated=int(isolated), blocked=int(blocked),
        selfloops=int(selfloops), multiedges=int(multi),
        step_moments=moments, edges=edges, matching=matching,
        final_zero_count=int(zero_final),
    )


def uniform_pairing(dv, rng) -> list[tuple[int, int]]:
    """Plain configuration-model draw: pair all stubs uniformly, no matching."""
    degrees = getattr(dv, "degrees", dv)
    pool: list[int] = []
    for v, d in enumerate(degrees):
        pool.extend([int(v)] * int(d))
    if len(pool) % 2 != 0:
        raise OddSum("degree total is odd")
    edges = []
    while pool:
        u = pool.pop()
        p = rng.below(len(pool))
        v = pool[p]
        pool[p] = pool[-1]
        pool.pop()
        edges.append((min(u, v), max(u, v)))
    return edges


def edge_key(edges) -> tuple:
    """Canonical sorted form of an edge sequence, for multigraph comparison."""
    return tuple(sorted((int(u), int(v)) for u, v in edges))


def is_simple(edges) -> bool:
    seen = set()
    for u, v in edges:
        e = (int(u), int(v))
        if e[0] == e[1] or e in seen:
            return False
        seen.add(e)
    return True


def hat_step_sample(mu: CountingMeasure, kind: CriterionKind, rng) -> dict[int, int]:
    """One draw of the with-replacement auxiliary transition increment.

    Buckets are the positive-degree atoms of mu.  The explored bucket's
    partners are drawn with replacement among the items of the *other*
    buckets (an explored bucket holding every item is blocked); the match
    bucket's remaining items are drawn with replacement among all items.
    Returns the signed increment as a degree -> integer map.
    """
    sizes: list[int] = []
    for y, c in mu.items():
        if y > 0:
            sizes.extend([y] * c)
    total_items = sum(sizes)
    if total_items <= 0:
        raise ZeroFirstMoment("measure has zero first moment")

    theta: dict[int, int] = {}

    def bump(y, d):
        theta[y] = theta.get(y, 0) + d
        if theta[y] == 0:
            del theta[y]

    j_first = choose_first(kind, sizes, rng)
    k_first = sizes[j_first]
    bump(k_first, -1)

    others_total = total_items - k_first
    if others_total == 0:
        return theta  # blocked: only the explored atom is removed

    partners: list[int] = []
    for _ in range(k_first):
        r = rng.below(others_total)
        acc = 0
        for b, size in enumerate(sizes):
            if b == j_first:
                continue
            acc += size
            if r < acc:
                partners.append(b)
                break

    distinct: list[int] = []
    seen = set()
    for b in partners:
        if b not in seen:
            seen.add(b)
            distinct.append(b)
    j_match = distinct[choose_match(kind, [sizes[b] for b in distinct], rng)]
    k_match = sizes[j_match]
    bump(k_match, -1)

    skipped = False
    for b in partners:
        if b == j_match and not skipped:
            skipped = True  # this draw is the matching edge itself
            continue
        y = sizes[b]
        bump(y, -1)
        bump(y - 1, +1)

    for _ in range(k_match - 1):
        r = rng.below(total_items)
        acc = 0
        for size in sizes:
            acc += size
            if r < acc:
                bump(size, -1)
                bump(size - 1, +1)
                break

    return theta
