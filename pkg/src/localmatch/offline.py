"""Local matching on a pre-built simple graph.

This is the reference dynamics on a fixed graph: at each of n iterations,
pick an unmatched node with a nonempty current neighborhood via the
criterion's first choice function, pick its match among current neighbors via
the match choice function, remove both, and move freshly degree-0 nodes to
the isolated class.  ``enumerate_offline`` walks the full decision tree with
exact rational probabilities and is the brute-force oracle for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .criteria import CriterionKind, choose_first, choose_match
from .errors import TooLarge
from .measures import CountingMeasure

ENUMERATION_MAX_NODES = 12


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph with sorted adjacency lists."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "SimpleGraph":
        neigh = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range")
            neigh[u].add(v)
            neigh[v].add(u)
        return cls(n=n, adjacency=tuple(tuple(sorted(s)) for s in neigh))

    @classmethod
    def from_edge_list_file(cls, path: str) -> "SimpleGraph":
        """Read a text file with one 0-based edge "u v" per line."""
        edges = []
        top = -1
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                u, v = (int(tok) for tok in line.split())
                edges.append((u, v))
                top = max(top, u, v)
        return cls.from_edges(top + 1, edges)

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def degree_vector(self):
        return [len(nbrs) for nbrs in self.adjacency]


@dataclass
class OfflineRun:
    """Outcome of one run: matching, isolated set, per-step measures, coverage."""

    matching: list[tuple[int, int]]
    isolated: set[int]
    trajectory: list[CountingMeasure]
    coverage: float


def run_offline(g: SimpleGraph, kind: CriterionKind, rng) -> OfflineRun:
    """One seeded run of the local matching on g, over exactly n iterations."""
    n = g.n
    deg = [len(nbrs) for nbrs in g.adjacency]
    # 0 unexplored, 1 matched, 2 isolated
    cls = [0 if deg[v] > 0 else 2 for v in range(n)]
    # swap-remove list of nodes with positive current degree
    active = [v for v in range(n) if deg[v] > 0]
    active_pos = {v: i for i, v in enumerate(active)}

    def deactivate(v):
        i = active_pos.pop(v)
        last = active.pop()
        if last != v:
            active[i] = last
            active_pos[last] = i

    def snapshot():
        counts: dict[int, int] = {}
        for v in range(n):
            if cls[v] != 1:
                counts[deg[v]] = counts.get(deg[v], 0) + 1
        return CountingMeasure(counts)

    matching: list[tuple[int, int]] = []
    trajectory = [snapshot()]
    for _ in range(n):
        if not active:
            trajectory.append(trajectory[-1])
            continue
        i = choose_first(kind, [deg[v] for v in active], rng)
        v = active[i]
        nbrs = [w for w in g.adjacency[v] if cls[w] == 0]
        j = choose_match(kind, [deg[w] for w in nbrs], rng)
        w = nbrs[j]
        matching.append((v, w))
        cls[v] = cls[w] = 1
        deactivate(v)
        deactivate(w)
        for x in (v, w):
            for y in g.adjacency[x]:
                if cls[y] == 0:
                    deg[y] -= 1
                    if deg[y] == 0:
                        cls[y] = 2
                        deactivate(y)
        trajectory.append(snapshot())
    isolated = {v for v in range(n) if cls[v] == 2}
    return OfflineRun(
        matching=matching,
        isolated=isolated,
        trajectory=trajectory,
        coverage=2 * len(matching) / n,
    )


def _first_choice_dist(kind: CriterionKind, nodes, deg) -> list[tuple[int, Fraction]]:
    if kind is CriterionKind.MIN_MIN:
        best = min(deg[v] for v in nodes)
        ties = [v for v in nodes if deg[v] == best]
    elif kind is CriterionKind.MAX_MAX:
        best = max(deg[v] for v in nodes)
        ties = [v for v in nodes if deg[v] == best]
    else:
        ties = list(nodes)
    p = Fraction(1, len(ties))
    return [(v, p) for v in ties]


def _match_choice_dist(kind: CriterionKind, nodes, deg) -> list[tuple[int, Fraction]]:
    if kind is CriterionKind.GREEDY:
        ties = list(nodes)
    elif kind in (CriterionKind.UNI_MIN, CriterionKind.MIN_MIN):
        best = min(deg[v] for v in nodes)
        ties = [v for v in nodes if deg[v] == best]
    else:
        best = max(deg[v] for v in nodes)
        ties = [v for v in nodes if deg[v] == best]
    p = Fraction(1, len(ties))
    return [(v, p) for v in ties]


def enumerate_offline(g: SimpleGraph, kind: CriterionKind) -> dict[Fraction, Fraction]:
    """Exact law of the final coverage, by full decision-tree enumeration.

    States are memoized on the surviving node set: the future of the dynamics
    depends only on the induced subgraph.  Returns {coverage: probability}
    with exact rationals.
    """
    if g.n > ENUMERATION_MAX_NODES:
        raise TooLarge(f"enumeration supports n <= {ENUMERATION_MAX_NODES}, got {g.n}")

    adjacency = g.adjacency
    cache: dict[frozenset, dict[int, Fraction]] = {}

    def matched_dist(alive: frozenset) -> dict[int, Fraction]:
        """Law of the number of nodes matched from this residual node set on."""
        hit = cache.get(alive)
        if hit is not None:
            return hit
        deg = {v: sum(1 for w in adjacency[v] if w in alive) for v in alive}
        choice_set = [v for v in alive if deg[v] > 0]
        if not choice_set:
            out = {0: Fraction(1)}
            cache[alive] = out
            return out
        out: dict[int, Fraction] = {}
        for v, pv in _first_choice_dist(kind, choice_set, deg):
            nbrs = [w for w in adjacency[v] if w in alive]
            for w, pw in _match_choice_dist(kind, nbrs, deg):
                sub = matched_dist(alive - {v, w})
                pvw = pv * pw
                for m, pm in sub.items():
                    key = m + 2
                    out[key] = out.get(key, Fraction(0)) + pvw * pm
        cache[alive] = out
        return out

    dist = matched_dist(frozenset(range(g.n)))
    total = sum(dist.values())
    if abs(total - 1) > 0:
        raise AssertionError(f"enumeration probabilities sum to {total}")
    return {Fraction(m, g.n): p for m, p in dist.items()}
