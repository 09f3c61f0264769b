"""Mutable undirected simple graph tuned for birth-death churn.

Nodes are born and die constantly in these simulations, so the structure
keeps everything needed for O(1)-amortized node insertion/removal and for
cheap target sampling:

* a swap-remove list of live nodes (uniform sampling, uniform deaths),
* optionally a half-edge table (degree-proportional sampling without a
  per-draw pass over the whole graph).

Node ids are monotonically increasing integers and are never reused, so a
trajectory's event log unambiguously identifies every individual that ever
lived.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def sample_distinct(items: list, k: int, rng) -> list:
    """Draw ``k`` distinct elements from ``items`` uniformly at random.

    Uses rejection for small ``k`` and a partial Fisher-Yates pass otherwise,
    consuming only ``rng.random()`` so sequences are stable across Python
    versions. ``items`` is not modified.
    """
    n = len(items)
    if k >= n:
        return list(items)
    if k <= 0:
        return []
    rand = rng.random
    if 3 * k < n:
        chosen: set = set()
        out = []
        while len(out) < k:
            x = items[int(rand() * n)]
            if x not in chosen:
                chosen.add(x)
                out.append(x)
        return out
    pool = list(items)
    for i in range(k):
        j = i + int(rand() * (n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


class DynamicGraph:
    """Undirected simple graph with stable, never-recycled node ids."""

    __slots__ = ("_adj", "_order", "_pos", "_next_id", "_degree_sum",
                 "_half_edges", "_he_pos")

    def __init__(self, track_half_edges: bool = False):
        self._adj: dict[int, set[int]] = {}
        self._order: list[int] = []          # live nodes, swap-remove order
        self._pos: dict[int, int] = {}       # node -> index in _order
        self._next_id = 0
        self._degree_sum = 0
        # Half-edge table: each edge {u, v} contributes the ordered pairs
        # (u, v) and (v, u); sampling a uniform entry picks a node with
        # probability deg/degree_sum. Only maintained on request.
        if track_half_edges:
            self._half_edges: list[tuple[int, int]] | None = []
            self._he_pos: dict[tuple[int, int], int] | None = {}
        else:
            self._half_edges = None
            self._he_pos = None

    @classmethod
    def complete(cls, n: int, track_half_edges: bool = False) -> "DynamicGraph":
        """Build the complete graph on ``n`` fresh nodes."""
        g = cls(track_half_edges=track_half_edges)
        ids = [g.add_node() for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                g.add_edge(ids[i], ids[j])
        return g

    # -- basic queries ----------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self._order)

    @property
    def num_edges(self) -> int:
        return self._degree_sum // 2

    @property
    def degree_sum(self) -> int:
        return self._degree_sum

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def nodes(self) -> list[int]:
        """Live node ids (copy; order is an implementation detail)."""
        return list(self._order)

    def has_edge(self, u: int, v: int) -> bool:
        s = self._adj.get(u)
        return s is not None and v in s

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def neighbors(self, node: int) -> Iterator[int]:
        return iter(self._adj[node])

    def mean_degree(self) -> float:
        """degree_sum / num_nodes; by convention 0.0 for the empty graph."""
        n = len(self._order)
        return self._degree_sum / n if n else 0.0

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for s in self._adj.values():
            d = len(s)
            hist[d] = hist.get(d, 0) + 1
        return hist

    # -- mutation ---------------------------------------------------------

    def add_node(self) -> int:
        node = self._next_id
        self._next_id += 1
        self._adj[node] = set()
        self._pos[node] = len(self._order)
        self._order.append(node)
        return node

    def add_edge(self, u: int, v: int) -> bool:
        """Insert edge {u, v}; returns False (no-op) if it already exists.

        Raises ValueError for self-loops or missing endpoints.
        """
        if u == v:
            raise ValueError(f"self-loop rejected: {u}")
        adj = self._adj
        if u not in adj or v not in adj:
            missing = u if u not in adj else v
            raise ValueError(f"unknown node: {missing}")
        if v in adj[u]:
            return False
        adj[u].add(v)
        adj[v].add(u)
        self._degree_sum += 2
        if self._half_edges is not None:
            he, pos = self._half_edges, self._he_pos
            for pair in ((u, v), (v, u)):
                pos[pair] = len(he)
                he.append(pair)
        return True

    def remove_node(self, node: int) -> int:
        """Remove ``node`` and all incident edges; returns its old degree."""
        adj = self._adj
        if node not in adj:
            raise KeyError(f"unknown node: {node}")
        nbrs = adj.pop(node)
        deg = len(nbrs)
        he, he_pos = self._half_edges, self._he_pos
        if he is None:
            for y in nbrs:
                adj[y].discard(node)
        else:
            for y in nbrs:
                adj[y].discard(node)
                for pair in ((node, y), (y, node)):
                    i = he_pos.pop(pair)
                    last = he[-1]
                    if last != pair:
                        he[i] = last
                        he_pos[last] = i
                    he.pop()
        self._degree_sum -= 2 * deg
        order, pos = self._order, self._pos
        i = pos.pop(node)
        last = order.pop()
        if last != node:
            order[i] = last
            pos[last] = i
        return deg

    # -- sampling ---------------------------------------------------------

    def random_node(self, rng) -> int:
        """One live node, uniformly."""
        order = self._order
        return order[int(rng.random() * len(order))]

    def sample_uniform(self, k: int, exclude: Iterable[int], rng) -> list[int]:
        """Up to ``k`` distinct nodes uniformly from V minus ``exclude``."""
        excl = {v for v in exclude if v in self._adj}
        order = self._order
        n_cand = len(order) - len(excl)
        k_eff = min(k, n_cand)
        if k_eff <= 0:
            return []
        if not excl:
            return sample_distinct(order, k_eff, rng)
        if 3 * k_eff >= n_cand:
            return sample_distinct([v for v in order if v not in excl], k_eff, rng)
        rand = rng.random
        n = len(order)
        taken: set = set()
        out = []
        while len(out) < k_eff:
            v = order[int(rand() * n)]
            if v in excl or v in taken:
                continue
            taken.add(v)
            out.append(v)
        return out

    def sample_uniform_prefix(self, k: int, limit: int, rng) -> list[int]:
        """Uniform distinct sample restricted to the first ``limit`` entries
        of the internal order. Right after add_node the newcomer is the
        last entry, so limit = N-1 samples the pre-arrival population
        without any exclusion bookkeeping; hot path of every birth."""
        if k >= limit:
            return self._order[:limit]
        if k <= 0:
            return []
        order = self._order
        rand = rng.random
        if 3 * k < limit:
            taken: set = set()
            out = []
            while len(out) < k:
                v = order[int(rand() * limit)]
                if v not in taken:
                    taken.add(v)
                    out.append(v)
            return out
        pool = order[:limit]
        n = limit
        for i in range(k):
            j = i + int(rand() * (n - i))
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def attach_new(self, new: int, targets) -> None:
        """Bulk-insert edges from a just-added, still-isolated node to
        distinct existing targets; skips per-edge validation."""
        adj = self._adj
        s = adj[new]
        for y in targets:
            s.add(y)
            adj[y].add(new)
        self._degree_sum += 2 * len(targets)
        he = self._half_edges
        if he is not None:
            he_pos = self._he_pos
            for y in targets:
                for pair in ((new, y), (y, new)):
                    he_pos[pair] = len(he)
                    he.append(pair)

    def sample_preferential(self, k: int, exclude: Iterable[int], rng) -> list[int]:
        """Up to ``k`` distinct nodes, sequentially weighted by current degree.

        Each draw removes the chosen node's weight from the pool (weighted
        sampling without replacement). Zero-degree nodes are unreachable
        while any remaining candidate has positive degree; once the live
        weight is exhausted the remaining draws are uniform over what is
        left, so the call still returns min(k, #candidates) nodes.
        """
        adj = self._adj
        excl = {v for v in exclude if v in adj}
        n_cand = len(self._order) - len(excl)
        k_eff = min(k, n_cand)
        if k_eff <= 0:
            return []
        rand = rng.random
        remaining_w = self._degree_sum - sum(len(adj[v]) for v in excl)
        taken: set = set(excl)
        out: list[int] = []
        he = self._half_edges
        while len(out) < k_eff:
            if remaining_w <= 0:
                rest = [v for v in self._order if v not in taken]
                for v in sample_distinct(rest, k_eff - len(out), rng):
                    out.append(v)
                return out
            v = None
            if he is not None:
                n_he = len(he)
                # Rejection over half-edges; bail out to the exact scan if
                # taken nodes hold most of the weight.
                for _ in range(48):
                    cand = he[int(rand() * n_he)][0]
                    if cand not in taken:
                        v = cand
                        break
            if v is None:
                # Exact pass: cumulative degree over remaining candidates.
                r = rand() * remaining_w
                acc = 0
                for cand in self._order:
                    if cand in taken:
                        continue
                    acc += len(adj[cand])
                    if r < acc:
                        v = cand
                        break
                    last_cand = cand
                if v is None:
                    # acc sums exactly to remaining_w (both ints), so r < acc
                    # must have fired; guard anyway against bookkeeping bugs.
                    v = last_cand
            taken.add(v)
            out.append(v)
            remaining_w -= len(adj[v])
        return out

    def sample_targets(self, mechanism: str, m: int,
                       exclude: Iterable[int], rng) -> list[int]:
        """Attachment targets for a newcomer: ``uniform`` or ``preferential``."""
        if mechanism == "uniform":
            return self.sample_uniform(m, exclude, rng)
        if mechanism == "preferential":
            return self.sample_preferential(m, exclude, rng)
        raise ValueError(f"unknown mechanism: {mechanism!r}")

    def check_consistency(self) -> None:
        """Internal invariants (handshake, symmetry, index maps); for tests."""
        assert set(self._adj) == set(self._order) == set(self._pos)
        assert all(self._order[i] == v for v, i in self._pos.items())
        total = 0
        for v, s in self._adj.items():
            assert v not in s, "self-loop"
            for u in s:
                assert v in self._adj[u], "asymmetric edge"
            total += len(s)
        assert total == self._degree_sum, "degree_sum drift"
        if self._half_edges is not None:
            assert len(self._half_edges) == self._degree_sum
            for pair, i in self._he_pos.items():
                assert self._half_edges[i] == pair
            for (u, v) in self._half_edges:
                assert v in self._adj[u]
