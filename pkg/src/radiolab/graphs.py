"""Graph representation, BFS layering, and generators.

Nodes are dense 0-based indices; the abstract total order used for
tie-breaking everywhere is plain index order. Graphs are immutable after
construction and safe to share across runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .errors import (
    Disconnected,
    DuplicateEdge,
    IndexOutOfRange,
    InvalidParams,
    NotPerfectEvenSquare,
    OddSize,
    SelfLoop,
)
from .rng import SplitMix64


class Graph:
    """Simple undirected graph: node count plus per-node sorted adjacency."""

    __slots__ = ("n", "adj", "_edges")

    def __init__(self, n: int, adj: Sequence[Sequence[int]]):
        self.n = n
        self.adj = tuple(tuple(sorted(a)) for a in adj)
        self._edges = None

    def edges(self) -> list[tuple[int, int]]:
        """Canonical edge list: u < v, sorted."""
        if self._edges is None:
            self._edges = [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]
        return self._edges

    def m(self) -> int:
        return len(self.edges())

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = bytearray(self.n)
        seen[0] = 1
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for w in self.adj[u]:
                if not seen[w]:
                    seen[w] = 1
                    count += 1
                    queue.append(w)
        return count == self.n

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Graph(n={self.n}, m={self.m()})"


@dataclass(frozen=True)
class LayerAssignment:
    """BFS distances from `root`; `depth` is the eccentricity of the root."""

    root: int
    layer: tuple[int, ...]
    depth: int

    def nodes_at(self, k: int) -> list[int]:
        return [v for v, l in enumerate(self.layer) if l == k]


@dataclass
class LBFamilyDescriptor:
    """Partition metadata for the lower-bound families."""

    n: int
    components: list[list[int]]
    specials: list[int] = field(default_factory=list)

    def component_of(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, comp in enumerate(self.components):
            for v in comp:
                out[v] = i
        return out


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a simple graph, rejecting self-loops, duplicates, and bad indices."""
    adj: list[list[int]] = [[] for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRange(f"edge ({u},{v}) outside [0,{n})")
        if u == v:
            raise SelfLoop(f"self-loop at {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        adj[u].append(v)
        adj[v].append(u)
    return Graph(n, adj)


def bfs_layers(g: Graph, root: int) -> LayerAssignment:
    """BFS distance of every node from `root`; raises Disconnected otherwise."""
    if not (0 <= root < g.n):
        raise IndexOutOfRange(f"root {root} outside [0,{g.n})")
    dist = [-1] * g.n
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    if any(d < 0 for d in dist):
        raise Disconnected("graph is not connected")
    return LayerAssignment(root=root, layer=tuple(dist), depth=max(dist))


def diameter(g: Graph) -> int:
    """Max over all pairs of shortest-path distance (all-sources BFS)."""
    return max(bfs_layers(g, v).depth for v in range(g.n))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_path(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParams("cycle needs n >= 3")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def gen_star(n: int) -> Graph:
    """Star with center 0 and n-1 leaves."""
    return build_graph(n, [(0, i) for i in range(1, n)])


def gen_grid(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise InvalidParams("grid needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return build_graph(rows * cols, edges)


def gen_tree(n: int, seed: int) -> Graph:
    """Uniformly random labeled tree (Pruefer decode over the seeded stream)."""
    if n < 1:
        raise InvalidParams("tree needs n >= 1")
    if n == 1:
        return build_graph(1, [])
    if n == 2:
        return build_graph(2, [(0, 1)])
    rng = SplitMix64(seed)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    edges = []
    # classic decode: repeatedly join the smallest leaf to the next sequence item
    import heapq

    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return build_graph(n, edges)


def gen_random_connected(n: int, p: float, seed: int) -> Graph:
    """Random connected graph: a uniform spanning tree from the seeded stream,
    then every remaining pair added independently with probability p."""
    if n < 1:
        raise InvalidParams("need n >= 1")
    if not (0.0 <= p <= 1.0):
        raise InvalidParams("need 0 <= p <= 1")
    rng = SplitMix64(seed)
    tree = gen_tree(n, rng.next_u64()) if n > 1 else build_graph(1, [])
    present = {tuple(e) for e in tree.edges()}
    edges = list(present)
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in present:
                continue
            if rng.bernoulli(p):
                edges.append((u, v))
    return build_graph(n, edges)


def gen_lb_component(k: int) -> Graph:
    """One lower-bound component: halves A, B of size k/2; a_j joined to the
    first j nodes of B. The set of distinct degrees has size k/2."""
    if k < 2 or k % 2 != 0:
        raise OddSize(f"component size must be even and >= 2, got {k}")
    half = k // 2
    edges = []
    for j in range(1, half + 1):  # a_j is node j-1
        for i in range(1, j + 1):  # b_i is node half + i - 1
            edges.append((j - 1, half + i - 1))
    return build_graph(k, edges)


def _exact_even_sqrt(n: int) -> int | None:
    r = int(round(n ** 0.5))
    for cand in (r - 1, r, r + 1):
        if cand > 0 and cand * cand == n and cand % 2 == 0:
            return cand
    return None


def gen_lb_family(n: int) -> tuple[Graph, LBFamilyDescriptor]:
    """G_n: sqrt(n) components of sqrt(n) nodes each, every cross-component
    pair joined by an edge."""
    k = _exact_even_sqrt(n)
    if k is None:
        raise NotPerfectEvenSquare(f"sqrt({n}) is not an even natural number")
    comp = gen_lb_component(k)
    comps = [list(range(i * k, (i + 1) * k)) for i in range(k)]
    edges = []
    for i in range(k):
        base = i * k
        edges.extend((base + u, base + v) for u, v in comp.edges())
    for i in range(k):
        for j in range(i + 1, k):
            for u in comps[i]:
                for v in comps[j]:
                    edges.append((u, v))
    g = build_graph(n, edges)
    return g, LBFamilyDescriptor(n=n, components=comps)


def _smallest_even_square_at_least(delta: int) -> int:
    i = 1
    while (2 * i) ** 2 < delta:
        i += 1
    return (2 * i) ** 2


def gen_lb_general(delta: int, n: int) -> tuple[Graph, LBFamilyDescriptor]:
    """H_{delta,n}: ceil(n/delta) disjoint copies of G_k (k = smallest >= delta
    with even sqrt) plus one special node per copy adjacent to its whole copy;
    specials joined in a ring (single edge for 2 copies, none for 1)."""
    if delta < 1 or delta >= n:
        raise InvalidParams(f"need 1 <= delta < n, got delta={delta}, n={n}")
    k = _smallest_even_square_at_least(delta)
    copies = -(-n // delta)
    gk, _ = gen_lb_family(k)
    per_copy = k + 1
    total = copies * per_copy
    edges = []
    comps = []
    specials = []
    for c in range(copies):
        base = c * per_copy
        comps.append(list(range(base, base + k)))
        s = base + k
        specials.append(s)
        edges.extend((base + u, base + v) for u, v in gk.edges())
        edges.extend((s, base + u) for u in range(k))
    if copies == 2:
        edges.append((specials[0], specials[1]))
    elif copies > 2:
        for i in range(copies):
            edges.append((specials[i], specials[(i + 1) % copies]))
    g = build_graph(total, edges)
    return g, LBFamilyDescriptor(n=total, components=comps, specials=specials)


# ---------------------------------------------------------------------------
# External interfaces: edge-list text format and DOT export
# ---------------------------------------------------------------------------


def write_edge_list(g: Graph, fp: TextIO) -> None:
    """First line "n m", then one "u v" line per edge, u < v, sorted, LF."""
    edges = g.edges()
    fp.write(f"{g.n} {len(edges)}\n")
    for u, v in edges:
        fp.write(f"{u} {v}\n")


def read_edge_list(fp: TextIO) -> Graph:
    header = fp.readline().split()
    if len(header) != 2:
        raise InvalidParams("edge-list header must be 'n m'")
    n, m = int(header[0]), int(header[1])
    edges = []
    for _ in range(m):
        parts = fp.readline().split()
        if len(parts) != 2:
            raise InvalidParams("edge line must be 'u v'")
        edges.append((int(parts[0]), int(parts[1])))
    return build_graph(n, edges)


def to_dot(g: Graph, name: str = "g") -> str:
    """Best-effort DOT export for visualization; not round-tripped."""
    lines = [f"graph {name} {{"]
    lines.extend(f"  {u} -- {v};" for u, v in g.edges())
    lines.append("}")
    return "\n".join(lines)
