"""Finite graphs for contact-process simulation.

Two families are supported: periodic tori approximating the integer
lattice of a given dimension, and depth-truncated rooted regular trees.
Vertices are dense integer indices so simulation state can live in flat
arrays.  Adjacency is stored as a padded matrix ``nbr`` of shape
``(n_vertices, max_degree)``; unused slots hold the sentinel index
``n_vertices`` which simulation engines map to a phantom vertex whose
state is permanently zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FiniteGraph",
    "LazyTree",
    "build_torus",
    "build_tree",
    "degree",
    "parse_graph_spec",
    "tree_vertex_count",
]

#: Materializing more vertices than this is refused; use LazyTree instead.
MAX_MATERIALIZED_VERTICES = 2_000_000


@dataclass
class FiniteGraph:
    """Immutable simple undirected graph with padded adjacency.

    Attributes
    ----------
    n_vertices : int
        Number of vertices; valid ids are ``0 .. n_vertices - 1``.
    nbr : ndarray of int64, shape (n_vertices, max_degree)
        ``nbr[x, :deg[x]]`` are the sorted neighbours of ``x``; remaining
        slots equal ``n_vertices`` (phantom padding).
    deg : ndarray of int64, shape (n_vertices,)
        Degree of each vertex.
    kind : str
        ``"torus"``, ``"tree"`` or ``"custom"``.
    params : dict
        Construction parameters (``d``/``L`` for tori, ``n``/``depth``/
        ``root`` for trees).
    sons : ndarray or None
        For trees, padded matrix of oriented son lists (same layout as
        ``nbr``); ``None`` otherwise.
    son_deg : ndarray or None
        Number of sons per vertex (trees only).

    Graphs must not be mutated after construction; everything downstream
    shares them.
    """

    n_vertices: int
    nbr: np.ndarray
    deg: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    sons: np.ndarray | None = None
    son_deg: np.ndarray | None = None

    def adjacency(self, x: int) -> np.ndarray:
        """Sorted neighbour ids of vertex ``x``."""
        return self.nbr[x, : self.deg[x]]

    def sons_of(self, x: int) -> np.ndarray:
        if self.sons is None:
            raise ValueError("graph has no son orientation")
        return self.sons[x, : self.son_deg[x]]

    def neighbors_fn(self):
        """Return a callable ``x -> list of neighbour ids`` (for set engines)."""
        nbr, deg = self.nbr, self.deg

        def fn(x: int):
            return nbr[x, : deg[x]]

        return fn

    def is_regular(self) -> bool:
        return bool((self.deg == self.deg[0]).all())

    # -- torus coordinate bijection --------------------------------------
    # index = sum_i c_i * L**i with coordinates c_i in 0..L-1 (axis 0 is the
    # least significant digit); vertex 0 is the origin.

    def torus_coord(self, idx: int) -> tuple[int, ...]:
        if self.kind != "torus":
            raise ValueError("not a torus")
        d, L = self.params["d"], self.params["L"]
        out = []
        for _ in range(d):
            out.append(idx % L)
            idx //= L
        return tuple(out)

    def torus_index(self, coord) -> int:
        if self.kind != "torus":
            raise ValueError("not a torus")
        d, L = self.params["d"], self.params["L"]
        if len(coord) != d:
            raise ValueError("coordinate dimension mismatch")
        idx = 0
        for i in reversed(range(d)):
            idx = idx * L + (coord[i] % L)
        return idx

    def validate(self) -> None:
        """Assert simplicity and symmetry (cheap exhaustive check)."""
        V = self.n_vertices
        seen = set()
        for x in range(V):
            adj = self.adjacency(x)
            if len(adj) != len(set(adj.tolist())):
                raise AssertionError(f"duplicate neighbours at {x}")
            if (adj == x).any():
                raise AssertionError(f"self-loop at {x}")
            if (adj < 0).any() or (adj >= V).any():
                raise AssertionError(f"neighbour out of range at {x}")
            for y in adj:
                seen.add((x, int(y)))
        for x, y in seen:
            if (y, x) not in seen:
                raise AssertionError(f"asymmetric edge ({x},{y})")


def _pad_adjacency(adj_lists: list[list[int]], n: int):
    deg = np.array([len(a) for a in adj_lists], dtype=np.int64)
    width = int(deg.max()) if n else 0
    nbr = np.full((n, max(width, 1)), n, dtype=np.int64)
    for x, a in enumerate(adj_lists):
        nbr[x, : len(a)] = sorted(a)
    return nbr, deg


def build_torus(d: int, L: int) -> FiniteGraph:
    """Periodic torus (Z/L)^d with L**d vertices, all of degree 2d.

    Parameters
    ----------
    d : int
        Dimension, at least 1.  The graph degree is ``2 * d``.
    L : int
        Side length, at least 3.  ``L = 2`` would identify the two
        neighbours along an axis and create a multi-edge, so it is
        rejected.

    Returns
    -------
    FiniteGraph
        Vertex 0 is the origin; the index/coordinate bijection is
        mixed-radix with axis 0 least significant.
    """
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    if L < 3:
        raise ValueError("side length L must be >= 3 (L=2 creates multi-edges)")
    V = L**d
    if V > MAX_MATERIALIZED_VERTICES:
        raise ValueError(f"torus with {V} vertices exceeds materialization limit")
    idx = np.arange(V, dtype=np.int64)
    nbr = np.empty((V, 2 * d), dtype=np.int64)
    stride = 1
    for axis in range(d):
        c = (idx // stride) % L
        up = idx + ((c + 1) % L - c) * stride
        down = idx + ((c - 1) % L - c) * stride
        nbr[:, 2 * axis] = up
        nbr[:, 2 * axis + 1] = down
        stride *= L
    nbr.sort(axis=1)
    deg = np.full(V, 2 * d, dtype=np.int64)
    return FiniteGraph(V, nbr, deg, kind="torus", params={"d": d, "L": L})


def tree_vertex_count(n: int, depth: int, root: str = "son_only") -> int:
    """Vertex count of the truncated tree without building it."""
    r = n if root == "son_only" else n + 1
    if depth == 0:
        return 1
    total = 1
    level = r
    for _ in range(depth):
        total += level
        level *= n
    return total


def build_tree(n: int, depth: int, root: str = "son_only") -> FiniteGraph:
    """Depth-truncated rooted tree with son orientation.

    Parameters
    ----------
    n : int
        Branching number, at least 2: every interior non-root vertex has
        one parent and ``n`` sons.
    depth : int
        Number of edge levels below the root; ``depth = 0`` is a single
        vertex.
    root : {"son_only", "full_degree"}
        ``"son_only"``: the root has ``n`` sons (degree ``n``), matching
        the oriented branching construction.  ``"full_degree"``: the root
        has ``n + 1`` sons so its degree equals the regular-tree degree
        ``n + 1``.

    Vertices are numbered in level order with the root at 0.  Leaves at
    the truncation depth have no sons.
    """
    if n < 2:
        raise ValueError("branching number n must be >= 2")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if root not in ("son_only", "full_degree"):
        raise ValueError(f"unknown root variant {root!r}")
    V = tree_vertex_count(n, depth, root)
    if V > MAX_MATERIALIZED_VERTICES:
        raise ValueError(
            f"tree with {V} vertices exceeds materialization limit; use LazyTree"
        )
    adj: list[list[int]] = [[] for _ in range(V)]
    sons: list[list[int]] = [[] for _ in range(V)]
    nxt = 1
    frontier = [0]
    for _level in range(depth):
        new_frontier = []
        for v in frontier:
            k = (n + 1) if (v == 0 and root == "full_degree") else n
            for _ in range(k):
                adj[v].append(nxt)
                adj[nxt].append(v)
                sons[v].append(nxt)
                new_frontier.append(nxt)
                nxt += 1
        frontier = new_frontier
    assert nxt == V
    nbr, deg = _pad_adjacency(adj, V)
    snbr, sdeg = _pad_adjacency(sons, V)
    return FiniteGraph(
        V,
        nbr,
        deg,
        kind="tree",
        params={"n": n, "depth": depth, "root": root},
        sons=snbr,
        son_deg=sdeg,
    )


def degree(graph: FiniteGraph, x: int) -> int:
    """Degree of vertex ``x``."""
    if not (0 <= x < graph.n_vertices):
        raise ValueError(f"vertex {x} out of range")
    return int(graph.deg[x])


class LazyTree:
    """Truncated rooted tree addressed arithmetically, never materialized.

    Supports the same level-order numbering as :func:`build_tree` but
    computes neighbours on demand, so trees with tens of millions of
    vertices can back set-valued processes that only ever touch a few
    thousand of them.
    """

    kind = "tree_lazy"

    def __init__(self, n: int, depth: int, root: str = "son_only"):
        if n < 2:
            raise ValueError("branching number n must be >= 2")
        if depth < 1:
            raise ValueError("LazyTree needs depth >= 1")
        self.n = n
        self.depth = depth
        self.root = root
        r = n if root == "son_only" else n + 1
        self.root_sons = r
        # level_start[l] = id of first vertex at level l
        starts = [0, 1]
        width = r
        for _ in range(1, depth + 1):
            starts.append(starts[-1] + width)
            width *= n
        self.level_start = starts  # length depth + 2
        self.n_vertices = starts[depth + 1]
        self.params = {"n": n, "depth": depth, "root": root}

    def depth_of(self, v: int) -> int:
        if v == 0:
            return 0
        # level_start is short (depth + 2 entries); linear scan is fine
        lvl = 1
        while self.level_start[lvl + 1] <= v:
            lvl += 1
        return lvl

    def parent(self, v: int) -> int:
        if v == 0:
            raise ValueError("root has no parent")
        lvl = self.depth_of(v)
        j = v - self.level_start[lvl]
        if lvl == 1:
            return 0
        return self.level_start[lvl - 1] + j // self.n

    def sons_of(self, v: int) -> list[int]:
        lvl = self.depth_of(v)
        if lvl >= self.depth:
            return []
        if v == 0:
            return list(range(1, 1 + self.root_sons))
        j = v - self.level_start[lvl]
        base = self.level_start[lvl + 1] + j * self.n
        return list(range(base, base + self.n))

    def neighbors_fn(self):
        def fn(v: int):
            out = self.sons_of(v)
            if v != 0:
                out.append(self.parent(v))
            return out

        return fn


def parse_graph_spec(spec: str):
    """Parse a graph description string.

    Formats: ``"torus:d=2,L=32"`` and ``"tree:n=3,depth=10,root=son_only"``
    (``root`` optional, ``son_only`` or ``full``).  Trees too large to
    materialize come back as :class:`LazyTree`.
    """
    try:
        family, _, rest = spec.partition(":")
        kv = dict(item.split("=") for item in rest.split(",") if item)
        if family == "torus":
            return build_torus(int(kv["d"]), int(kv["L"]))
        if family == "tree":
            n = int(kv["n"])
            depth = int(kv["depth"])
            root = kv.get("root", "son_only")
            if root == "full":
                root = "full_degree"
            if tree_vertex_count(n, depth, root) > MAX_MATERIALIZED_VERTICES:
                return LazyTree(n, depth, root)
            return build_tree(n, depth, root)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed graph spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown graph family {family!r}")
