import pytest

from tocp.graphs import (
    FiniteGraph,
    LazyTree,
    build_torus,
    build_tree,
    degree,
    parse_graph_spec,
    tree_vertex_count,
)


def test_torus_smallest_cycle():
    g = build_torus(1, 4)
    assert g.n_vertices == 4
    assert (g.deg == 2).all()
    assert sorted(g.adjacency(0).tolist()) == [1, 3]


def test_torus_degree_is_2d():
    g = build_torus(2, 3)
    assert g.n_vertices == 9
    assert (g.deg == 4).all()


def test_torus_origin_neighbors_are_unit_vectors():
    # enumerate coordinates and reduce mod L
    g = build_torus(3, 5)
    assert g.n_vertices == 125
    got = {g.torus_coord(i) for i in g.adjacency(0)}
    want = set()
    for axis in range(3):
        for sgn in (1, -1):
            c = [0, 0, 0]
            c[axis] = sgn % 5
            want.add(tuple(c))
    assert got == want


def test_torus_rejects_small_side():
    with pytest.raises(ValueError):
        build_torus(2, 2)


def test_torus_coordinate_bijection():
    g = build_torus(3, 4)
    for idx in (0, 1, 17, 63):
        assert g.torus_index(g.torus_coord(idx)) == idx


def test_torus_translation_invariance():
    # relabeling every vertex by a coordinate shift maps adjacency onto itself
    g = build_torus(2, 5)
    shift = (2, 3)

    def relabel(i):
        c = g.torus_coord(i)
        return g.torus_index(tuple((a + s) % 5 for a, s in zip(c, shift)))

    for x in range(g.n_vertices):
        img = sorted(relabel(y) for y in g.adjacency(x))
        assert img == sorted(g.adjacency(relabel(x)).tolist())


@pytest.mark.parametrize("d,L", [(1, 3), (1, 8), (2, 4), (3, 3), (4, 3)])
def test_torus_simple_and_symmetric(d, L):
    build_torus(d, L).validate()


def test_tree_single_vertex():
    g = build_tree(3, 0)
    assert g.n_vertices == 1
    assert g.deg[0] == 0


def test_tree_counts():
    assert build_tree(3, 2).n_vertices == 13
    g = build_tree(4, 3, root="full_degree")
    assert g.n_vertices == 106
    assert g.deg[0] == 5


def test_tree_degrees():
    g = build_tree(3, 2)
    assert degree(g, 0) == 3
    assert degree(g, g.n_vertices - 1) == 1


@pytest.mark.parametrize("n,depth,root", [(2, 3, "son_only"), (3, 2, "son_only"), (3, 3, "full_degree")])
def test_tree_simple_and_symmetric(n, depth, root):
    build_tree(n, depth, root).validate()


def test_tree_son_orientation_partitions_vertices():
    g = build_tree(3, 3)
    seen = []
    interior = 0
    for v in range(g.n_vertices):
        s = g.sons_of(v)
        assert set(s.tolist()) <= set(g.adjacency(v).tolist())
        if len(s):
            interior += 1
            assert len(s) == 3
        seen.extend(s.tolist())
    # every non-root vertex is son of exactly one parent
    assert sorted(seen) == list(range(1, g.n_vertices))
    assert interior == tree_vertex_count(3, 2)


def test_degree_rejects_bad_vertex():
    g = build_torus(1, 4)
    with pytest.raises(ValueError):
        degree(g, 99)


def test_parse_graph_spec():
    g = parse_graph_spec("torus:d=2,L=4")
    assert isinstance(g, FiniteGraph) and g.params == {"d": 2, "L": 4}
    t = parse_graph_spec("tree:n=3,depth=2,root=son_only")
    assert t.params["root"] == "son_only"
    big = parse_graph_spec("tree:n=4,depth=12")
    assert isinstance(big, LazyTree)
    with pytest.raises(ValueError):
        parse_graph_spec("ring:n=3")
    with pytest.raises(ValueError):
        parse_graph_spec("torus")


def test_lazy_tree_matches_materialized():
    lz = LazyTree(3, 4)
    g = build_tree(3, 4)
    assert lz.n_vertices == g.n_vertices
    nf = lz.neighbors_fn()
    for v in (0, 1, 5, 40, g.n_vertices - 1):
        assert sorted(nf(v)) == sorted(g.adjacency(v).tolist())
        assert sorted(lz.sons_of(v)) == sorted(g.sons_of(v).tolist())


def test_lazy_tree_full_root():
    lz = LazyTree(4, 3, root="full_degree")
    g = build_tree(4, 3, root="full_degree")
    assert lz.n_vertices == g.n_vertices == 106
    nf = lz.neighbors_fn()
    for v in (0, 1, 7, 105):
        assert sorted(nf(v)) == sorted(g.adjacency(v).tolist())
