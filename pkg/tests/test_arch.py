import json

import pytest

from qlayout.arch import (
    ArchError,
    CouplingGraph,
    arch_from_spec,
    as_line,
    build_grid,
    build_line,
    build_sycamore_like,
    is_matching,
    line_parity_classes,
    load_arch,
    parse_arch,
)


def test_line_indexing():
    g = build_line(5)
    assert g.edges == ((0, 1), (1, 2), (2, 3), (3, 4))
    assert g.kind == "line"
    assert g.edge_between(3, 2) == 2
    assert g.edge_between(0, 2) is None
    assert g.adjacent_edges[1] == (0, 2)


def test_grid_edge_count():
    assert build_grid(2, 3).edge_count == 7


@pytest.mark.parametrize("rows, cols", [(2, 2), (3, 4), (4, 4)])
def test_sycamore_like_is_sparse_and_connected(rows, cols):
    g = build_sycamore_like(rows, cols)
    assert g.qubit_count == rows * cols
    assert max(g.degree(p) for p in range(g.qubit_count)) <= 4
    # every inner row pair is joined by 2*cols - 1 couplers
    assert g.edge_count == (rows - 1) * (2 * cols - 1)


@pytest.mark.parametrize(
    "edges",
    [((0, 0),), ((0, 1), (1, 0)), ((0, 1), (2, 3)), ((0, 7),)],
)
def test_invalid_graphs(edges):
    with pytest.raises(ArchError):
        CouplingGraph(4, edges)


def test_spec_strings(tmp_path):
    assert arch_from_spec("line:3").edge_count == 2
    assert arch_from_spec("grid:2x2").edge_count == 4
    assert arch_from_spec("sycamore:3x4").qubit_count == 12
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"qubits": 3, "edges": [[0, 1], [1, 2], [2, 0]]}))
    assert arch_from_spec(f"file:{path}").kind == "custom"
    for bad in ("line", "ring:4", "grid:2by3", "line:x"):
        with pytest.raises(ArchError):
            arch_from_spec(bad)


def test_file_path_graph_becomes_a_line(fixtures):
    assert load_arch(fixtures / "line5.json") == build_line(5)
    g = parse_arch({"qubits": 4, "edges": [[2, 0], [0, 3], [3, 1]]})
    assert g.kind == "line" and g.labels == (1, 3, 0, 2)


def test_as_line_rejects_non_paths():
    assert as_line(4, [(0, 1), (0, 2), (0, 3)]) is None
    assert as_line(3, [(0, 1), (1, 2), (2, 0)]) is None


def test_matching_and_parity():
    g = build_line(5)
    assert is_matching(g, [0, 2])
    assert not is_matching(g, [0, 1])
    with pytest.raises(ArchError):
        is_matching(g, [9])
    even, odd = line_parity_classes(g)
    assert even == {0, 2} and odd == {1, 3}
    with pytest.raises(ArchError):
        line_parity_classes(build_grid(2, 2))
