import numpy as np
import pytest

import pcfractal as pf
from pcfractal.structure import cell_restriction_indices, refinement_indices

from conftest import interval_positions


def test_interval_counts(interval):
    cm = pf.build_level(interval.S, 3)
    assert cm.n_vertices == 9
    assert len(cm.cells) == 8
    assert len(cm.boundary_vertices) == 2


def test_gasket_counts(gasket):
    cm0 = pf.build_level(gasket.S, 0)
    cm2 = pf.build_level(gasket.S, 2)
    assert cm0.n_vertices == 3
    assert cm2.n_vertices == 15
    assert len(cm2.cells) == 9


def test_gasket_vertex_count_formula(gasket):
    # |V_m| = (3^{m+1} + 3) / 2 for the three-map triangle gluing
    for m in range(5):
        cm = pf.build_level(gasket.S, m)
        assert cm.n_vertices == (3 ** (m + 1) + 3) // 2


def test_cells_cover_all_vertices(interval, gasket):
    for bundle, m in [(interval, 4), (gasket, 3)]:
        cm = pf.build_level(bundle.S, m)
        seen = set()
        for idx in cm.cells.values():
            assert len(set(idx)) == bundle.S.n0
            seen.update(idx)
        assert seen == set(range(cm.n_vertices))


def test_representatives_round_trip(gasket):
    cm = pf.build_level(gasket.S, 3)
    for v, (w, p) in enumerate(cm.representatives):
        assert cm.vertex_of_address(w, p) == v


def test_interval_positions_are_dyadic(interval):
    cm = pf.build_level(interval.S, 3)
    xs = np.sort(interval_positions(cm))
    assert np.allclose(xs, np.arange(9) / 8.0)


def test_refinement_fixes_boundary(interval, gasket):
    for bundle in (interval, gasket):
        cm = pf.build_level(bundle.S, 2)
        cm1 = pf.build_level(bundle.S, 3)
        idx = refinement_indices(cm, cm1)
        assert len(np.unique(idx)) == cm.n_vertices
        for p, v in enumerate(cm.boundary_vertices, start=1):
            assert idx[v] == cm1.boundary_vertices[p - 1]


def test_cell_restriction_matches_level1_cells(gasket):
    cm0 = pf.build_level(gasket.S, 0)
    cm1 = pf.build_level(gasket.S, 1)
    for i in range(1, gasket.S.N + 1):
        idx = cell_restriction_indices(cm0, cm1, i)
        assert tuple(idx) == cm1.cells[(i,)]


def test_gluing_deduplication():
    a = pf.SelfSimilarStructure("x", 2, 2, (((1, 2), (2, 1)),))
    b = pf.SelfSimilarStructure(
        "x", 2, 2, (((2, 1), (1, 2)), ((1, 2), (2, 1)))
    )
    assert a.gluings == b.gluings


def test_invalid_structures_raise():
    with pytest.raises(pf.StructureError):
        pf.SelfSimilarStructure("bad", 2, 2, (((1, 2), (3, 1)),))  # cell oob
    with pytest.raises(pf.StructureError):
        pf.SelfSimilarStructure("bad", 2, 2, (((1, 3), (2, 1)),))  # label oob
    with pytest.raises(pf.StructureError):
        pf.SelfSimilarStructure("bad", 2, 2, (((1, 2), (1, 1)),))  # self-gluing
    with pytest.raises(pf.StructureError):
        pf.SelfSimilarStructure("bad", 3, 3, (((1, 2), (2, 1)),))  # disconnected
    with pytest.raises(pf.StructureError):
        pf.SelfSimilarStructure("bad", 2, 3, (((1, 2), (2, 1)),))  # n0 > N, no maps


def test_build_level_negative_rejected(interval):
    with pytest.raises(ValueError):
        pf.build_level(interval.S, -1)
