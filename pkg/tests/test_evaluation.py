"""Coverage metrics (UCR/UPCR), overlap, and comparison reports."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridfence.circular import CircularGeofence
from gridfence.evaluation import (
    CoverageReport,
    compare_report,
    coverage_report,
    overlap,
    point_inside,
    ucr,
    upcr,
)
from gridfence.ingest import GridSpec, Trajectory, TrajectorySet
from gridfence.model import DiscreteGeofence

SPEC2 = GridSpec(1, (0.0, 0.0, 1.0, 1.0))
SPEC4 = GridSpec(2, (0.0, 0.0, 1.0, 1.0))


def make_set(user_points):
    trajs = []
    for uid, pts in user_points.items():
        arr = np.array([[float(i), float(x), float(y)] for i, (x, y) in enumerate(pts)])
        trajs.append(Trajectory(uid, arr))
    return TrajectorySet(tuple(trajs))


def fence(cells, spec=SPEC2):
    x = np.zeros((spec.L, spec.L), dtype=np.int8)
    for r, c in cells:
        x[r, c] = 1
    return DiscreteGeofence(x, spec)


def test_point_inside_circular_strict_boundary():
    g = CircularGeofence(0.0, 0.0, 1.0)
    assert not point_inside(g, (1.0, 0.0))
    assert point_inside(g, (0.999, 0.0))


def test_point_inside_discrete():
    g = fence([(0, 0)])
    assert point_inside(g, (0.2, 0.2))
    assert not point_inside(g, (0.7, 0.2))
    full = fence([(r, c) for r in range(2) for c in range(2)])
    for p in ((0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.9, 0.1)):
        assert point_inside(full, p)


def test_ucr_full_grid_is_one():
    data = make_set({"a": [(0.1, 0.9)], "b": [(0.6, 0.2), (0.8, 0.8)]})
    full = fence([(r, c) for r in range(2) for c in range(2)])
    assert ucr(full, data) == 1.0


def test_ucr_counts_users_with_any_hit():
    data = make_set({"a": [(0.1, 0.1), (0.9, 0.9)], "b": [(0.9, 0.1)]})
    g = fence([(0, 0)])  # low-left cell only
    assert ucr(g, data) == 0.5


def test_ucr_upcr_reject_empty_set():
    g = fence([(0, 0)])
    with pytest.raises(ValueError):
        ucr(g, TrajectorySet(()))
    with pytest.raises(ValueError):
        upcr(g, TrajectorySet(()))


def test_upcr_examples():
    data = make_set({"a": [(0.1, 0.1), (0.2, 0.2)], "b": [(0.9, 0.9)]})
    g = fence([(0, 0)])
    mean, std, per_user = upcr(g, data)
    assert dict(per_user) == {"a": 1.0, "b": 0.0}
    assert mean == 0.5
    assert std == 0.5  # population std of {1, 0}
    nothing = fence([])
    mean0, std0, per0 = upcr(nothing, data)
    assert (mean0, std0) == (0.0, 0.0)
    assert all(f == 0.0 for _, f in per0)


def test_upcr_invariant_under_point_duplication():
    base = {"a": [(0.1, 0.1), (0.9, 0.9)], "b": [(0.6, 0.6)]}
    doubled = {uid: pts * 3 for uid, pts in base.items()}
    g = fence([(0, 0)])
    assert upcr(g, make_set(base))[0] == upcr(g, make_set(doubled))[0]


@given(st.data())
def test_adding_cells_never_decreases_coverage(data_strategy):
    pts = data_strategy.draw(
        st.dictionaries(
            st.sampled_from(["a", "b", "c"]),
            st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=6),
            min_size=1,
        )
    )
    data = make_set(pts)
    cells = data_strategy.draw(
        st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=10)
    )
    extra = data_strategy.draw(st.tuples(st.integers(0, 3), st.integers(0, 3)))
    small = fence(cells, SPEC4)
    big = fence(cells | {extra}, SPEC4)
    assert ucr(big, data) >= ucr(small, data)
    m_small, _, pu_small = upcr(small, data)
    m_big, _, pu_big = upcr(big, data)
    assert m_big >= m_small
    for (u1, f1), (u2, f2) in zip(pu_small, pu_big):
        assert u1 == u2 and f2 >= f1


def test_coverage_report_fields():
    data = make_set({"a": [(0.1, 0.1)], "b": [(0.9, 0.9)]})
    rep = coverage_report(fence([(0, 0)]), data)
    assert rep.geofence_kind == "discrete"
    assert rep.ucr == 0.5 and rep.upcr_mean == 0.5
    assert rep.upcr_mean == pytest.approx(np.mean([f for _, f in rep.per_user]))
    circ = coverage_report(CircularGeofence(0.1, 0.1, 0.2), data)
    assert circ.geofence_kind == "circular"


def test_coverage_report_validates_ranges():
    with pytest.raises(ValueError):
        CoverageReport(ucr=1.5, upcr_mean=0.5, upcr_std=0.1, per_user=(),
                       geofence_kind="discrete")


def test_overlap_examples():
    a = fence([(0, 0), (0, 1), (1, 0), (1, 1)], SPEC4)
    same = fence([(0, 0), (0, 1), (1, 0), (1, 1)], SPEC4)
    disjoint = fence([(2, 2), (2, 3), (3, 2), (3, 3)], SPEC4)
    partial = fence([(1, 0), (1, 1), (2, 0), (2, 1)], SPEC4)
    assert overlap(a, same) == {"intersection_cells": 4, "jaccard": 1.0}
    assert overlap(a, disjoint)["jaccard"] == 0.0
    out = overlap(a, partial)
    assert out["intersection_cells"] == 2
    assert out["jaccard"] == pytest.approx(2 / 6)


def test_overlap_symmetric_and_empty_convention():
    a = fence([(0, 0)], SPEC4)
    b = fence([(3, 3), (0, 0)], SPEC4)
    assert overlap(a, b) == overlap(b, a)
    e = fence([], SPEC4)
    assert overlap(e, e)["jaccard"] == 0.0


def test_overlap_rejects_spec_mismatch():
    with pytest.raises(ValueError):
        overlap(fence([(0, 0)], SPEC2), fence([(0, 0)], SPEC4))


def test_compare_report_structure():
    data = make_set({"a": [(0.1, 0.1)], "b": [(0.9, 0.9)], "c": [(0.5, 0.5)]})
    circ = CircularGeofence(0.1, 0.1, 0.15)
    disc = fence([(0, 0), (1, 1)])
    rep = compare_report([circ], [disc], data)
    assert len(rep["circular"]) == 1 and len(rep["discrete"]) == 1
    assert len(rep["scatter"]) == len(data)
    for row in rep["scatter"]:
        assert set(row) == {"uid", "circular", "discrete"}
        assert 0.0 <= row["circular"] <= 1.0
        assert 0.0 <= row["discrete"] <= 1.0
