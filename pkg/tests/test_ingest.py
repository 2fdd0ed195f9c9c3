"""Parsing, filtering, normalization, and grid discretization."""
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridfence.ingest import (
    EARTH_RADIUS_M,
    CellMatrix,
    GridSpec,
    ParseError,
    PoiCell,
    Trajectory,
    TrajectorySet,
    discretize,
    filter_min_points,
    filter_region,
    latlon_to_planar,
    normalize,
    parse_trajectories,
    poi_to_cell,
    user_cell_counts,
    write_csv,
)


def make_set(user_points):
    """user_points: {uid: [(x, y), ...]} with t = point index."""
    trajs = []
    for uid, pts in user_points.items():
        arr = np.array([[float(i), float(x), float(y)] for i, (x, y) in enumerate(pts)])
        trajs.append(Trajectory(uid, arr))
    return TrajectorySet(tuple(trajs))


coords = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, width=64)


@st.composite
def trajectory_sets(draw, min_users=1, max_users=5, normalized=False):
    n_users = draw(st.integers(min_users, max_users))
    pool = coords if not normalized else st.floats(0.0, 1.0, width=64)
    users = {}
    for u in range(n_users):
        pts = draw(st.lists(st.tuples(pool, pool), min_size=1, max_size=12))
        users[f"u{u}"] = pts
    return make_set(users)


# ---------------------------------------------------------------- parsing

def test_parse_single_user():
    text = "a,0,1.5,2.5\na,1,1.6,2.6\na,2,1.7,2.7\n"
    data = parse_trajectories(io.StringIO(text))
    assert len(data) == 1
    assert len(data.trajectories[0]) == 3
    assert data.trajectories[0].uid == "a"


def test_parse_interleaved_users_sorted_by_time():
    text = "b,5,0,0\na,2,1,1\nb,1,2,2\na,9,3,3\n"
    data = parse_trajectories(io.StringIO(text))
    assert data.uids == ("a", "b") or set(data.uids) == {"a", "b"}
    for tr in data:
        assert np.all(np.diff(tr.t) >= 0)


def test_parse_malformed_row_names_line():
    text = "a,0,1,1\na,1,abc,2\n"
    with pytest.raises(ParseError, match="line 2"):
        parse_trajectories(io.StringIO(text))


def test_parse_header_flag():
    text = "uid,t,x,y\na,0,1,1\n"
    data = parse_trajectories(io.StringIO(text), has_header=True)
    assert len(data) == 1
    with pytest.raises(ParseError):
        parse_trajectories(io.StringIO(text))


def test_parse_empty_input():
    with pytest.raises(ParseError):
        parse_trajectories(io.StringIO(""))


def test_parse_iso8601():
    text = "a,2008-10-23T02:53:04,1,1\na,2008-10-23T02:53:10,2,2\n"
    data = parse_trajectories(io.StringIO(text), time_format="iso8601")
    tr = data.trajectories[0]
    assert tr.t[1] - tr.t[0] == pytest.approx(6.0)


def test_trajectory_rejects_decreasing_time():
    with pytest.raises(ValueError):
        Trajectory("a", np.array([[1.0, 0, 0], [0.0, 1, 1]]))


def test_trajectory_set_rejects_duplicate_uid():
    tr = Trajectory("a", np.array([[0.0, 0, 0]]))
    with pytest.raises(ValueError):
        TrajectorySet((tr, tr))


def test_csv_round_trip_bytes():
    data = make_set({"a": [(0.1, 0.2), (1 / 3, 2 / 3)], "b": [(5.0, -1.25)]})
    buf = io.StringIO()
    write_csv(data, buf)
    again = parse_trajectories(io.StringIO(buf.getvalue()))
    buf2 = io.StringIO()
    write_csv(again, buf2)
    assert buf.getvalue() == buf2.getvalue()
    pts0, _ = data.stacked()
    pts1, _ = again.stacked()
    assert np.array_equal(pts0, pts1)


# ---------------------------------------------------------------- filters

def test_filter_region_keeps_strictly_inside():
    data = make_set({"a": [(0.5, 0.0)], "b": [(2.0, 0.0)]})
    out = filter_region(data, (0.0, 0.0), 1.0)
    assert out.uids == ("a",)
    assert out.n_points == 1


def test_filter_region_boundary_excluded():
    data = make_set({"a": [(1.0, 0.0)]})
    assert len(filter_region(data, (0.0, 0.0), 1.0)) == 0


def test_filter_region_radius_zero_errors():
    data = make_set({"a": [(0.0, 0.0)]})
    with pytest.raises(ValueError):
        filter_region(data, (0.0, 0.0), 0.0)


def test_filter_min_points_threshold():
    data = make_set({"a": [(0, 0)] * 99, "b": [(0, 0)] * 100})
    # uids must differ per point set; same-cell duplicates are fine
    out = filter_min_points(data, 100)
    assert out.uids == ("b",)


def test_filter_min_points_identity_at_one():
    data = make_set({"a": [(0, 0)], "b": [(1, 1), (2, 2)]})
    out = filter_min_points(data, 1)
    assert out.uids == data.uids and out.n_points == data.n_points


# ---------------------------------------------------------------- normalize

def test_normalize_endpoints():
    data = make_set({"a": [(0.0, 0.0), (2.0, 4.0)]})
    out, bbox = normalize(data)
    assert bbox == (0.0, 0.0, 2.0, 4.0)
    pts, _ = out.stacked()
    assert pts[:, 1].tolist() == [0.0, 1.0]
    assert pts[:, 2].tolist() == [0.0, 1.0]


def test_normalize_hand_computed():
    data = make_set({"a": [(1.0, 1.0), (2.0, 3.0), (3.0, 1.0)]})
    out, _ = normalize(data)
    pts, _ = out.stacked()
    assert pts[:, 1].tolist() == [0.0, 0.5, 1.0]


def test_normalize_degenerate_axis_errors():
    data = make_set({"a": [(1.0, 0.0), (1.0, 5.0)]})
    with pytest.raises(ValueError):
        normalize(data)


@given(trajectory_sets())
def test_normalize_bounds_exact(data):
    pts, _ = data.stacked()
    if pts[:, 1].min() == pts[:, 1].max() or pts[:, 2].min() == pts[:, 2].max():
        with pytest.raises(ValueError):
            normalize(data)
        return
    out, _ = normalize(data)
    npts, _ = out.stacked()
    for axis in (1, 2):
        assert npts[:, axis].min() == 0.0
        assert npts[:, axis].max() == 1.0
        assert np.all((npts[:, axis] >= 0.0) & (npts[:, axis] <= 1.0))


# ---------------------------------------------------------------- discretize

def test_discretize_single_point():
    data = make_set({"a": [(0.1, 0.1)]})
    cm = discretize(data, 1)
    expect = np.zeros((2, 2))
    expect[0, 0] = 1.0
    assert np.array_equal(cm.values, expect)


def test_discretize_two_users_peak_normalization():
    data = make_set({"a": [(0.1, 0.1), (0.9, 0.9)], "b": [(0.2, 0.2)]})
    cm = discretize(data, 1)
    assert cm.values[0, 0] == 1.0
    assert cm.values[1, 1] == 0.5
    assert cm.values[0, 1] == 0.0 and cm.values[1, 0] == 0.0


def test_discretize_total_normalization():
    data = make_set({"a": [(0.1, 0.1), (0.9, 0.9)], "b": [(0.2, 0.2)]})
    cm = discretize(data, 1, normalization="total")
    assert cm.values[0, 0] == 1.0
    assert cm.values[1, 1] == 0.5
    single = discretize(make_set({"a": [(0.1, 0.1)], "b": [(0.9, 0.9)]}), 1,
                        normalization="total")
    assert single.values[0, 0] == 0.5


def test_discretize_boundary_point_goes_to_last_cell():
    data = make_set({"a": [(1.0, 1.0)]})
    cm = discretize(data, 2)
    assert cm.values[3, 3] == 1.0


def test_discretize_rejects_out_of_range():
    data = make_set({"a": [(1.5, 0.5)]})
    with pytest.raises(ValueError):
        discretize(data, 1)


def test_row_zero_is_minimum_y():
    data = make_set({"a": [(0.5, 0.01)], "b": [(0.5, 0.99)]})
    cm = discretize(data, 1)
    assert cm.values[0, 1] == 1.0  # low y -> row 0
    assert cm.values[1, 1] == 1.0  # high y -> row 1


@given(trajectory_sets(normalized=True), st.integers(1, 3))
def test_discretize_permutation_invariant(data, d):
    perm = TrajectorySet(tuple(reversed(data.trajectories)))
    assert np.array_equal(discretize(data, d).values, discretize(perm, d).values)


@given(trajectory_sets(normalized=True), st.integers(1, 3))
def test_user_cell_counts_properties(data, d):
    counts = user_cell_counts(data, d)
    assert counts.sum() >= len(data)
    assert counts.max() <= len(data)


def test_user_cell_counts_dedupes_repeat_visits():
    data = make_set({"a": [(0.1, 0.1), (0.12, 0.11), (0.11, 0.13)]})
    counts = user_cell_counts(data, 1)
    assert counts[0, 0] == 1


@given(trajectory_sets(normalized=True), st.integers(1, 2))
def test_refinement_occupancy(data, d):
    """Occupied cells at level d+1, max-pooled 2x2, match level d exactly."""
    coarse = user_cell_counts(data, d) > 0
    fine = user_cell_counts(data, d + 1) > 0
    L = coarse.shape[0]
    pooled = fine.reshape(L, 2, L, 2).any(axis=(1, 3))
    assert np.array_equal(coarse, pooled)


def test_cell_matrix_validation():
    with pytest.raises(ValueError):
        CellMatrix(np.array([[0.0, 1.5], [0.0, 0.0]]), GridSpec(1, (0, 0, 1, 1)))


def test_grid_spec_validation():
    assert GridSpec(3, (0, 0, 1, 1)).L == 8
    with pytest.raises(ValueError):
        GridSpec(0, (0, 0, 1, 1))
    with pytest.raises(ValueError):
        GridSpec(2, (1, 0, 0, 1))


# ---------------------------------------------------------------- poi binning

def test_poi_to_cell_examples():
    assert poi_to_cell((0.3, 0.3), (0, 0, 1, 1), 2) == PoiCell(1, 1)
    assert poi_to_cell((0.0, 0.0), (0, 0, 1, 1), 2) == PoiCell(0, 0)
    with pytest.raises(ValueError):
        poi_to_cell((1.2, 0.5), (0, 0, 1, 1), 2)


def test_poi_to_cell_matches_discretize_binning():
    bbox = (2.0, 10.0, 6.0, 30.0)
    poi = (3.0, 25.0)
    cell = poi_to_cell(poi, bbox, 2)
    data = make_set({"a": [poi]})
    # normalize by hand against the same bbox
    arr = np.array([[0.0, (poi[0] - 2.0) / 4.0, (poi[1] - 10.0) / 20.0]])
    cm = discretize(TrajectorySet((Trajectory("a", arr),)), 2)
    assert cm.values[cell.row, cell.col] == 1.0


# ---------------------------------------------------------------- lat/lon

def test_latlon_scaling():
    lat0, lon0 = 40.0, 116.0
    data = make_set({
        "a": [(lon0, lat0), (lon0 + 0.01, lat0)],
        "b": [(lon0, lat0 + 0.01)],
    })
    planar, (clat, clon) = latlon_to_planar(data)
    pts, _ = planar.stacked()
    dx = pts[1, 1] - pts[0, 1]
    expected_dx = EARTH_RADIUS_M * math.cos(math.radians(clat)) * math.radians(0.01)
    assert dx == pytest.approx(expected_dx, rel=1e-6)
    dy = pts[2, 2] - pts[0, 2]
    assert dy == pytest.approx(EARTH_RADIUS_M * math.radians(0.01), rel=1e-6)


def test_latlon_centered_on_centroid():
    data = make_set({"a": [(116.0, 39.9), (116.2, 40.1)]})
    planar, _ = latlon_to_planar(data)
    pts, _ = planar.stacked()
    assert abs(pts[:, 1].mean()) < 1e-6
    assert abs(pts[:, 2].mean()) < 1e-6
