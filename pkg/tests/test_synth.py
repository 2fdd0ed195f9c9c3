"""Synthetic trajectory generation: lattice thinning, paths, noise, presets."""
import io

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridfence.ingest import write_csv
from gridfence.synth import (
    POINTS_PER_EDGE,
    PRESETS,
    SynthConfig,
    build_dataset,
    generate_graph,
    place_pois,
    preset,
    sample_trajectories,
)


def dataset_bytes(config):
    data, pois = build_dataset(config)
    buf = io.StringIO()
    write_csv(data, buf)
    return buf.getvalue(), pois


def test_generate_graph_no_thinning():
    g = generate_graph(5, 0.0, seed=0)
    assert g.number_of_nodes() == 25
    assert g.number_of_edges() == 2 * 5 * (5 - 1)


@given(st.integers(2, 8), st.floats(0.0, 0.9), st.integers(0, 1000))
@settings(max_examples=25)
def test_generate_graph_always_connected(n, thin_p, seed):
    g = generate_graph(n, thin_p, seed)
    assert nx.is_connected(g)
    assert g.number_of_nodes() == n * n


def test_generate_graph_deterministic_and_thinned():
    a = generate_graph(10, 0.3, seed=5)
    b = generate_graph(10, 0.3, seed=5)
    assert sorted(a.edges()) == sorted(b.edges())
    full = 2 * 10 * 9
    assert a.number_of_edges() < full
    # roughly 30% removed, some retained for connectivity
    assert a.number_of_edges() > full * 0.5


def test_place_pois_basic():
    g = generate_graph(4, 0.0, seed=0)
    pois = place_pois(1, 3, g)
    assert len(pois) == 1
    x, y = pois[0]
    assert 0 <= x <= 3 and 0 <= y <= 3
    assert x == int(x) and y == int(y)  # lattice-aligned


def test_place_pois_exhaustive_and_distinct():
    g = generate_graph(3, 0.0, seed=0)
    pois = place_pois(9, 1, g)
    assert len(set(pois)) == 9
    with pytest.raises(ValueError):
        place_pois(10, 1, g)


def test_place_pois_deterministic():
    g = generate_graph(5, 0.2, seed=2)
    assert place_pois(3, 7, g) == place_pois(3, 7, g)


def test_sample_trajectories_zero_noise_on_lattice_edges():
    g = generate_graph(5, 0.3, seed=1)
    data = sample_trajectories(g, 10, 0.0, seed=2)
    assert len(data) == 10
    edges = [(np.array(u, float), np.array(v, float)) for u, v in g.edges()]
    pts, _ = data.stacked()
    for x, y in pts[:, 1:]:
        # lattice vertices are (row, col); emitted coords are (x=col, y=row)
        p = np.array([y, x])
        dist = min(_point_segment_dist(p, a, b) for a, b in edges)
        assert dist < 1e-9


def _point_segment_dist(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def test_sample_trajectories_distinct_endpoints_and_uids():
    g = generate_graph(4, 0.0, seed=0)
    data = sample_trajectories(g, 6, 0.0, seed=3)
    assert data.uids == tuple(f"u{i}" for i in range(6))
    for tr in data:
        # start and end vertices differ
        assert not np.allclose(tr.points[0, 1:], tr.points[-1, 1:])
        assert np.all(np.diff(tr.t) > 0)


def test_path_length_at_least_manhattan():
    g = generate_graph(6, 0.4, seed=9)
    data = sample_trajectories(g, 20, 0.0, seed=4)
    for tr in data:
        start, end = tr.points[0, 1:], tr.points[-1, 1:]
        manhattan = abs(end[0] - start[0]) + abs(end[1] - start[1])
        hops = (len(tr) - 1) / POINTS_PER_EDGE
        assert hops + 1e-9 >= manhattan


def test_noise_scale_tracks_extent():
    g = generate_graph(5, 0.0, seed=0)
    noisy = sample_trajectories(g, 30, 0.05, seed=5)
    clean = sample_trajectories(g, 30, 0.0, seed=5)
    dn, _ = noisy.stacked()
    dc, _ = clean.stacked()
    resid = dn[:, 1:] - dc[:, 1:]
    scale = np.std(resid)
    assert 0.5 * 0.05 * 4 < scale < 2.0 * 0.05 * 4  # noise_std * (n - 1)


def test_dataset_determinism_bytes():
    cfg = SynthConfig(n=6, thin_p=0.3, m=12, noise_std=0.01, k_pois=2, seed=42)
    b1, p1 = dataset_bytes(cfg)
    b2, p2 = dataset_bytes(cfg)
    assert b1 == b2
    assert p1 == p2


def test_dataset_seed_sensitivity():
    cfg = SynthConfig(n=6, thin_p=0.3, m=12, noise_std=0.01, k_pois=2, seed=42)
    other = SynthConfig(n=6, thin_p=0.3, m=12, noise_std=0.01, k_pois=2, seed=43)
    assert dataset_bytes(cfg)[0] != dataset_bytes(other)[0]


def test_build_dataset_shapes():
    cfg = SynthConfig(n=5, thin_p=0.2, m=1, noise_std=0.0, k_pois=2, seed=0)
    data, pois = build_dataset(cfg)
    assert len(data) == 1
    assert len(pois) == 2


def test_presets_exist_and_have_two_pois():
    assert set(PRESETS) == {"data1", "data2"}
    for name in PRESETS:
        data, pois = preset(name)
        assert len(pois) == 2
        assert len(data) == PRESETS[name].m
    with pytest.raises(ValueError):
        preset("data3")


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(n=1)
    with pytest.raises(ValueError):
        SynthConfig(thin_p=1.0)
    with pytest.raises(ValueError):
        SynthConfig(m=0)
    with pytest.raises(ValueError):
        SynthConfig(noise_std=-0.1)
