"""Synthetic trajectory datasets over thinned lattice street networks.

Generation runs in four steps: build an n x n grid graph and thin its edges
(keeping it connected), place POIs on lattice vertices, sample origin to
destination paths walked as randomized shortest paths, and emit the noisy
interpolated points as a TrajectorySet. Everything is driven by one seed, so
a config reproduces its dataset byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .ingest import Trajectory, TrajectorySet

POINTS_PER_EDGE = 4


@dataclass(frozen=True)
class SynthConfig:
    n: int = 9
    thin_p: float = 0.3
    m: int = 60
    noise_std: float = 0.01
    k_pois: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 <= self.thin_p < 1.0:
            raise ValueError("thin_p must be in [0, 1)")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.k_pois < 1:
            raise ValueError("k_pois must be >= 1")


# Corridor-style two-POI scenes. The generator procedure is fixed; these
# particular constants are this package's own tuning.
PRESETS: dict[str, SynthConfig] = {
    "data1": SynthConfig(n=9, thin_p=0.45, m=60, noise_std=0.012, k_pois=2, seed=11),
    "data2": SynthConfig(n=9, thin_p=0.55, m=80, noise_std=0.018, k_pois=2, seed=23),
}


def generate_graph(n: int, thin_p: float, seed: int) -> nx.Graph:
    """n x n lattice with edges randomly thinned, connectivity preserved.

    Edges are visited in a seeded random order; each is removed with
    probability thin_p unless the removal would disconnect the graph.
    """
    g = nx.grid_2d_graph(n, n)
    rng = np.random.default_rng(seed)
    edges = sorted(g.edges())
    order = rng.permutation(len(edges))
    for idx in order:
        u, v = edges[idx]
        if rng.random() < thin_p:
            g.remove_edge(u, v)
            if not nx.is_connected(g):
                g.add_edge(u, v)
    return g


def place_pois(k: int, seed: int, graph: nx.Graph) -> list[tuple[float, float]]:
    """k distinct lattice vertices, uniform without replacement."""
    nodes = sorted(graph.nodes())
    if k > len(nodes):
        raise ValueError(f"cannot place {k} POIs on {len(nodes)} vertices")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(nodes), size=k, replace=False)
    # nodes are (row, col); emitted positions are (x, y) = (col, row) to
    # match the trajectory coordinate convention
    return [(float(nodes[i][1]), float(nodes[i][0])) for i in picks]


def _random_shortest_path(
    graph: nx.Graph, origin, dest, rng: np.random.Generator
) -> list:
    """Walk from origin descending the BFS distance to dest, random ties."""
    dist = nx.single_source_shortest_path_length(graph, dest)
    path = [origin]
    cur = origin
    while cur != dest:
        nxt = sorted(v for v in graph.neighbors(cur) if dist[v] == dist[cur] - 1)
        cur = nxt[int(rng.integers(len(nxt)))]
        path.append(cur)
    return path


def sample_trajectories(
    graph: nx.Graph, m: int, noise_std: float, seed: int
) -> TrajectorySet:
    """m origin-destination paths, interpolated and noise-perturbed.

    Each path is interpolated at POINTS_PER_EDGE points per unit edge, then
    perturbed by isotropic Gaussian noise. noise_std is expressed in
    normalized units (fraction of the lattice extent), hence the (n-1)
    scaling to lattice units here.
    """
    if not nx.is_connected(graph):
        raise ValueError("graph must be connected")
    nodes = sorted(graph.nodes())
    extent = max(max(r, c) for r, c in nodes)
    rng = np.random.default_rng(seed)
    trajs = []
    for uid in range(m):
        o = d = 0
        while o == d:
            o, d = rng.integers(len(nodes), size=2)
        path = _random_shortest_path(graph, nodes[o], nodes[d], rng)
        coords = []
        for (r0, c0), (r1, c1) in zip(path, path[1:]):
            for s in range(POINTS_PER_EDGE):
                f = s / POINTS_PER_EDGE
                coords.append((c0 + f * (c1 - c0), r0 + f * (r1 - r0)))
        coords.append((path[-1][1], path[-1][0]))
        pts = np.array(coords, dtype=float)
        # drawn unconditionally so the path sequence is identical across
        # noise settings under one seed (scale 0 adds exact zeros)
        pts += rng.normal(0.0, noise_std * extent, size=pts.shape)
        arr = np.column_stack([np.arange(len(pts), dtype=float), pts])
        trajs.append(Trajectory(f"u{uid}", arr))
    return TrajectorySet(tuple(trajs))


def build_dataset(config: SynthConfig) -> tuple[TrajectorySet, list[tuple[float, float]]]:
    """Compose graph -> POIs -> trajectories under one master seed."""
    s_graph, s_poi, s_traj = np.random.SeedSequence(config.seed).generate_state(3)
    graph = generate_graph(config.n, config.thin_p, int(s_graph))
    pois = place_pois(config.k_pois, int(s_poi), graph)
    data = sample_trajectories(graph, config.m, config.noise_std, int(s_traj))
    return data, pois


def preset(name: str) -> tuple[TrajectorySet, list[tuple[float, float]]]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return build_dataset(PRESETS[name])
