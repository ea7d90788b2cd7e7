"""Seeded synthetic benchmarks: clustered netlists and hotspot thermal maps."""

from __future__ import annotations

import numpy as np

from .ingest import Net, Netlist, ThermalProfile
from .preprocess import Point

# Target shape of the smallest optical benchmark:
# 35 optical nets, 95 pseudo-pins, 60 driver-to-sink links.
CK1_NETS = 35
CK1_PSEUDO_PINS = 95


def block_sites(width: float, height: float, k: int) -> list[Point]:
    """Centres of a k x k grid of placement blocks."""
    return [(width * (i + 0.5) / k, height * (j + 0.5) / k)
            for i in range(k) for j in range(k)]


def _clustered_net(rng, net_id, n_clusters, n_pins, sites, width, height, spread):
    chosen = rng.choice(len(sites), n_clusters, replace=False)
    pins = []
    for k in range(n_pins):
        cx, cy = sites[chosen[k % n_clusters]]
        x = float(np.clip(round(cx + rng.uniform(-spread, spread), 3), 0.0, width))
        y = float(np.clip(round(cy + rng.uniform(-spread, spread), 3), 0.0, height))
        pins.append((x, y))
    order = rng.permutation(n_pins)
    pins = [pins[i] for i in order]
    driver = int(rng.integers(n_pins))
    return Net(net_id, driver, tuple(pins))


def derive_netlist(nets: int, width: float = 20.0, height: float = 20.0, seed: int = 0,
                   pins_min: int = 2, pins_max: int = 6, clusters_max: int = 3,
                   spread: float = 0.3, sites: int = 3) -> Netlist:
    """Netlist whose nets connect tight pin clusters at placement-block sites.

    The chip is divided into ``sites x sites`` blocks. Each net touches
    2..``clusters_max`` distinct blocks and scatters ``pins_min..pins_max``
    pins within ``spread`` mm of the block centres, so clustering turns it
    into an optical net with one pseudo-pin per block.
    """
    if nets < 1:
        raise ValueError("nets must be >= 1")
    if not 2 <= pins_min <= pins_max:
        raise ValueError("need 2 <= pins_min <= pins_max")
    if width <= 0 or height <= 0:
        raise ValueError("chip dimensions must be positive")
    if sites * sites < clusters_max or sites < 2:
        raise ValueError("need sites >= 2 and sites**2 >= clusters_max")
    rng = np.random.default_rng(seed)
    grid = block_sites(width, height, sites)
    out = []
    for i in range(nets):
        n_pins = int(rng.integers(pins_min, pins_max + 1))
        n_clusters = int(rng.integers(2, max(2, min(clusters_max, n_pins)) + 1))
        out.append(_clustered_net(rng, i, n_clusters, n_pins, grid, width, height, spread))
    return Netlist(float(width), float(height), tuple(out))


def ck1_like(seed: int = 0, width: float = 24.0, height: float = 24.0) -> Netlist:
    """35 nets clustering into 95 pseudo-pins (25 three-way nets, 10 two-way)."""
    rng = np.random.default_rng(seed)
    grid = block_sites(width, height, 3)
    out = []
    for i in range(CK1_NETS):
        n_clusters = 3 if i < 25 else 2
        n_pins = n_clusters + int(rng.integers(0, 2))
        out.append(_clustered_net(rng, i, n_clusters, n_pins, grid, width, height, 0.3))
    return Netlist(float(width), float(height), tuple(out))


def gen_thermal(hotspots: int, peak: float, sigma: float, cols: int, rows: int,
                tile: float = 1.0, seed: int = 0, digits: int = 4) -> ThermalProfile:
    """Sum of Gaussian hotspots of height ``peak`` sampled at tile centres."""
    if cols < 1 or rows < 1 or tile <= 0:
        raise ValueError("grid needs cols, rows >= 1 and tile > 0")
    if hotspots < 0 or peak < 0 or sigma <= 0:
        raise ValueError("need hotspots >= 0, peak >= 0, sigma > 0")
    rng = np.random.default_rng(seed)
    xs = (np.arange(cols) + 0.5) * tile
    ys = (np.arange(rows) + 0.5) * tile
    gx, gy = np.meshgrid(xs, ys)
    field = np.zeros((rows, cols))
    for _ in range(hotspots):
        cx = rng.uniform(0, cols * tile)
        cy = rng.uniform(0, rows * tile)
        field += peak * np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / (2 * sigma ** 2))
    field = np.clip(np.round(field, digits), 0.0, None)
    field.setflags(write=False)
    return ThermalProfile(field, float(tile))
