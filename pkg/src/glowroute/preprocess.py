"""Pin clustering and optical netlist extraction.

Pins of each net are grouped by single-linkage agglomerative clustering
under Manhattan distance. Cutting the tree at the critical length leaves
clusters that are at least ``l_crit`` apart; each cluster is represented by
its coordinate-wise median (a pseudo-pin) and the cluster holding the
electrical driver drives one optical link per remaining cluster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ingest import Net, Netlist

Point = tuple[float, float]


def manhattan(p: Point, q: Point) -> float:
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree over ``n_leaves`` pins; merge ``k`` creates node ``n_leaves + k``."""

    n_leaves: int
    merges: tuple[Merge, ...]

    @property
    def root(self) -> int:
        return self.n_leaves + len(self.merges) - 1 if self.merges else 0

    def height(self, node: int) -> float:
        if node < self.n_leaves:
            return 0.0
        return self.merges[node - self.n_leaves].height

    def children(self, node: int) -> tuple[int, int] | None:
        if node < self.n_leaves:
            return None
        m = self.merges[node - self.n_leaves]
        return m.left, m.right

    def leaves(self, node: int) -> list[int]:
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            kids = self.children(v)
            if kids is None:
                out.append(v)
            else:
                stack.extend(kids)
        return sorted(out)


def cluster_dendrogram(pins: Sequence[Point]) -> Dendrogram:
    """Single-linkage tree (Kruskal over all pin pairs, ties by index pair)."""
    n = len(pins)
    if n == 0:
        raise ValueError("need at least one pin")
    edges = sorted(
        (manhattan(pins[i], pins[j]), i, j) for i in range(n) for j in range(i + 1, n))
    parent = list(range(n))
    node_of = list(range(n))       # union-find root -> current tree node
    size = [1] * n
    merges: list[Merge] = []

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for dist, i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        a, b = sorted((node_of[ri], node_of[rj]))
        if size[ri] < size[rj]:
            ri, rj = rj, ri
        parent[rj] = ri
        size[ri] += size[rj]
        merges.append(Merge(a, b, dist, size[ri]))
        node_of[ri] = n + len(merges) - 1
        if len(merges) == n - 1:
            break
    return Dendrogram(n, tuple(merges))


def extract_clusters(d: Dendrogram, l_crit: float) -> list[list[int]]:
    """Depth-first cut: keep the maximal subtrees whose merge height is below ``l_crit``."""
    if l_crit <= 0:
        raise ValueError("l_crit must be positive")
    clusters = []
    stack = [d.root]
    while stack:
        node = stack.pop()
        if node < d.n_leaves or d.height(node) < l_crit:
            clusters.append(d.leaves(node))
        else:
            stack.extend(d.children(node))
    return sorted(clusters)


def geometric_median(points: Sequence[Point]) -> Point:
    """Coordinate-wise L1 median; even counts take the lower middle value."""
    if not points:
        raise ValueError("need at least one point")
    k = (len(points) - 1) // 2
    xs = sorted(p[0] for p in points)
    ys = sorted(p[1] for p in points)
    return xs[k], ys[k]


@dataclass(frozen=True)
class PseudoPin:
    position: Point
    members: tuple[int, ...]   # indices into the electrical net's pins


@dataclass(frozen=True)
class OpticalNet:
    net_id: int
    driver: PseudoPin
    sinks: tuple[PseudoPin, ...]

    @property
    def pin_count(self) -> int:
        return 1 + len(self.sinks)


@dataclass(frozen=True)
class Link:
    link_id: int
    net_id: int
    driver_pos: Point
    sink_pos: Point
    hpwl: float


@dataclass(frozen=True)
class OpticalNetlist:
    width: float
    height: float
    nets: tuple[OpticalNet, ...]
    links: tuple[Link, ...]

    @property
    def pin_max(self) -> int:
        return max((n.pin_count for n in self.nets), default=0)

    def links_of(self, net_id: int) -> list[Link]:
        return [l for l in self.links if l.net_id == net_id]


def _pseudo(net: Net, members) -> PseudoPin:
    members = tuple(sorted(members))
    return PseudoPin(geometric_median([net.pins[i] for i in members]), members)


def cluster_net(net: Net, l_crit: float) -> tuple[PseudoPin, list[PseudoPin]]:
    """Driver pseudo-pin and sink pseudo-pins of one net.

    Sink clusters whose median falls within ``l_crit`` of the driver median
    are folded into the driver cluster (repeated until stable), so every
    remaining driver-to-sink distance is at least ``l_crit``.
    """
    clusters = extract_clusters(cluster_dendrogram(net.pins), l_crit)
    drv_members = next(c for c in clusters if net.driver in c)
    sinks = [c for c in clusters if c is not drv_members]
    driver = _pseudo(net, drv_members)
    while True:
        near = [c for c in sinks
                if manhattan(_pseudo(net, c).position, driver.position) < l_crit]
        if not near:
            break
        members = list(driver.members)
        for c in near:
            members.extend(c)
        sinks = [c for c in sinks if c not in near]
        driver = _pseudo(net, members)
    sink_pins = [_pseudo(net, c) for c in sinks]
    sink_pins.sort(key=lambda p: (p.position, sorted(net.pins[i] for i in p.members)))
    return driver, sink_pins


def build_optical_netlist(netlist: Netlist, l_crit: float) -> tuple[OpticalNetlist, list[int]]:
    """Optical netlist plus the ids of nets that stay fully electrical."""
    onets: list[OpticalNet] = []
    links: list[Link] = []
    residual: list[int] = []
    for net in netlist.nets:
        driver, sinks = cluster_net(net, l_crit)
        if not sinks:
            residual.append(net.id)
            continue
        onets.append(OpticalNet(net.id, driver, tuple(sinks)))
        for s in sinks:
            links.append(Link(len(links), net.id, driver.position, s.position,
                              manhattan(driver.position, s.position)))
    return OpticalNetlist(netlist.width, netlist.height, tuple(onets), tuple(links)), residual
