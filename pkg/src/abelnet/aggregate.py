"""Rotor aggregation on a square patch of Z^2 and P2 graymap output."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import AbelnetError, Network
from .engine import run
from .processors import RotorSpec, SinkCounterSpec, build

DIRECTIONS = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


class GridTooSmall(AbelnetError):
    pass


def default_radius(n: int) -> int:
    return int(math.ceil(1.3 * math.sqrt(max(n, 1) / math.pi))) + 3


def grid_network(radius: int, order: str = "NESW") -> Network:
    """Absorbing rotors on ``max(|x|, |y|) <= radius``; a ring of sinks just outside."""
    order = order.upper()
    if sorted(order) != sorted("NESW"):
        raise ValueError(f"rotor order must be a permutation of NESW, got {order!r}")
    inside = [(x, y) for y in range(radius, -radius - 1, -1) for x in range(-radius, radius + 1)]
    ring = [
        (x, y)
        for y in range(radius + 1, -radius - 2, -1)
        for x in range(-radius - 1, radius + 2)
        if max(abs(x), abs(y)) == radius + 1
    ]
    edges, procs = [], {}
    for x, y in inside:
        ids = []
        for d in order:
            dx, dy = DIRECTIONS[d]
            eid = (x, y, d)
            edges.append(((x, y), (x + dx, y + dy), eid))
            ids.append(eid)
        procs[(x, y)] = build(RotorSpec(tuple(ids), absorbing=True))
    sink = build(SinkCounterSpec(counting=True))
    for site in ring:
        procs[site] = sink
    return Network(inside + ring, edges, procs)


@dataclass
class Aggregate:
    n: int
    radius: int
    order: str
    visits: dict  # site -> letters processed there
    states: dict  # site -> final rotor state
    steps: int

    @property
    def visited(self) -> set:
        return {s for s, k in self.visits.items() if k > 0}

    @property
    def outradius(self) -> float:
        return max((math.hypot(*s) for s in self.visited), default=0.0)

    @property
    def inradius(self) -> float:
        """Distance from the origin to the nearest site not visited."""
        gaps = [math.hypot(*s) for s, k in self.visits.items() if k == 0]
        return min(gaps, default=float(self.radius + 1))

    def ratio(self) -> float:
        return self.outradius / self.inradius if self.inradius else float("inf")

    def cell(self, site) -> int:
        """0 unvisited, 1 absorbed only (one letter), 2 + rotor state otherwise."""
        k = self.visits.get(site, 0)
        if k == 0:
            return 0
        if k == 1:
            return 1
        return 2 + self.states[site]

    def raster(self) -> list:
        vis = self.visited
        if not vis:
            return []
        xs = [s[0] for s in vis]
        ys = [s[1] for s in vis]
        return [
            [self.cell((x, y)) for x in range(min(xs), max(xs) + 1)]
            for y in range(max(ys), min(ys) - 1, -1)
        ]

    def legend(self) -> str:
        parts = ["0=unvisited", "1=absorbed"] + [f"{2 + k}={d}" for k, d in enumerate(self.order)]
        return " ".join(parts)

    def pgm(self) -> str:
        rows = self.raster()
        h = len(rows)
        w = len(rows[0]) if rows else 0
        lines = [
            "P2",
            f"# rotor aggregation n={self.n} order={self.order}",
            f"# legend: {self.legend()} (rotor state = next direction served)",
            f"{w} {h}",
            str(1 + len(self.order)),
        ]
        lines += [" ".join(str(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"


def rotor_aggregation(n: int, radius: int | None = None, order: str = "NESW", scheduler: str = "fifo") -> Aggregate:
    """Drop ``n`` letters at the origin of an all-absorbing rotor grid and run to completion."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    radius = default_radius(n) if radius is None else radius
    net = grid_network(radius, order)
    out = run(net, {((0, 0), 0): n}, None, scheduler, budget=10**9, detect_cycles=False)
    if not out.halted:
        raise AbelnetError(f"aggregation did not halt: {out.status}")
    visits, states = {}, {}
    for site, proc, state in zip(net.vertices, net.processors, out.final.states):
        k = out.odometer[net.offsets[net.vertex_index[site]]]
        if max(abs(site[0]), abs(site[1])) > radius:
            if k:
                raise GridTooSmall(f"a letter reached the boundary at {site}; use a radius larger than {radius}")
            continue
        visits[site] = k
        states[site] = state
    return Aggregate(n, radius, order.upper(), visits, states, out.steps)
