"""Random instances: networks from every builtin family, complete executions,
monotone tables and toppling systems.  Everything takes a ``random.Random``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .core import Network, apply_word, is_complete, step
from .engine import run
from .optimize import MonotoneProgram, TopplingSystem
from .processors import (
    BootstrapSpec,
    OilWaterSpec,
    RotorSpec,
    SandpileSpec,
    SinkCounterSpec,
    TopplingExtendedSpec,
    UnaryTapeSpec,
    build,
    rotor_pair_agents,
)

FAMILIES = ("sandpile", "toppling", "bootstrap", "rotor", "tape", "unary_mix", "oil_water", "mobile_agent")
UNARY = ("sandpile", "toppling", "bootstrap", "rotor", "tape")


@dataclass
class Instance:
    family: str
    net: Network
    x: tuple
    q: tuple


def _graph(rng, n, closed=False):
    """Random multigraph on vertices 0..n-1 plus sink ``"s"``; every vertex reaches the sink.

    With ``closed`` the sink gets no edges and the vertices form a ring
    instead, so many inputs never halt.
    """
    edges = []
    count = 0

    def add(a, b):
        nonlocal count
        edges.append((a, b, f"e{count}"))
        count += 1

    # a random spanning in-forest towards the sink guarantees reachability
    order = list(range(n))
    rng.shuffle(order)
    for k, v in enumerate(order):
        if closed:
            add(v, order[(k + 1) % n])
        else:
            add(v, "s" if k == 0 or rng.random() < 0.25 else order[rng.randrange(k)])
    for _ in range(rng.randint(0, 2 * n)):
        add(rng.randrange(n), rng.randrange(n))
    return edges


def _out(edges, v):
    return [e for a, _, e in edges if a == v]


def _unary_spec(kind, rng, out):
    d = len(out)
    if kind == "sandpile":
        return SandpileSpec(tuple(out))
    if kind == "toppling":
        return TopplingExtendedSpec(tuple(out), threshold=rng.randint(d, d + 2))
    if kind == "bootstrap":
        return BootstrapSpec(rng.randint(1, 3), tuple(out))
    if kind == "rotor":
        order = list(out) * rng.randint(1, 2)
        rng.shuffle(order)
        return RotorSpec(tuple(order), absorbing=rng.random() < 0.3)
    if kind == "tape":
        # each edge appears once per period; the period is at least as long as the outdegree
        period = [[] for _ in range(rng.randint(d, d + 2))]
        for e in out:
            period[rng.randrange(len(period))].append(e)
        pre = [[e] for e in rng.sample(out, rng.randint(0, 1))] + [[] for _ in range(rng.randint(0, 2))]
        return UnaryTapeSpec(tuple(map(tuple, pre + period)), preperiod=len(pre), out_edges=tuple(out))
    raise ValueError(kind)


def _initial_state(proc, rng):
    states = proc.sample_states(rng, 16)
    return rng.choice(states)


def random_network(
    rng: random.Random,
    family: str | None = None,
    max_vertices: int = 8,
    max_input: int = 20,
    closed: bool = False,
) -> Instance:
    """A random network (at most ``max_vertices`` vertices including the sink).

    ``closed`` cuts every path to the sink (see :func:`_graph`).
    """
    family = family or rng.choice(FAMILIES)
    n = rng.randint(1, max_vertices - 1)
    edges = _graph(rng, n, closed)
    specs = {}
    if family in UNARY or family == "unary_mix":
        for v in range(n):
            kind = rng.choice(UNARY) if family == "unary_mix" else family
            specs[v] = _unary_spec(kind, rng, _out(edges, v))
        sink = SinkCounterSpec(counting=True)
    elif family == "oil_water":
        for v in range(n):
            out = _out(edges, v)
            oil = [e for e in out if rng.random() < 0.5]
            water = [e for e in out if e not in oil]
            specs[v] = OilWaterSpec(
                tuple(oil), tuple(water), max(1, len(oil)) + rng.randint(0, 1), max(1, len(water)) + rng.randint(0, 1)
            )
        sink = SinkCounterSpec(counting=True, alphabet_size=2)
    elif family == "mobile_agent":
        for v in range(n):
            out = _out(edges, v)
            o0, o1 = out[:], out[:]
            rng.shuffle(o0)
            rng.shuffle(o1)
            specs[v] = rotor_pair_agents(o0, o1)
        sink = SinkCounterSpec(counting=True, alphabet_size=2)
    else:
        raise ValueError(f"unknown family {family!r}")
    procs = {v: build(s) for v, s in specs.items()}
    procs["s"] = build(sink)
    net = Network(list(range(n)) + ["s"], edges, procs)
    q = tuple(_initial_state(p, rng) if v != "s" else 0 for v, p in zip(net.vertices, net.processors))
    total = rng.randint(0, max_input)
    counts = [0] * len(net.letters)
    internal = [i for i, a in enumerate(net.letters) if a.vertex != "s"]
    for _ in range(total):
        counts[rng.choice(internal)] += 1
    return Instance(family, net, tuple(counts), q)


def random_complete_execution(net: Network, x, q, rng: random.Random, extra: int = 5, budget: int = 100_000):
    """A complete, generally illegal, execution: random legal moves interleaved
    with ``extra`` letters processed at count <= 0, then finished legally.

    Returns the word as letter indices, or None if the legal finish does not
    halt within ``budget``.
    """
    cfg = net.configuration(x, q)
    word = []
    forced = extra
    while True:
        legal = [i for i, c in enumerate(cfg.counts) if c > 0]
        if forced and (not legal or rng.random() < 0.3):
            a = rng.randrange(len(net.letters))
            forced -= 1
        elif legal and rng.random() < 0.5:
            a = rng.choice(legal)
        else:
            break
        cfg = step(net, cfg, a)
        word.append(a)
        if len(word) > budget:
            return None
    out = run(net, [max(c, 0) for c in cfg.counts], cfg.states, "fifo", budget, trace=True)
    if not out.halted:
        return None
    word.extend(net.index(a) for a in out.trace)
    assert is_complete(apply_word(net, net.configuration(x, q), word))
    return word


def pad_execution(net: Network, x, q, word, rng: random.Random, extra: int = 3):
    """Insert ``extra`` random letters into a complete execution and re-complete it legally."""
    word = list(word)
    for _ in range(extra):
        word.insert(rng.randint(0, len(word)), rng.randrange(len(net.letters)))
    cfg = apply_word(net, net.configuration(x, q), word)
    out = run(net, [max(c, 0) for c in cfg.counts], cfg.states, "fifo", 100_000, trace=True)
    if not out.halted:
        return None
    return word + [net.index(a) for a in out.trace]


def random_monotone_table(rng: np.random.Generator, k: int, side: int, high: int) -> np.ndarray:
    """Nondecreasing ``F`` on ``{0..side-1}^k`` with values in ``0..high``.

    Each output coordinate is a random array made monotone by running maxima
    along every axis.
    """
    t = rng.integers(0, high + 1, size=(side,) * k + (k,))
    for ax in range(k):
        t = np.maximum.accumulate(t, axis=ax)
    return t


def random_monotone_program(rng: np.random.Generator, k: int | None = None, side: int | None = None) -> MonotoneProgram:
    k = k or int(rng.integers(1, 4))
    side = side or int(rng.integers(2, 16 if k < 3 else 9))
    # values sometimes exceed the box so both outcomes occur
    high = int(rng.integers(1, side + 3))
    table = random_monotone_table(rng, k, side, high)
    # damp most entries so feasible points exist more often
    if rng.random() < 0.7:
        table = table // 2
    return MonotoneProgram.from_table(table)


def random_toppling_system(rng: random.Random, max_n: int = 4, max_chips: int = 6) -> TopplingSystem:
    """Reduced Laplacian of a random multigraph with a sink every vertex can reach."""
    n = rng.randint(1, max_n)
    d = np.zeros((n, n), dtype=np.int64)  # d[u, v]: edges v -> u among non-sink vertices
    to_sink = np.zeros(n, dtype=np.int64)
    order = list(range(n))
    rng.shuffle(order)
    for k, v in enumerate(order):
        if k == 0 or rng.random() < 0.3:
            to_sink[v] += 1
        else:
            d[order[rng.randrange(k)], v] += 1
    for _ in range(rng.randint(0, 2 * n)):
        d[rng.randrange(n), rng.randrange(n)] += 1
    outdeg = d.sum(axis=0) + to_sink
    # thresholds at least the outdegree keep the network from creating chips
    r = np.array([int(o) + rng.randint(0, 1) for o in outdeg], dtype=np.int64)
    L = np.diag(r) - d
    x = np.array([rng.randint(0, max_chips) for _ in range(n)], dtype=np.int64)
    return TopplingSystem(L, r, x)
