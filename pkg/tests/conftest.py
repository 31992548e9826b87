import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from abelnet.core import LetterId, Network
from abelnet.processors import (
    RotorSpec,
    SandpileSpec,
    SinkCounterSpec,
    build,
    nonabelian_mutant,
)

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SAMPLES = Path(__file__).resolve().parents[1] / "samples"


def project(net, word, vertex):
    """Restrict a word to the letters of one vertex."""
    return [a for a in word if net.letters[net.index(a)].vertex == vertex]


def sandpile_path(n, threshold=1):
    """v1 -> v2 -> ... -> vn -> sink, one edge each."""
    vs = [f"v{i}" for i in range(1, n + 1)]
    edges = [(a, b, f"{a}{b}") for a, b in zip(vs, vs[1:] + ["s"])]
    procs = {v: build(SandpileSpec((f"{v}{w}",), threshold)) for v, w in zip(vs, vs[1:] + ["s"])}
    procs["s"] = build(SinkCounterSpec())
    return Network(vs + ["s"], edges, procs)


def two_cycle():
    edges = [("u", "v", "uv"), ("v", "u", "vu")]
    procs = {"u": build(SandpileSpec(("uv",), 1)), "v": build(SandpileSpec(("vu",), 1))}
    return Network(["u", "v"], edges, procs)


def sandpile_with_sink(n=6, seed=0):
    """Random connected sandpile on n vertices plus a sink reachable from all."""
    rng = random.Random(seed)
    vs = list(range(n))
    edges = []
    for v in vs:
        edges.append((v, "s" if v == 0 else rng.randrange(v), f"t{v}"))
    for k in range(2 * n):
        edges.append((rng.randrange(n), rng.randrange(n), f"x{k}"))
    procs = {v: build(SandpileSpec(tuple(e for a, _, e in edges if a == v))) for v in vs}
    procs["s"] = build(SinkCounterSpec(counting=True))
    return Network(vs + ["s"], edges, procs)


def mutant_network():
    procs = {"m": nonabelian_mutant("mc"), "c": build(SinkCounterSpec(counting=True))}
    return Network(["m", "c"], [("m", "c", "mc")], procs)


def rotor_with_counters():
    edges = [("r1", "r2", "a"), ("r1", "c1", "b"), ("r2", "r1", "c"), ("r2", "c2", "d")]
    procs = {
        "r1": build(RotorSpec(("a", "b"))),
        "r2": build(RotorSpec(("c", "d", "c"))),
        "c1": build(SinkCounterSpec(counting=True)),
        "c2": build(SinkCounterSpec(counting=True)),
    }
    return Network(["r1", "r2", "c1", "c2"], edges, procs)


@pytest.fixture
def samples():
    return SAMPLES


L = LetterId


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
