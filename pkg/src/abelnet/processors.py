"""Builtin processor families.

Each family has a small frozen spec dataclass; :func:`build` turns a spec
into a :class:`~abelnet.core.Processor`.  Edges are referred to by edge id,
and letters sent along an edge are symbol 0 of the target's alphabet unless
the family says otherwise (oil/water and mobile agents).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch
from typing import Any, Mapping

from .core import Processor, ProcessorError


def _edges(edges) -> tuple:
    edges = tuple(edges)
    if len(set(edges)) != len(edges):
        raise ProcessorError(f"repeated edge id in {edges!r}")
    return edges


@dataclass(frozen=True)
class SandpileSpec:
    out_edges: tuple
    threshold: int | None = None  # defaults to the outdegree


@dataclass(frozen=True)
class TopplingExtendedSpec(SandpileSpec):
    """Toppling processor whose state may go negative (latent negative chips)."""

    allow_negative: bool = True


@dataclass(frozen=True)
class RotorSpec:
    order: tuple  # edge ids served cyclically; repeats allowed
    absorbing: bool = False


@dataclass(frozen=True)
class BootstrapSpec:
    threshold: int
    out_edges: tuple


@dataclass(frozen=True)
class UnaryTapeSpec:
    """Eventually periodic instruction tape.

    ``instructions[i]`` lists the edges that each receive one letter when a
    letter is processed in state ``i`` (an edge may repeat).  After the last
    instruction the tape returns to index ``preperiod``.
    """

    instructions: tuple
    preperiod: int = 0
    out_edges: tuple | None = None  # defaults to the edges named in instructions


@dataclass(frozen=True)
class OilWaterSpec:
    oil_edges: tuple
    water_edges: tuple
    oil_threshold: int | None = None
    water_threshold: int | None = None


@dataclass(frozen=True)
class MobileAgentSpec:
    """Agents as letters.  ``table[(a, q)] = (agent_state, vertex_state, edge)``."""

    agent_states: int
    table: Mapping
    out_edges: tuple
    initial_state: Any = 0


@dataclass(frozen=True)
class SinkCounterSpec:
    counting: bool = False
    alphabet_size: int = 1


# --- processors -------------------------------------------------------------


class SandpileProcessor(Processor):
    def __init__(self, spec: SandpileSpec):
        self.out_edges = _edges(spec.out_edges)
        r = len(self.out_edges) if spec.threshold is None else spec.threshold
        if r <= 0:
            raise ProcessorError(f"threshold must be positive, got {r}")
        self.threshold = r
        self.allow_negative = getattr(spec, "allow_negative", False)
        self._fire = tuple((e, 0, 1) for e in self.out_edges)

    def process(self, symbol, q):
        if q == self.threshold - 1:
            return 0, self._fire
        if q < 0 and not self.allow_negative:
            raise ProcessorError(f"negative state {q} in a sandpile without negative chips")
        return q + 1, ()

    def finite_states(self):
        return range(self.threshold)

    def sample_states(self, rng, cap=64):
        states = list(range(self.threshold))
        if self.allow_negative:
            states = [-k for k in range(1, 2 * self.threshold + 4)] + states
        if len(states) > cap:
            states = [0] + rng.sample(states, cap - 1)
        return states


class RotorProcessor(Processor):
    def __init__(self, spec: RotorSpec):
        order = tuple(spec.order)
        if not order:
            raise ProcessorError("rotor order must be nonempty")
        self.order = order
        self.out_edges = tuple(dict.fromkeys(order))
        self.absorbing = spec.absorbing
        self.initial_state = -1 if spec.absorbing else 0
        self._sends = tuple(((e, 0, 1),) for e in order)

    def process(self, symbol, q):
        if q == -1 and self.absorbing:
            return 0, ()
        return (q + 1) % len(self.order), self._sends[q]

    def finite_states(self):
        return range(-1 if self.absorbing else 0, len(self.order))


class BootstrapProcessor(Processor):
    def __init__(self, spec: BootstrapSpec):
        if spec.threshold <= 0:
            raise ProcessorError(f"threshold must be positive, got {spec.threshold}")
        self.threshold = spec.threshold
        self.out_edges = _edges(spec.out_edges)
        self._infect = tuple((e, 0, 1) for e in self.out_edges)

    def process(self, symbol, q):
        em = self._infect if q == self.threshold - 1 else ()
        return min(q + 1, self.threshold), em

    def finite_states(self):
        return range(self.threshold + 1)


class UnaryTapeProcessor(Processor):
    def __init__(self, spec: UnaryTapeSpec):
        tape = tuple(tuple(instr) for instr in spec.instructions)
        if not tape:
            raise ProcessorError("instruction tape must be nonempty")
        if not 0 <= spec.preperiod < len(tape):
            raise ProcessorError(
                f"preperiod {spec.preperiod} leaves no periodic part in a tape of length {len(tape)}"
            )
        named = dict.fromkeys(e for instr in tape for e in instr)
        if spec.out_edges is None:
            self.out_edges = tuple(named)
        else:
            self.out_edges = _edges(spec.out_edges)
            stray = set(named) - set(self.out_edges)
            if stray:
                raise ProcessorError(f"tape names edges outside out_edges: {sorted(map(repr, stray))}")
        self.tape = tape
        self.preperiod = spec.preperiod
        self._emissions = []
        for instr in tape:
            counts: dict = {}
            for e in instr:
                counts[e] = counts.get(e, 0) + 1
            self._emissions.append(tuple((e, 0, c) for e, c in counts.items()))

    def process(self, symbol, q):
        nxt = q + 1
        if nxt == len(self.tape):
            nxt = self.preperiod
        return nxt, self._emissions[q]

    def finite_states(self):
        return range(len(self.tape))


class OilWaterProcessor(Processor):
    """Two letters: symbol 0 is oil, symbol 1 is water.

    The state counts oil and water received so far.  The number of topplings
    completed in state ``(o, w)`` is ``min(o // r_oil, w // r_water)``; each
    toppling sends one oil letter along every oil edge and one water letter
    along every water edge.
    """

    alphabet_size = 2
    initial_state = (0, 0)

    def __init__(self, spec: OilWaterSpec):
        self.oil_edges = _edges(spec.oil_edges)
        self.water_edges = _edges(spec.water_edges)
        if set(self.oil_edges) & set(self.water_edges):
            raise ProcessorError("oil and water edge sets must be disjoint")
        self.out_edges = self.oil_edges + self.water_edges
        self.r_oil = len(self.oil_edges) if spec.oil_threshold is None else spec.oil_threshold
        self.r_water = len(self.water_edges) if spec.water_threshold is None else spec.water_threshold
        if self.r_oil <= 0 or self.r_water <= 0:
            raise ProcessorError(
                f"oil and water thresholds must be positive, got {self.r_oil}, {self.r_water}"
            )

    def topplings(self, q) -> int:
        return min(q[0] // self.r_oil, q[1] // self.r_water)

    def process(self, symbol, q):
        if symbol == 0:
            new = (q[0] + 1, q[1])
        elif symbol == 1:
            new = (q[0], q[1] + 1)
        else:
            raise ProcessorError(f"oil/water symbol must be 0 or 1, got {symbol!r}")
        fired = self.topplings(new) - self.topplings(q)
        if not fired:
            return new, ()
        em = tuple((e, 0, fired) for e in self.oil_edges) + tuple(
            (e, 1, fired) for e in self.water_edges
        )
        return new, em

    def sample_states(self, rng, cap=64):
        hi_o, hi_w = 3 * self.r_oil + 2, 3 * self.r_water + 2
        out = {(0, 0)}
        while len(out) < min(cap, (hi_o + 1) * (hi_w + 1)):
            out.add((rng.randint(0, hi_o), rng.randint(0, hi_w)))
        return sorted(out)


class MobileAgentProcessor(Processor):
    """Mobile agents compiled to message passing.

    An agent in state ``a`` arriving at a vertex in state ``q`` moves the
    vertex to ``T(a, q)`` and leaves along edge ``U(a, q)`` in state ``S(a, q)``.
    """

    def __init__(self, spec: MobileAgentSpec):
        if spec.agent_states <= 0:
            raise ProcessorError("agent_states must be positive")
        self.alphabet_size = spec.agent_states
        self.out_edges = _edges(spec.out_edges)
        self.initial_state = spec.initial_state
        allowed = set(self.out_edges)
        table = {}
        for (a, q), (s, t, u) in dict(spec.table).items():
            if u not in allowed:
                raise ProcessorError(f"table entry {(a, q)!r} moves along non-neighbor edge {u!r}")
            if not 0 <= s < spec.agent_states:
                raise ProcessorError(f"table entry {(a, q)!r} yields agent state {s!r}")
            table[(a, q)] = (t, ((u, s, 1),))
        self.table = table
        self._states = sorted({q for _, q in table}, key=repr)

    def process(self, symbol, q):
        try:
            return self.table[(symbol, q)]
        except KeyError:
            raise ProcessorError(f"mobile agent table has no entry for {(symbol, q)!r}") from None

    def finite_states(self):
        return self._states


class SinkProcessor(Processor):
    def __init__(self, spec: SinkCounterSpec = SinkCounterSpec()):
        self.alphabet_size = spec.alphabet_size
        self.out_edges = ()

    def process(self, symbol, q):
        return q, ()

    def finite_states(self):
        return (0,)


class CounterProcessor(SinkProcessor):
    def process(self, symbol, q):
        return q + 1, ()

    def finite_states(self):
        return None


class NonAbelianMutant(Processor):
    """Emits one letter only when ``b`` (symbol 1) directly follows ``a`` (symbol 0).

    States: 0 fresh, 1 last letter was ``a``, 2 otherwise.
    """

    alphabet_size = 2

    def __init__(self, out_edge="mutant-out"):
        self.out_edges = (out_edge,)
        self._hit = ((out_edge, 0, 1),)

    def process(self, symbol, q):
        if symbol == 0:
            return 1, ()
        return 2, (self._hit if q == 1 else ())

    def finite_states(self):
        return (0, 1, 2)


@singledispatch
def build(spec) -> Processor:
    raise ProcessorError(f"no processor family for {type(spec).__name__}")


@build.register
def _(spec: SandpileSpec):
    return SandpileProcessor(spec)


@build.register
def _(spec: RotorSpec):
    return RotorProcessor(spec)


@build.register
def _(spec: BootstrapSpec):
    return BootstrapProcessor(spec)


@build.register
def _(spec: UnaryTapeSpec):
    return UnaryTapeProcessor(spec)


@build.register
def _(spec: OilWaterSpec):
    return OilWaterProcessor(spec)


@build.register
def _(spec: MobileAgentSpec):
    return MobileAgentProcessor(spec)


@build.register
def _(spec: SinkCounterSpec):
    return CounterProcessor(spec) if spec.counting else SinkProcessor(spec)


def nonabelian_mutant(out_edge="mutant-out") -> NonAbelianMutant:
    return NonAbelianMutant(out_edge)


def rotor_pair_agents(order0, order1) -> MobileAgentSpec:
    """Two agent colours, each routed by its own rotor; colours are preserved.

    The vertex state is the pair of rotor positions.  This is an abelian
    non-unary mobile-agent processor.
    """
    order0, order1 = tuple(order0), tuple(order1)
    if not order0 or not order1:
        raise ProcessorError("both rotor orders must be nonempty")
    table = {}
    for i in range(len(order0)):
        for j in range(len(order1)):
            table[(0, (i, j))] = (0, ((i + 1) % len(order0), j), order0[i])
            table[(1, (i, j))] = (1, (i, (j + 1) % len(order1)), order1[j])
    edges = tuple(dict.fromkeys(order0 + order1))
    return MobileAgentSpec(agent_states=2, table=table, out_edges=edges, initial_state=(0, 0))


FAMILIES = {
    "sandpile": SandpileSpec,
    "toppling": TopplingExtendedSpec,
    "rotor": RotorSpec,
    "bootstrap": BootstrapSpec,
    "tape": UnaryTapeSpec,
    "oil_water": OilWaterSpec,
    "mobile_agent": MobileAgentSpec,
    "sink": SinkCounterSpec,
    "counter": SinkCounterSpec,
}
