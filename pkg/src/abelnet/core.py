"""Global view of an abelian network as a single automaton.

A network is a directed multigraph whose vertices carry processors.  The
network's total alphabet is the disjoint union of the vertex alphabets and
is indexed densely: letters are ordered by vertex (declaration order), then
by symbol.  Every count vector in this package uses that indexing.

A configuration ``x.q`` pairs integer letter counts ``x`` (negative entries
allowed) with the tuple of processor states ``q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, NamedTuple, Sequence

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

# (edge id, target symbol, count) triples; count > 0.
Emission = tuple


class AbelnetError(Exception):
    pass


class UnknownLetterError(AbelnetError, KeyError):
    pass


class TopologyError(AbelnetError, ValueError):
    pass


class ProcessorError(AbelnetError, ValueError):
    """A processor spec or emission is inconsistent with the network."""


class NonHaltingError(AbelnetError):
    """An inner run exceeded its step budget."""


class CountOverflowError(AbelnetError, OverflowError):
    pass


class LetterId(NamedTuple):
    vertex: Hashable
    symbol: int = 0


@dataclass(frozen=True)
class Edge:
    src: Hashable
    dst: Hashable
    id: Hashable


class Processor:
    """One vertex's automaton.

    Subclasses set ``alphabet_size``, ``out_edges`` and ``initial_state`` and
    implement :meth:`process`, which maps ``(symbol, state)`` to the new state
    and a tuple of ``(edge_id, target_symbol, count)`` emissions.  Only the
    multiset of emissions per edge is observable.
    """

    alphabet_size: int = 1
    out_edges: tuple = ()
    initial_state: Any = 0

    def process(self, symbol: int, state):
        raise NotImplementedError

    def transition(self, symbol: int, state):
        return self.process(symbol, state)[0]

    def emit(self, symbol: int, state) -> Emission:
        return self.process(symbol, state)[1]

    def finite_states(self):
        """All states, for finite families small enough to enumerate; else None."""
        return None

    def sample_states(self, rng, cap: int = 64) -> list:
        states = self.finite_states()
        if states is not None:
            states = list(states)
            if len(states) <= cap:
                return states
            return [self.initial_state] + rng.sample(states, cap - 1)
        return reachable_states(self, rng, cap)


def reachable_states(proc: Processor, rng, cap: int = 64, max_len: int = 24) -> list:
    """Sample states reachable from the initial state by random input words."""
    out = [proc.initial_state]
    seen = {proc.initial_state}
    attempts = 0
    while len(out) < cap and attempts < 8 * cap and proc.alphabet_size:
        attempts += 1
        q = proc.initial_state
        for _ in range(rng.randrange(1, max_len + 1)):
            q = proc.transition(rng.randrange(proc.alphabet_size), q)
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def run_word_local(proc: Processor, word: Iterable[int], state):
    """Feed a word of symbols to one processor.

    Returns the final state and a dict ``{(edge, symbol): count}``.
    """
    totals: dict = {}
    for sym in word:
        state, em = proc.process(sym, state)
        for e, s, c in em:
            totals[(e, s)] = totals.get((e, s), 0) + c
    return state, totals


@dataclass(frozen=True)
class Configuration:
    counts: tuple
    states: tuple

    def total(self) -> int:
        return sum(self.counts)


class Network:
    """Topology plus one processor per vertex.

    ``processors`` maps vertex id to :class:`Processor`.  Each processor's
    ``out_edges`` must be exactly the set of edges leaving its vertex.
    """

    def __init__(self, vertices: Sequence, edges: Sequence, processors: Mapping):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise TopologyError("duplicate vertex id")
        self.edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        self.vertex_index = {v: i for i, v in enumerate(self.vertices)}
        edge_ids = [e.id for e in self.edges]
        if len(set(edge_ids)) != len(edge_ids):
            raise TopologyError("duplicate edge id")
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in self.vertex_index:
                    raise TopologyError(f"edge {e.id!r} has undeclared endpoint {end!r}")
        missing = [v for v in self.vertices if v not in processors]
        if missing:
            raise TopologyError(f"no processor for vertices {missing!r}")
        self.processors = tuple(processors[v] for v in self.vertices)
        self.edge_by_id = {e.id: e for e in self.edges}

        self.offsets = []
        letters = []
        for v, p in zip(self.vertices, self.processors):
            self.offsets.append(len(letters))
            letters.extend(LetterId(v, s) for s in range(p.alphabet_size))
        self.letters = tuple(letters)
        self.letter_index = {a: i for i, a in enumerate(self.letters)}
        self.vertex_of = tuple(self.vertex_index[a.vertex] for a in self.letters)
        self.symbol_of = tuple(a.symbol for a in self.letters)

        # routes[v][(edge, sym)] -> global index of the letter delivered
        leaving_by = {v: set() for v in self.vertices}
        for e in self.edges:
            leaving_by[e.src].add(e.id)
        self.routes = []
        for i, (v, p) in enumerate(zip(self.vertices, self.processors)):
            leaving = leaving_by[v]
            declared = set(p.out_edges)
            if declared != leaving:
                raise ProcessorError(
                    f"processor at {v!r} declares out-edges {sorted(map(repr, declared))}, "
                    f"topology has {sorted(map(repr, leaving))}"
                )
            table = {}
            for eid in leaving:
                d = self.vertex_index[self.edge_by_id[eid].dst]
                for s in range(self.processors[d].alphabet_size):
                    table[(eid, s)] = self.offsets[d] + s
            self.routes.append(table)

    def __len__(self):
        return len(self.letters)

    def index(self, a) -> int:
        if isinstance(a, int) and not isinstance(a, bool):
            if 0 <= a < len(self.letters):
                return a
            raise UnknownLetterError(a)
        try:
            return self.letter_index[LetterId(*a)]
        except (KeyError, TypeError):
            raise UnknownLetterError(a) from None

    def multiplicity(self, src, dst) -> int:
        """Number of edges from ``src`` to ``dst``."""
        return sum(1 for e in self.edges if e.src == src and e.dst == dst)

    def initial_states(self) -> tuple:
        return tuple(p.initial_state for p in self.processors)

    def vector(self, values=None) -> tuple:
        """Dense count vector from a mapping ``{letter: count}`` or a sequence."""
        if values is None:
            return (0,) * len(self.letters)
        if isinstance(values, Mapping):
            out = [0] * len(self.letters)
            for a, c in values.items():
                out[self.index(a)] += int(c)
            return tuple(out)
        values = tuple(int(c) for c in values)
        if len(values) != len(self.letters):
            raise ValueError(f"vector has length {len(values)}, alphabet has {len(self.letters)}")
        return values

    def configuration(self, counts=None, states=None) -> Configuration:
        states = self.initial_states() if states is None else tuple(states)
        if len(states) != len(self.vertices):
            raise ValueError("one state per vertex required")
        return Configuration(self.vector(counts), states)

    def as_dict(self, vec) -> dict:
        return {a: c for a, c in zip(self.letters, vec) if c}

    def route(self, v: int, edge, sym: int) -> int:
        try:
            return self.routes[v][(edge, sym)]
        except KeyError:
            raise ProcessorError(
                f"processor at {self.vertices[v]!r} emitted symbol {sym!r} on edge {edge!r}, "
                "which is not a letter of that edge's target"
            ) from None


def _checked(value: int) -> int:
    if value > INT64_MAX or value < INT64_MIN:
        raise CountOverflowError(f"letter count {value} leaves the 64-bit range")
    return value


def step(net: Network, cfg: Configuration, a) -> Configuration:
    """Process one letter ``a`` regardless of legality."""
    i = net.index(a)
    v = net.vertex_of[i]
    new_state, em = net.processors[v].process(net.symbol_of[i], cfg.states[v])
    counts = list(cfg.counts)
    counts[i] = _checked(counts[i] - 1)
    for e, s, c in em:
        j = net.route(v, e, s)
        counts[j] = _checked(counts[j] + c)
    states = list(cfg.states)
    states[v] = new_state
    return Configuration(tuple(counts), tuple(states))


def apply_word(net: Network, cfg: Configuration, word: Iterable) -> Configuration:
    for a in word:
        cfg = step(net, cfg, a)
    return cfg


def message_count(net: Network, states: Sequence, word: Iterable) -> tuple:
    """Letters produced by message passing while processing ``word`` from ``states``."""
    states = list(states)
    out = [0] * len(net.letters)
    for a in word:
        i = net.index(a)
        v = net.vertex_of[i]
        states[v], em = net.processors[v].process(net.symbol_of[i], states[v])
        for e, s, c in em:
            out[net.route(v, e, s)] += c
    return tuple(out)


def word_vector(net: Network, word: Iterable) -> tuple:
    """``|w|``: the letter-count vector of a word."""
    out = [0] * len(net.letters)
    for a in word:
        out[net.index(a)] += 1
    return tuple(out)


def is_legal(net: Network, cfg: Configuration, a) -> bool:
    return cfg.counts[net.index(a)] >= 1


def is_complete(cfg: Configuration) -> bool:
    return all(c <= 0 for c in cfg.counts)


def is_legal_execution(net: Network, cfg: Configuration, word: Iterable) -> bool:
    for a in word:
        if not is_legal(net, cfg, a):
            return False
        cfg = step(net, cfg, a)
    return True


class CollapsedProcessor(Processor):
    """An interior subnetwork viewed as one processor.

    Symbols enumerate the interior letters in network order; the state is the
    tuple of interior states.  Processing a letter drains the interior to
    completion and reports letters that crossed interior-to-output edges.
    """

    def __init__(self, net: Network, interior, budget: int = 100_000):
        interior = set(interior)
        unknown = interior - set(net.vertices)
        if unknown:
            raise TopologyError(f"interior vertices not in network: {sorted(map(repr, unknown))}")
        self.net = net
        self.budget = budget
        self.members = tuple(i for i, v in enumerate(net.vertices) if v in interior)
        self.slot = {v: k for k, v in enumerate(self.members)}
        self.letter_of = tuple(
            i for i in range(len(net.letters)) if net.vertex_of[i] in self.slot
        )
        self.symbol_for = {g: s for s, g in enumerate(self.letter_of)}
        self.alphabet_size = len(self.letter_of)
        self.out_edges = tuple(
            e.id for e in net.edges if e.src in interior and e.dst not in interior
        )
        self._exits = set(self.out_edges)
        self.initial_state = tuple(net.processors[v].initial_state for v in self.members)

    def letter(self, symbol: int) -> LetterId:
        return self.net.letters[self.letter_of[symbol]]

    def process(self, symbol, state):
        net = self.net
        states = list(state)
        pending = {self.letter_of[symbol]: 1}
        out: dict = {}
        steps = 0
        while pending:
            g = min(pending)
            pending[g] -= 1
            if not pending[g]:
                del pending[g]
            steps += 1
            if steps > self.budget:
                raise NonHaltingError(
                    f"interior run exceeded {self.budget} steps; it may not halt"
                )
            v = net.vertex_of[g]
            k = self.slot[v]
            states[k], em = net.processors[v].process(net.symbol_of[g], states[k])
            for e, s, c in em:
                if e in self._exits:
                    out[(e, s)] = out.get((e, s), 0) + c
                else:
                    j = net.route(v, e, s)
                    pending[j] = pending.get(j, 0) + c
        return tuple(states), tuple((e, s, c) for (e, s), c in sorted(out.items(), key=repr))


def collapse_subnetwork(net: Network, interior, budget: int = 100_000) -> CollapsedProcessor:
    return CollapsedProcessor(net, interior, budget)
