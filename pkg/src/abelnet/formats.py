"""JSON documents for networks and programs.

Network document::

    {
      "format": "abelnet-network/1",
      "vertices": [{"id": "a", "family": "sandpile", "params": {}, "state": 0}, ...],
      "edges": [{"id": "e0", "src": "a", "dst": "b"}, ...],
      "input": [{"vertex": "a", "symbol": 0, "count": 3}, ...]
    }

Families and their params (edge lists default to every out-edge of the
vertex, in declaration order):

=============  ===========================================================
sandpile       threshold, out_edges
toppling       threshold, out_edges, allow_negative (default true)
rotor          order, absorbing
bootstrap      threshold (required), out_edges
tape           instructions (list of edge lists), preperiod, out_edges
oil_water      oil_edges, water_edges (default: the rest), oil_threshold,
               water_threshold
mobile_agent   agent_states, table (rows of agent, state, new_agent,
               new_state, edge), initial_state
sink, counter  alphabet_size
mutant         none; the vertex must have exactly one out-edge
=============  ===========================================================

Program document: ``{"format": "abelnet-program/1", "kind": "table",
"table": nested lists of shape (B_1+1, ..., B_k+1, k), "cost": [...]}`` or
``{"kind": "toppling", "L": [[...]], "r": [...], "x": [...]}`` (``"b"`` may
replace ``"x"``, with ``x = b + r - 1``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import AbelnetError, Network, ProcessorError
from .optimize import MonotoneProgram, TopplingSystem
from .processors import (
    BootstrapSpec,
    MobileAgentSpec,
    OilWaterSpec,
    RotorSpec,
    SandpileSpec,
    SinkCounterSpec,
    TopplingExtendedSpec,
    UnaryTapeSpec,
    build,
    nonabelian_mutant,
)

NETWORK_FORMAT = "abelnet-network/1"
PROGRAM_FORMAT = "abelnet-program/1"


class FormatError(AbelnetError, ValueError):
    pass


def freeze(value):
    """JSON lists to tuples, recursively, so states are hashable."""
    if isinstance(value, list):
        return tuple(freeze(v) for v in value)
    return value


def thaw(value):
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    return value


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


@dataclass
class VertexDoc:
    id: object
    family: str
    params: dict = field(default_factory=dict)
    state: object = None


@dataclass
class NetworkDoc:
    vertices: list
    edges: list  # (src, dst, id)
    input: dict  # (vertex, symbol) -> count

    def network(self) -> Network:
        procs = {v.id: _build_processor(v, self.edges) for v in self.vertices}
        try:
            return Network([v.id for v in self.vertices], self.edges, procs)
        except AbelnetError as exc:
            raise FormatError(str(exc)) from None

    def bundle(self):
        """``(network, input vector, initial states)``."""
        net = self.network()
        x = net.vector({(v, s): c for (v, s), c in self.input.items()})
        q = tuple(
            p.initial_state if d.state is None else freeze(d.state) for d, p in zip(self.vertices, net.processors)
        )
        return net, x, q


def _out_edges(v, edges):
    return tuple(eid for src, _, eid in edges if src == v)


def _build_processor(doc: VertexDoc, edges):
    p = dict(doc.params)
    out = _out_edges(doc.id, edges)
    fam = doc.family
    try:
        if fam in ("sandpile", "toppling", "bootstrap"):
            p["out_edges"] = tuple(p.get("out_edges", out))
        if fam == "sandpile":
            spec = SandpileSpec(**p)
        elif fam == "toppling":
            spec = TopplingExtendedSpec(**p)
        elif fam == "bootstrap":
            spec = BootstrapSpec(**p)
        elif fam == "rotor":
            spec = RotorSpec(tuple(p.pop("order", out)), **p)
        elif fam == "tape":
            instr = tuple(tuple(i) for i in p.pop("instructions"))
            p.setdefault("out_edges", out)
            p["out_edges"] = tuple(p["out_edges"])
            spec = UnaryTapeSpec(instr, **p)
        elif fam == "oil_water":
            oil = tuple(p.pop("oil_edges", ()))
            water = tuple(p.pop("water_edges", tuple(e for e in out if e not in oil)))
            spec = OilWaterSpec(oil, water, **p)
        elif fam == "mobile_agent":
            table = {
                (row["agent"], freeze(row["state"])): (row["new_agent"], freeze(row["new_state"]), row["edge"])
                for row in p.pop("table")
            }
            spec = MobileAgentSpec(
                p.pop("agent_states"),
                table,
                tuple(p.pop("out_edges", out)),
                freeze(p.pop("initial_state", 0)),
            )
            if p:
                raise TypeError(f"unexpected params {sorted(p)}")
        elif fam in ("sink", "counter"):
            spec = SinkCounterSpec(counting=fam == "counter", **p)
        elif fam == "mutant":
            if p:
                raise TypeError(f"unexpected params {sorted(p)}")
            if len(out) != 1:
                raise ProcessorError("a mutant vertex needs exactly one out-edge")
            return nonabelian_mutant(out[0])
        else:
            raise FormatError(f"vertex {doc.id!r}: unknown family tag {fam!r}")
        return build(spec)
    except (TypeError, KeyError) as exc:
        raise FormatError(f"vertex {doc.id!r} ({fam}): bad params: {exc}") from None
    except ProcessorError as exc:
        raise FormatError(f"vertex {doc.id!r} ({fam}): {exc}") from None


def parse_network(text: str) -> NetworkDoc:
    data = _load(text)
    if not isinstance(data, dict):
        raise FormatError("network document must be a JSON object")
    if data.get("format", NETWORK_FORMAT) != NETWORK_FORMAT:
        raise FormatError(f"unsupported format {data.get('format')!r}")
    try:
        vertices = [
            VertexDoc(v["id"], v["family"], dict(v.get("params", {})), v.get("state"))
            for v in data.get("vertices", [])
        ]
        ids = {v.id for v in vertices}
        edges = []
        for k, e in enumerate(data.get("edges", [])):
            eid = e.get("id", f"e{k}")
            for end in ("src", "dst"):
                if e[end] not in ids:
                    raise FormatError(f"dangling edge {eid!r}: {end} {e[end]!r} is not a declared vertex")
            edges.append((e["src"], e["dst"], eid))
        inputs: dict = {}
        for item in data.get("input", []):
            key = (item["vertex"], int(item.get("symbol", 0)))
            if key[0] not in ids:
                raise FormatError(f"input names undeclared vertex {key[0]!r}")
            count = int(item["count"])
            if count < 0:
                raise FormatError("input counts must be nonnegative")
            inputs[key] = inputs.get(key, 0) + count
    except (KeyError, TypeError) as exc:
        raise FormatError(f"missing or malformed field: {exc}") from None
    doc = NetworkDoc(vertices, edges, inputs)
    doc.bundle()  # validate now
    return doc


def serialize_network(doc: NetworkDoc) -> str:
    """Canonical form: explicit edge ids, merged inputs sorted by vertex order."""
    order = {v.id: k for k, v in enumerate(doc.vertices)}
    data = {
        "format": NETWORK_FORMAT,
        "vertices": [
            {"id": v.id, "family": v.family, "params": v.params, **({} if v.state is None else {"state": thaw(v.state)})}
            for v in doc.vertices
        ],
        "edges": [{"id": eid, "src": s, "dst": d} for s, d, eid in doc.edges],
        "input": [
            {"vertex": v, "symbol": s, "count": c}
            for (v, s), c in sorted(doc.input.items(), key=lambda kv: (order[kv[0][0]], kv[0][1]))
            if c
        ],
    }
    return json.dumps(data, indent=2) + "\n"


def parse_program(text: str):
    """Return a :class:`MonotoneProgram` or a :class:`TopplingSystem`."""
    data = _load(text)
    if not isinstance(data, dict):
        raise FormatError("program document must be a JSON object")
    if data.get("format", PROGRAM_FORMAT) != PROGRAM_FORMAT:
        raise FormatError(f"unsupported format {data.get('format')!r}")
    kind = data.get("kind")
    try:
        if kind == "table":
            return MonotoneProgram.from_table(data["table"], data.get("cost"))
        if kind == "toppling":
            if "x" in data:
                return TopplingSystem(data["L"], data["r"], data["x"])
            return TopplingSystem.from_b(data["L"], data["r"], data["b"])
    except KeyError as exc:
        raise FormatError(f"missing field {exc}") from None
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    raise FormatError(f"unknown program kind {kind!r}; expected 'table' or 'toppling'")
