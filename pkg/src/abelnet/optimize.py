"""Least feasible vectors of monotone integer programs.

A monotone program asks for the coordinatewise least ``u`` in ``N^k`` with
``F(u) <= u``, for a nondecreasing ``F``.  The feasible set is closed under
coordinatewise minimum, so the least vector (when it exists) minimises
``c . u`` for every positive cost vector ``c``.

:func:`solve_monotone` finds it as the odometer of a one-vertex network
with a self-loop, whose state is the count vector processed so far and
whose loop emits ``F(q + e_a) - F(q)`` on processing letter ``a``.
:func:`kleene_oracle` is an independent check: iterate ``u <- max(u, F(u))``
from zero.

Toppling networks give the linear case ``L v >= b``; see
:func:`solve_toppling_ip`.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import AbelnetError, Network, Processor
from .engine import CapExceeded, Halted, NonHalting, run
from .processors import TopplingExtendedSpec, build


class NonMonotoneError(AbelnetError, ValueError):
    def __init__(self, u, v, fu, fv):
        super().__init__(f"F is not nondecreasing: {u} <= {v} but F{u} = {fu} and F{v} = {fv}")
        self.witness = (u, v, fu, fv)


def _vec(u) -> tuple:
    return tuple(int(c) for c in u)


@dataclass
class MonotoneProgram:
    """``minimize c . u`` subject to ``F(u) <= u``, ``u`` in ``N^k``.

    ``box`` (inclusive upper bound per coordinate) marks where ``F`` is
    defined when it comes from a finite table; outside the box the program
    is not evaluated, and solvers report "infeasible within box" instead.
    """

    k: int
    F: Callable
    cost: tuple | None = None
    box: tuple | None = None
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if self.cost is not None:
            self.cost = tuple(self.cost)
            if len(self.cost) != self.k or any(c <= 0 for c in self.cost):
                raise ValueError("cost vector must have k positive entries")
        if self.box is not None:
            self.box = _vec(self.box)

    @classmethod
    def from_table(cls, table, cost=None) -> "MonotoneProgram":
        """``table[u] = F(u)`` for ``u`` in the box; shape ``(B_1+1, ..., B_k+1, k)``."""
        table = np.asarray(table, dtype=np.int64)
        k = table.ndim - 1
        if k < 1 or table.shape[-1] != k:
            raise ValueError(f"table of shape {table.shape} is not (B_1+1, ..., B_k+1, k)")
        if (table < 0).any():
            raise ValueError("F must take values in N^k")
        box = tuple(n - 1 for n in table.shape[:-1])

        def F(u):
            return tuple(int(c) for c in table[tuple(u)])

        return cls(k, F, cost, box, table)

    def __call__(self, u) -> tuple:
        u = _vec(u)
        if self.box is not None and any(a > b for a, b in zip(u, self.box)):
            raise ValueError(f"{u} lies outside the box {self.box}")
        return _vec(self.F(u))

    def feasible(self, u) -> bool:
        return all(f <= a for f, a in zip(self(u), u))

    def check_monotone(self, samples: int = 500, seed: int = 0, bound: int = 16):
        """Spot-check monotonicity on random comparable pairs; raise on a witness.

        Table programs are checked exhaustively along every axis.
        """
        if self.table is not None:
            t = self.table
            for ax in range(self.k):
                d = np.diff(t, axis=ax)
                bad = np.argwhere((d < 0).any(axis=-1))
                if len(bad):
                    u = tuple(int(c) for c in bad[0])
                    v = list(u)
                    v[ax] += 1
                    raise NonMonotoneError(u, tuple(v), self(u), self(v))
            return
        rng = random.Random(seed)
        hi = self.box or (bound,) * self.k
        for _ in range(samples):
            u = tuple(rng.randint(0, h) for h in hi)
            v = tuple(rng.randint(a, h) for a, h in zip(u, hi))
            fu, fv = self(u), self(v)
            if any(a > b for a, b in zip(fu, fv)):
                raise NonMonotoneError(u, v, fu, fv)


class NetFProcessor(Processor):
    """Single processor whose state is the count vector processed so far."""

    def __init__(self, F: Callable, k: int, loop="loop"):
        self.alphabet_size = k
        self.out_edges = (loop,)
        self.initial_state = (0,) * k
        self.loop = loop
        self._F = lru_cache(maxsize=4096)(lambda q: _vec(F(q)))

    def process(self, symbol, q):
        nxt = list(q)
        nxt[symbol] += 1
        nxt = tuple(nxt)
        before, after = self._F(q), self._F(nxt)
        em = []
        for b, (x, y) in enumerate(zip(before, after)):
            if y < x:
                raise NonMonotoneError(q, nxt, before, after)
            if y > x:
                em.append((self.loop, b, y - x))
        return nxt, tuple(em)


def build_net_F(F: Callable, k: int, vertex="v", loop="loop"):
    """Return ``(network, input, states)`` with input ``F(0)`` and state ``0``."""
    proc = NetFProcessor(F, k, loop)
    net = Network([vertex], [(vertex, vertex, loop)], {vertex: proc})
    x = _vec(F((0,) * k))
    return net, x, net.initial_states()


@dataclass
class Solution:
    status: str  # "optimal", "infeasible", "infeasible-in-box", "unknown"
    u: tuple | None
    steps: int
    certificate: object = None
    objective: float | None = None
    check: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


def solve_monotone(prog: MonotoneProgram, budget: int = 1_000_000, scheduler: str = "fifo") -> Solution:
    """Least feasible vector via the network odometer.

    * halted: the odometer is the minimiser;
    * configuration recurrence: no feasible vector exists;
    * a legal execution leaves the box: no feasible vector inside the box
      (every feasible vector dominates every legal execution);
    * budget exhausted: unknown.
    """
    net, x, q = build_net_F(prog, prog.k)
    if prog.box is not None and any(a > b for a, b in zip(x, prog.box)):
        # F(0) itself is a lower bound on every feasible vector
        return Solution("infeasible-in-box", None, 0, {"escape": x})
    out = run(net, x, q, scheduler, budget, odometer_cap=prog.box)
    if isinstance(out, Halted):
        u = out.odometer
        obj = None if prog.cost is None else float(sum(c * a for c, a in zip(prog.cost, u)))
        check = {"F(u)": prog(u), "F(u) <= u": prog.feasible(u)}
        return Solution("optimal", u, out.steps, None, obj, check)
    if isinstance(out, NonHalting):
        return Solution("infeasible", None, out.start_step + len(out.segment), out)
    if isinstance(out, CapExceeded):
        return Solution(
            "infeasible-in-box", None, sum(out.odometer), {"escape": out.escape, "legal_word": out.word}
        )
    return Solution("unknown", None, out.steps)


@dataclass(frozen=True)
class KleeneResult:
    u: tuple | None
    iterations: int
    escape: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.u is not None


def kleene_oracle(F: Callable, k: int, box) -> KleeneResult:
    """Iterate ``u <- max(u, F(u))`` from zero; stop at a fixed point or on leaving the box."""
    box = (int(box),) * k if np.isscalar(box) else _vec(box)
    u = (0,) * k
    n = 0
    while True:
        nxt = tuple(max(a, b) for a, b in zip(u, _vec(F(u))))
        n += 1
        if nxt == u:
            return KleeneResult(u, n)
        if any(a > b for a, b in zip(nxt, box)):
            return KleeneResult(None, n, nxt)
        u = nxt


def brute_force_least(prog: MonotoneProgram):
    """Least feasible vector inside ``prog.box`` by exhaustive scan, or None."""
    best = None
    for u in itertools.product(*(range(b + 1) for b in prog.box)):
        if prog.feasible(u):
            best = u if best is None else tuple(map(min, best, u))
    return best


# --- toppling networks and linear programs ---------------------------------


@dataclass
class TopplingSystem:
    """Laplacian ``L`` with thresholds ``r`` and chip input ``x``.

    ``L[v][v] = r_v - d_vv`` and ``L[u][v] = -d_uv`` where ``d_uv`` counts
    edges from ``v`` to ``u``.  The linear program is ``L v >= b`` with
    ``b = x - r + 1``.
    """

    L: np.ndarray
    r: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=np.int64)
        self.r = np.asarray(self.r, dtype=np.int64)
        self.x = np.asarray(self.x, dtype=np.int64)
        n = len(self.r)
        if self.L.shape != (n, n) or self.x.shape != (n,):
            raise ValueError("L must be n x n and r, x of length n")
        if (self.r <= 0).any():
            raise ValueError("thresholds must be positive")
        if (self.DL < 0).any():
            raise ValueError("D - L must be nonnegative")

    @classmethod
    def from_b(cls, L, r, b) -> "TopplingSystem":
        r = np.asarray(r, dtype=np.int64)
        return cls(L, r, np.asarray(b, dtype=np.int64) + r - 1)

    @property
    def n(self) -> int:
        return len(self.r)

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.r)

    @property
    def DL(self) -> np.ndarray:
        return np.diag(self.r) - self.L

    @property
    def b(self) -> np.ndarray:
        return self.x - self.r + 1

    def feasible(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64)
        return bool((v >= 0).all() and (self.L @ v >= self.b).all())

    def network(self):
        """Toppling network: ``(D - L)[u, v]`` parallel edges from ``v`` to ``u``.

        Negative entries of ``x`` become negative initial states; the rest is
        the input.  Returns ``(network, input, states)``.
        """
        DL = self.DL
        edges, out = [], {v: [] for v in range(self.n)}
        for v in range(self.n):
            for u in range(self.n):
                for m in range(int(DL[u, v])):
                    eid = f"{v}>{u}#{m}"
                    edges.append((v, u, eid))
                    out[v].append(eid)
        procs = {
            v: build(TopplingExtendedSpec(tuple(out[v]), threshold=int(self.r[v]))) for v in range(self.n)
        }
        net = Network(range(self.n), edges, procs)
        x = tuple(int(max(c, 0)) for c in self.x)
        q = tuple(int(min(c, 0)) for c in self.x)
        return net, x, q

    def program(self) -> MonotoneProgram:
        """``F(u) = x + (D - L) floor(u / r)``; needs ``x >= 0``."""
        if (self.x < 0).any():
            raise ValueError("the monotone form needs a nonnegative chip input")
        DL, x, r = self.DL, self.x, self.r

        def F(u):
            return tuple(int(c) for c in x + DL @ (np.asarray(u, dtype=np.int64) // r))

        return MonotoneProgram(self.n, F)

    def to_u(self, v) -> tuple:
        return tuple(int(c) for c in self.x + self.DL @ np.asarray(v, dtype=np.int64))


@dataclass
class IPSolution:
    status: str  # "optimal", "infeasible", "unknown"
    v: tuple | None
    steps: int
    certificate: object = None
    check: dict = field(default_factory=dict)


def solve_toppling_ip(sys: TopplingSystem, budget: int = 1_000_000, scheduler: str = "fifo") -> IPSolution:
    """Least ``v >= 0`` with ``L v >= b``: the toppling counts of the network."""
    net, x, q = sys.network()
    out = run(net, x, q, scheduler, budget)
    if isinstance(out, Halted):
        v = tuple(max(0, (q0 + u) // int(r)) for q0, u, r in zip(q, out.odometer, sys.r))
        Lv = sys.L @ np.asarray(v, dtype=np.int64)
        check = {
            "Lv": tuple(int(c) for c in Lv),
            "b": tuple(int(c) for c in sys.b),
            "Lv >= b": bool((Lv >= sys.b).all()),
        }
        return IPSolution("optimal", v, out.steps, None, check)
    if isinstance(out, NonHalting):
        return IPSolution("infeasible", None, out.start_step + len(out.segment), out)
    return IPSolution("unknown", None, out.steps)
