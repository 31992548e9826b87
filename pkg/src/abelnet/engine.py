"""Drive legal executions to completion.

A run repeatedly asks a scheduler for a legal move (a letter with count at
least 1) and processes it.  It ends in one of four ways:

* :class:`Halted` -- no letter is pending; the word processed is a complete
  legal execution and its letter-count vector is the odometer.
* :class:`NonHalting` -- a configuration recurred, so the segment between the
  two visits can be repeated forever and no complete execution exists.
* :class:`BudgetExhausted` -- the step budget ran out first.
* :class:`CapExceeded` -- the next legal move would push the odometer past a
  caller-supplied cap.  By the least action principle every complete
  execution then exceeds the cap too.

Scheduler policies: ``fifo``, ``lifo``, ``rr`` (round robin by vertex),
``greedy`` (largest count, ties to the lowest letter index) and
``random:SEED``.  The random policy draws with ``random.Random(seed)``
(MT19937) and picks ``active[int(rng.random() * len(active))]``; this
algorithm is versioned as ``mt19937-v1`` and is stable across Python releases.
"""
from __future__ import annotations

import bisect
import hashlib
import heapq
import random
import struct
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core import Configuration, Network, apply_word, is_complete, is_legal, step, word_vector

RANDOM_ALGORITHM = "mt19937-v1"
POLICIES = ("fifo", "lifo", "rr", "greedy", "random")
DEFAULT_POLICIES = ("fifo", "lifo", "rr", "greedy", "random:0")


# --- outcomes ---------------------------------------------------------------


@dataclass(frozen=True)
class Halted:
    odometer: tuple
    final: Configuration
    steps: int
    trace: tuple | None = field(default=None, compare=False)
    status = "halted"
    halted = True


@dataclass(frozen=True)
class NonHalting:
    config: Configuration
    segment: tuple  # letter indices, legal from ``config`` and returning to it
    start_step: int
    odometer: tuple
    status = "non-halting"
    halted = False


@dataclass(frozen=True)
class BudgetExhausted:
    odometer: tuple
    config: Configuration
    steps: int
    status = "budget-exhausted"
    halted = False


@dataclass(frozen=True)
class CapExceeded:
    odometer: tuple  # of the legal prefix, before the offending move
    letter: int
    word: tuple
    status = "cap-exceeded"
    halted = False

    @property
    def escape(self) -> tuple:
        """Count vector of the legal word ``word + letter``; it is not below the cap."""
        v = list(self.odometer)
        v[self.letter] += 1
        return tuple(v)


# --- schedulers -------------------------------------------------------------
#
# pop() returns a letter index whose count is >= 1; the engine then decrements
# that count.  push(i, c) is called after counts[i] was increased by c.


class _Fifo:
    def __init__(self, counts, net):
        self.q = deque([i, c] for i, c in enumerate(counts) if c > 0)

    def push(self, i, c):
        self.q.append([i, c])

    def pop(self):
        if not self.q:
            return None
        head = self.q[0]
        head[1] -= 1
        if not head[1]:
            self.q.popleft()
        return head[0]


class _Lifo(_Fifo):
    def __init__(self, counts, net):
        # input letters are stacked so the lowest index is served first
        self.q = [[i, c] for i, c in reversed(list(enumerate(counts))) if c > 0]

    def pop(self):
        if not self.q:
            return None
        top = self.q[-1]
        top[1] -= 1
        if not top[1]:
            self.q.pop()
        return top[0]


class _RoundRobin:
    def __init__(self, counts, net):
        self.counts = counts
        self.vertex_of = net.vertex_of
        self.offsets = net.offsets
        self.sizes = [p.alphabet_size for p in net.processors]
        self.pending = [0] * len(net.vertices)
        for i, c in enumerate(counts):
            self.pending[self.vertex_of[i]] += c
        self.active = [v for v, n in enumerate(self.pending) if n > 0]
        self.last = -1

    def push(self, i, c):
        v = self.vertex_of[i]
        if not self.pending[v]:
            bisect.insort(self.active, v)
        self.pending[v] += c

    def pop(self):
        if not self.active:
            return None
        k = bisect.bisect_right(self.active, self.last)
        v = self.active[k if k < len(self.active) else 0]
        self.last = v
        base = self.offsets[v]
        for s in range(self.sizes[v]):
            if self.counts[base + s] > 0:
                break
        self.pending[v] -= 1
        if not self.pending[v]:
            self.active.remove(v)
        return base + s


class _Greedy:
    def __init__(self, counts, net):
        self.counts = counts
        self.heap = [(-c, i) for i, c in enumerate(counts) if c > 0]
        heapq.heapify(self.heap)

    def push(self, i, c):
        heapq.heappush(self.heap, (-self.counts[i], i))

    def pop(self):
        heap, counts = self.heap, self.counts
        while heap:
            negc, i = heap[0]
            if counts[i] == -negc and counts[i] > 0:
                if counts[i] > 1:
                    heapq.heapreplace(heap, (1 - counts[i], i))
                else:
                    heapq.heappop(heap)
                return i
            heapq.heappop(heap)
        return None


class _Random:
    def __init__(self, counts, net, seed):
        self.counts = counts
        self.rng = random.Random(seed)
        self.active = [i for i, c in enumerate(counts) if c > 0]
        self.pos = {i: k for k, i in enumerate(self.active)}

    def push(self, i, c):
        if i not in self.pos:
            self.pos[i] = len(self.active)
            self.active.append(i)

    def pop(self):
        active = self.active
        if not active:
            return None
        k = int(self.rng.random() * len(active))
        i = active[k]
        if self.counts[i] == 1:
            last = active.pop()
            if last != i:
                active[k] = last
                self.pos[last] = k
            del self.pos[i]
        return i


def parse_policy(policy: str) -> tuple[str, int | None]:
    name, _, arg = str(policy).partition(":")
    if name not in POLICIES:
        raise ValueError(f"unknown scheduler {policy!r}; choose from fifo, lifo, rr, greedy, random:SEED")
    if name == "random":
        return name, int(arg) if arg else 0
    if arg:
        raise ValueError(f"scheduler {name!r} takes no argument")
    return name, None


def make_scheduler(policy: str, counts: list, net: Network):
    name, seed = parse_policy(policy)
    if name == "random":
        return _Random(counts, net, seed)
    return {"fifo": _Fifo, "lifo": _Lifo, "rr": _RoundRobin, "greedy": _Greedy}[name](counts, net)


# --- runs -------------------------------------------------------------------


def _mix_keys(n, salt):
    rng = random.Random(salt)
    return [rng.getrandbits(64) for _ in range(n)]


def _check_input(net, x, q):
    cfg = net.configuration(x, q)
    if any(c < 0 for c in cfg.counts):
        raise ValueError("input letter counts must be nonnegative")
    return cfg


def run(
    net: Network,
    x=None,
    q=None,
    scheduler: str = "fifo",
    budget: int = 100_000,
    *,
    trace: bool = False,
    odometer_cap=None,
    detect_cycles: bool = True,
):
    """Run legal moves chosen by ``scheduler`` until halting or ``budget`` steps.

    ``x`` is the input (mapping ``{letter: count}`` or a dense vector) and
    ``q`` the initial states (defaults to each processor's initial state).

    Recurrence detection keeps an incremental 64-bit hash of the
    configuration and records it whenever the pending-letter total is at a
    running minimum; the minimum is reset at power-of-two step counts.  A
    hash hit is confirmed by replaying the word to the earlier step.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    cfg0 = _check_input(net, x, q)
    counts = list(cfg0.counts)
    states = list(cfg0.states)
    odo = [0] * len(counts)
    cap = None if odometer_cap is None else net.vector(odometer_cap)
    sched = make_scheduler(scheduler, counts, net)
    procs, vertex_of, symbol_of, routes = net.processors, net.vertex_of, net.symbol_of, net.routes
    word = []

    letter_keys = _mix_keys(len(counts), 0x5EED)
    vertex_keys = _mix_keys(len(states), 0xF00D)
    h = sum(c * k for c, k in zip(counts, letter_keys)) + sum(
        hash(s) * k for s, k in zip(states, vertex_keys)
    )
    total = sum(counts)
    running_min = total
    seen = {}
    next_reset = 1

    steps = 0
    while True:
        a = sched.pop()
        if a is None:
            return Halted(
                tuple(odo),
                Configuration(tuple(counts), tuple(states)),
                steps,
                tuple(net.letters[i] for i in word) if trace else None,
            )
        if steps >= budget:
            return BudgetExhausted(tuple(odo), Configuration(tuple(counts), tuple(states)), steps)
        if cap is not None and odo[a] + 1 > cap[a]:
            return CapExceeded(tuple(odo), a, tuple(word))
        v = vertex_of[a]
        old = states[v]
        new, em = procs[v].process(symbol_of[a], old)
        states[v] = new
        counts[a] -= 1
        odo[a] += 1
        steps += 1
        word.append(a)
        total -= 1
        h += hash(new) * vertex_keys[v] - hash(old) * vertex_keys[v] - letter_keys[a]
        route = routes[v]
        for e, s, c in em:
            b = route[(e, s)]
            counts[b] += c
            total += c
            h += c * letter_keys[b]
            sched.push(b, c)

        if not detect_cycles:
            continue
        if steps >= next_reset:
            running_min = total
            next_reset *= 2
        if total <= running_min:
            running_min = total
            key = (h & 0xFFFFFFFFFFFFFFFF, total)
            earlier = seen.get(key)
            if earlier is not None:
                here = Configuration(tuple(counts), tuple(states))
                then = apply_word(net, cfg0, word[:earlier])
                if then == here:
                    return NonHalting(then, tuple(word[earlier:]), earlier, tuple(odo))
            seen[key] = steps


def _outcome_key(out):
    if out.halted:
        return (True, out.odometer, out.final.states)
    return (False,)


@dataclass
class SchedulerComparison:
    outcomes: dict
    agree: bool
    counterexample: dict | None = None

    def summary(self) -> dict:
        return {
            "agree": self.agree,
            "statuses": {p: o.status for p, o in self.outcomes.items()},
            "counterexample": self.counterexample,
        }


def run_all_schedulers(net: Network, x=None, q=None, budget: int = 100_000, policies=DEFAULT_POLICIES):
    """Run every policy and compare halting status, odometer and final states.

    Non-halting and budget-exhausted runs count as the same halting status:
    if any policy halts within the budget every abelian run must, since run
    time does not depend on the execution.
    """
    outcomes = {p: run(net, x, q, p, budget) for p in policies}
    keys = {p: _outcome_key(o) for p, o in outcomes.items()}
    ref_policy = policies[0]
    for p in policies[1:]:
        if keys[p] != keys[ref_policy]:
            a, b = outcomes[ref_policy], outcomes[p]
            bundle = {"policies": (ref_policy, p), "statuses": (a.status, b.status)}
            if a.halted and b.halted:
                bundle["odometers"] = (net.as_dict(a.odometer), net.as_dict(b.odometer))
                bundle["final_states"] = (a.final.states, b.final.states)
            return SchedulerComparison(outcomes, False, bundle)
    return SchedulerComparison(outcomes, True)


def run_parallel(net: Network, x=None, q=None, workers: int = 2, seed: int = 0, budget: int = 100_000):
    """Process letters at distinct vertices concurrently, in rounds.

    Each round snapshots every vertex's pending letters, hands vertices to
    ``workers`` threads (assignment shuffled by ``seed``), and merges the
    emissions afterwards.  The result equals the sequential fifo run; when
    the rounds exhaust the budget, or a round boundary repeats an earlier
    configuration (so the run cannot halt), the sequential run is returned
    so that certificates match too.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    cfg0 = _check_input(net, x, q)
    counts = list(cfg0.counts)
    states = list(cfg0.states)
    odo = [0] * len(counts)
    rng = random.Random(seed)
    steps = 0
    seen = set()

    def drain(vertices):
        results = []
        for v, pending in vertices:
            proc, st = net.processors[v], states[v]
            produced: dict = {}
            for i, n in pending:
                sym = net.symbol_of[i]
                for _ in range(n):
                    st, em = proc.process(sym, st)
                    for e, s, c in em:
                        b = net.routes[v][(e, s)]
                        produced[b] = produced.get(b, 0) + c
            results.append((v, st, pending, produced))
        return results

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            work = {}
            for i, c in enumerate(counts):
                if c > 0:
                    work.setdefault(net.vertex_of[i], []).append((i, c))
            if not work:
                return Halted(tuple(odo), Configuration(tuple(counts), tuple(states)), steps)
            round_steps = sum(c for items in work.values() for _, c in items)
            snapshot = (tuple(counts), tuple(states))
            if steps + round_steps > budget or snapshot in seen:
                return run(net, x, q, "fifo", budget)
            seen.add(snapshot)
            order = sorted(work)
            rng.shuffle(order)
            shards = [[(v, work[v]) for v in order[k::workers]] for k in range(workers)]
            merged = []
            for res in pool.map(drain, shards):
                merged.extend(res)
            for v, st, pending, produced in sorted(merged, key=lambda r: r[0]):
                states[v] = st
                for i, n in pending:
                    counts[i] -= n
                    odo[i] += n
                for b, c in produced.items():
                    counts[b] += c
            steps += round_steps


# --- least action -----------------------------------------------------------


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class LeastActionVerdict:
    holds: bool
    odometer: tuple
    word_vector: tuple
    margin: tuple  # |w'| - odometer
    length_margin: int  # s - r


def check_least_action(net: Network, x, q, complete_word, budget: int | None = None) -> LeastActionVerdict:
    """Compare the legal odometer with the count vector of a complete execution."""
    cfg = net.configuration(x, q)
    word = list(complete_word)
    if not is_complete(apply_word(net, cfg, word)):
        raise PreconditionError("the given word is not a complete execution for this input")
    # every legal execution is at most as long as a complete one
    out = run(net, x, q, "fifo", len(word) + 1 if budget is None else budget)
    wv = word_vector(net, word)
    if not out.halted:
        return LeastActionVerdict(False, out.odometer, wv, (), 0)
    margin = tuple(b - a for a, b in zip(out.odometer, wv))
    holds = all(m >= 0 for m in margin) and out.steps <= len(word)
    return LeastActionVerdict(holds, out.odometer, wv, margin, len(word) - out.steps)


def replay_certificate(net: Network, cert: NonHalting) -> bool:
    """True iff the certificate's segment is legal from its configuration and returns to it."""
    cfg = cert.config
    for a in cert.segment:
        if not is_legal(net, cfg, a):
            return False
        cfg = step(net, cfg, a)
    return len(cert.segment) > 0 and cfg == cert.config


# --- traces -----------------------------------------------------------------


def counts_digest(counts) -> str:
    """64-bit BLAKE2b digest of a counts vector packed as little-endian int64."""
    data = struct.pack(f"<{len(counts)}q", *counts)
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def trace_records(net: Network, cfg: Configuration, word):
    """Yield one record per step: index, letter vertex and symbol, post-step digest."""
    for k, a in enumerate(word):
        cfg = step(net, cfg, a)
        letter = net.letters[net.index(a)]
        yield {"step": k, "vertex": letter.vertex, "symbol": letter.symbol, "digest": counts_digest(cfg.counts)}
