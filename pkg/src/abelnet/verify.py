"""Sampling checkers for abelianness, monotonicity and local-to-global collapse.

These are statistical: a reported failure is a replayable proof that the
processor is not abelian, while a clean report is evidence only.  Word
length and state sample sizes are the soundness boundary and are recorded
in every report.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field

from .core import Network, NonHaltingError, Processor, collapse_subnetwork, run_word_local
from .engine import run

DEFAULT_MAX_LEN = 12
DEFAULT_STATE_CAP = 64


@dataclass(frozen=True)
class Divergence:
    state: object
    word: tuple
    other: tuple
    kind: str  # "state" or "emission" (or "not-nested" for monotonicity)
    detail: dict

    def replay(self, proc: Processor) -> bool:
        """Re-run the pair and confirm the divergence is still there."""
        q1, em1 = run_word_local(proc, self.word, self.state)
        q2, em2 = run_word_local(proc, self.other, self.state)
        if self.kind == "state":
            return q1 != q2
        if self.kind == "emission":
            return _nonzero(em1) != _nonzero(em2)
        return not _leq(em1, em2)


@dataclass
class CheckReport:
    check: str
    trials: int
    max_len: int
    states_sampled: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["failures"] = [
            {**asdict(f), "state": repr(f.state), "detail": {repr(k): v for k, v in f.detail.items()}}
            for f in self.failures
        ]
        return d

    def describe(self) -> str:
        head = (
            f"{self.check}: {'PASS' if self.passed else 'FAIL'} "
            f"({self.trials} trials, words <= {self.max_len}, {self.states_sampled} states, seed {self.seed})"
        )
        if self.passed:
            return head
        f = self.failures[0]
        return head + f"\n  witness: state {f.state!r}, {list(f.word)} vs {list(f.other)} ({f.kind})"


def _nonzero(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def _leq(small: dict, big: dict) -> bool:
    return all(big.get(k, 0) >= v for k, v in small.items())


def _states(proc, rng, states, cap):
    if states is None:
        return proc.sample_states(rng, cap)
    states = list(states)
    if proc.initial_state not in states:
        states.insert(0, proc.initial_state)
    return states[:cap]


def check_abelian(
    proc: Processor,
    trials: int = 1000,
    max_len: int = DEFAULT_MAX_LEN,
    seed: int = 0,
    states=None,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CheckReport:
    """Compare a random word with a random permutation of it, from sampled states.

    Final states and per-edge emission counts must match.  ``states`` adds
    caller-chosen start states (useful for infinite state spaces).
    """
    rng = random.Random(seed)
    pool = _states(proc, rng, states, state_cap)
    report = CheckReport("abelian", trials, max_len, len(pool), seed)
    k = proc.alphabet_size
    if not k:
        return report
    for _ in range(trials):
        q = rng.choice(pool)
        w = tuple(rng.randrange(k) for _ in range(rng.randint(1, max_len)))
        other = list(w)
        rng.shuffle(other)
        other = tuple(other)
        q1, em1 = run_word_local(proc, w, q)
        q2, em2 = run_word_local(proc, other, q)
        if q1 != q2:
            report.failures.append(Divergence(q, w, other, "state", {"final": (q1, q2)}))
        elif _nonzero(em1) != _nonzero(em2):
            keys = set(em1) | set(em2)
            diff = {key: (em1.get(key, 0), em2.get(key, 0)) for key in keys if em1.get(key, 0) != em2.get(key, 0)}
            report.failures.append(Divergence(q, w, other, "emission", diff))
    return report


def check_monotone(
    proc: Processor,
    trials: int = 1000,
    seed: int = 0,
    max_len: int = DEFAULT_MAX_LEN,
    states=None,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CheckReport:
    """For ``|w| <= |w'|`` (``w`` a random sub-multiset of ``w'``), emissions must nest."""
    rng = random.Random(seed)
    pool = _states(proc, rng, states, state_cap)
    report = CheckReport("monotone", trials, max_len, len(pool), seed)
    k = proc.alphabet_size
    if not k:
        return report
    for _ in range(trials):
        q = rng.choice(pool)
        big = tuple(rng.randrange(k) for _ in range(rng.randint(0, max_len)))
        small = [a for a in big if rng.random() < 0.5]
        rng.shuffle(small)
        small = tuple(small)
        _, em_small = run_word_local(proc, small, q)
        _, em_big = run_word_local(proc, big, q)
        if not _leq(em_small, em_big):
            diff = {key: (v, em_big.get(key, 0)) for key, v in em_small.items() if em_big.get(key, 0) < v}
            report.failures.append(Divergence(q, small, big, "not-nested", diff))
    return report


@dataclass
class LocalGlobalReport:
    interior: tuple
    abelian: CheckReport | None
    orders_tried: int
    mismatches: list = field(default_factory=list)
    inconclusive: str | None = None

    @property
    def passed(self) -> bool:
        return (
            self.inconclusive is None
            and not self.mismatches
            and (self.abelian is None or self.abelian.passed)
        )


def feed_one_at_a_time(net: Network, letters, q=None, budget: int = 100_000):
    """Input letters one by one, running to completion after each.

    Returns the final states and the total odometer, or raises
    :class:`NonHaltingError`.
    """
    states = net.initial_states() if q is None else tuple(q)
    total = [0] * len(net.letters)
    for a in letters:
        out = run(net, {a: 1}, states, "fifo", budget)
        if not out.halted:
            raise NonHaltingError(f"network did not halt after input {a!r} ({out.status})")
        states = out.final.states
        total = [t + o for t, o in zip(total, out.odometer)]
    return states, tuple(total)


def check_local_to_global(
    net: Network,
    interior,
    inputs=(),
    seed: int = 0,
    trials: int = 200,
    orders: int = 5,
    budget: int = 100_000,
) -> LocalGlobalReport:
    """Collapse ``interior`` to one processor and test it, then permute whole-network inputs.

    ``inputs`` is a list of input words (letters at interior vertices).  For
    each, several random orders are fed one letter at a time and the final
    states and letters delivered to output vertices must agree.
    """
    interior = tuple(v for v in net.vertices if v in set(interior))
    if not interior:
        return LocalGlobalReport(interior, None, 0)
    rng = random.Random(seed)
    collapsed = collapse_subnetwork(net, interior, budget)
    try:
        abel = check_abelian(collapsed, trials=trials, seed=seed, max_len=8)
    except NonHaltingError as exc:
        return LocalGlobalReport(interior, None, 0, inconclusive=str(exc))
    report = LocalGlobalReport(interior, abel, 0)
    outputs = [i for i, a in enumerate(net.letters) if a.vertex not in set(interior)]
    for word in inputs:
        word = list(word)
        try:
            ref_states, ref_odo = feed_one_at_a_time(net, word, budget=budget)
            for _ in range(orders):
                perm = word[:]
                rng.shuffle(perm)
                st, odo = feed_one_at_a_time(net, perm, budget=budget)
                report.orders_tried += 1
                delivered = tuple(odo[i] for i in outputs)
                if st != ref_states or delivered != tuple(ref_odo[i] for i in outputs):
                    report.mismatches.append({"order": perm, "reference": word})
        except NonHaltingError as exc:
            report.inconclusive = str(exc)
            break
    return report
