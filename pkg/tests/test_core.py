import random

import pytest
from hypothesis import given, strategies as st

from abelnet.core import (
    CountOverflowError,
    Network,
    ProcessorError,
    TopologyError,
    UnknownLetterError,
    apply_word,
    collapse_subnetwork,
    is_complete,
    is_legal,
    message_count,
    step,
    word_vector,
)
from abelnet.engine import run
from abelnet.generators import random_network
from abelnet.processors import (
    OilWaterSpec,
    RotorSpec,
    SandpileSpec,
    SinkCounterSpec,
    build,
)
from abelnet.verify import check_abelian

from conftest import L, project, sandpile_path


def counter_net():
    return Network(["v"], [], {"v": build(SinkCounterSpec(counting=True))})


def test_step_counter():
    net = counter_net()
    cfg = net.configuration({L("v"): 1}, (5,))
    out = step(net, cfg, L("v"))
    assert out.counts == (0,) and out.states == (6,)


def test_step_sandpile_latent_then_topple():
    procs = {"v": build(SandpileSpec(("vu",), threshold=2)), "u": build(SinkCounterSpec(counting=True))}
    net = Network(["v", "u"], [("v", "u", "vu")], procs)
    cfg = net.configuration({L("v"): 1}, (0, 0))
    cfg = step(net, cfg, L("v"))
    assert cfg.counts == (0, 0) and cfg.states == (1, 0)
    cfg = step(net, cfg, L("v"))
    assert cfg.counts == (-1, 1) and cfg.states == (0, 0)


def test_step_allows_negative_counts():
    net = counter_net()
    out = step(net, net.configuration(), L("v"))
    assert out.counts == (-1,)


def test_step_unknown_letter():
    net = counter_net()
    with pytest.raises(UnknownLetterError):
        step(net, net.configuration(), L("nope"))
    with pytest.raises(UnknownLetterError):
        step(net, net.configuration(), L("v", 1))


def test_counts_overflow_is_an_error():
    net = sandpile_path(1)
    cfg = net.configuration(states=(0, 0))
    cfg = type(cfg)((0, 2**63 - 1), cfg.states)
    with pytest.raises(CountOverflowError):
        step(net, cfg, L("v1"))


def test_apply_word_empty_is_identity():
    net = sandpile_path(2)
    cfg = net.configuration({L("v1"): 3})
    assert apply_word(net, cfg, []) == cfg


def test_apply_word_permutation_invariant():
    net = sandpile_path(3, threshold=2)
    cfg = net.configuration({L("v1"): 4, L("v2"): 1})
    w = [L("v1"), L("v2"), L("v1"), L("v3"), L("v1"), L("s")]
    rng = random.Random(1)
    for _ in range(20):
        w2 = w[:]
        rng.shuffle(w2)
        assert apply_word(net, cfg, w2) == apply_word(net, cfg, w)


def chip_oracle(thresholds, succ, chips):
    """Independent chip-firing on a path: topple any vertex holding >= r chips."""
    chips = dict(chips)
    fired = {v: 0 for v in thresholds}
    while True:
        ready = [v for v in thresholds if chips.get(v, 0) >= thresholds[v]]
        if not ready:
            return chips, fired
        v = ready[0]
        chips[v] -= thresholds[v]
        fired[v] += 1
        chips[succ[v]] = chips.get(succ[v], 0) + 1


def test_apply_word_full_legal_execution_on_chain():
    net = sandpile_path(2, threshold=2)
    cfg = net.configuration({L("v1"): 5})
    out = run(net, cfg.counts, cfg.states, trace=True)
    final = apply_word(net, cfg, out.trace)
    assert is_complete(final)
    assert final == out.final
    # oracle: v1 topples twice (5 chips, r=2), v2 gets 2 chips and topples once
    chips, fired = chip_oracle({"v1": 2, "v2": 2}, {"v1": "v2", "v2": "s"}, {"v1": 5})
    assert fired == {"v1": 2, "v2": 1}
    assert final.states[:2] == (chips["v1"], chips["v2"])


def test_message_count_empty_word():
    net = sandpile_path(2)
    assert message_count(net, net.initial_states(), []) == (0, 0, 0)


def test_message_count_rotor_single_letter():
    procs = {"r": build(RotorSpec(("a", "b", "c"))), "s": build(SinkCounterSpec())}
    net = Network(["r", "s"], [("r", "s", "a"), ("r", "s", "b"), ("r", "r", "c")], procs)
    for q in range(3):
        n = message_count(net, (q, 0), [L("r")])
        assert sum(n) == 1 and max(n) == 1


def test_message_count_oil_water_telescopes():
    p = build(OilWaterSpec(("o",), ("w",), 2, 3))
    net = Network(["v", "s"], [("v", "s", "o"), ("v", "s", "w")], {"v": p, "s": build(SinkCounterSpec(alphabet_size=2))})
    word = [L("v", s) for s in (0, 1, 1, 0, 0, 1, 1, 0, 1, 0, 1)]
    # letter-by-letter: topplings only depend on the end states
    oil, water = word.count(L("v", 0)), word.count(L("v", 1))
    fired = min(oil // 2, water // 3)
    assert message_count(net, ((0, 0), 0), word) == (0, 0, fired, fired)


def test_is_legal_and_complete():
    net = counter_net()
    cfg = lambda c: net.configuration((c,))
    assert is_legal(net, cfg(1), L("v"))
    assert not is_legal(net, cfg(0), L("v"))
    assert not is_legal(net, cfg(-3), L("v"))
    with pytest.raises(UnknownLetterError):
        is_legal(net, cfg(0), L("w"))
    assert is_complete(cfg(0))
    assert not is_complete(cfg(1))
    assert is_complete(cfg(-2))


def test_topology_validation():
    p = build(SinkCounterSpec())
    with pytest.raises(TopologyError):
        Network(["a"], [("a", "b", "e")], {"a": p})
    with pytest.raises(TopologyError):
        Network(["a", "a"], [], {"a": p})
    with pytest.raises(ProcessorError):
        Network(["a", "b"], [("a", "b", "e")], {"a": p, "b": p})


def test_multiplicity():
    procs = {"a": build(SandpileSpec(("e1", "e2", "e3"))), "b": build(SinkCounterSpec())}
    net = Network(["a", "b"], [("a", "b", "e1"), ("a", "b", "e2"), ("a", "a", "e3")], procs)
    assert net.multiplicity("a", "b") == 2
    assert net.multiplicity("a", "a") == 1
    assert net.multiplicity("b", "a") == 0


# --- collapse ---------------------------------------------------------------


def test_collapse_single_vertex_matches_processor():
    net = sandpile_path(2, threshold=3)
    coll = collapse_subnetwork(net, ["v1"])
    proc = net.processors[0]
    for q in range(3):
        s1, em1 = coll.process(0, (q,))
        s2, em2 = proc.process(0, q)
        assert s1 == (s2,) and em1 == em2


def test_collapse_chain_matches_engine():
    net = sandpile_path(2, threshold=2)
    coll = collapse_subnetwork(net, ["v1", "v2"])
    state = coll.initial_state
    delivered = 0
    for _ in range(9):
        state, em = coll.process(0, state)
        delivered += sum(c for _, _, c in em)
    out = run(net, {L("v1"): 9})
    assert delivered == out.odometer[net.index(L("s"))]
    assert state == out.final.states[:2]


def test_collapse_is_abelian():
    net = sandpile_path(3, threshold=2)
    coll = collapse_subnetwork(net, ["v1", "v2", "v3"])
    assert check_abelian(coll, trials=300, seed=4).passed


# --- invariants over random networks ----------------------------------------


def _random_setting(seed):
    rng = random.Random(seed)
    inst = random_network(rng)
    counts = tuple(c + rng.randint(-2, 2) for c in inst.x)
    return rng, inst.net, inst.net.configuration(counts, inst.q)


@given(st.integers(0, 10**6))
def test_letters_commute(seed):
    rng, net, cfg = _random_setting(seed)
    a, b = rng.randrange(len(net.letters)), rng.randrange(len(net.letters))
    assert step(net, step(net, cfg, a), b) == step(net, step(net, cfg, b), a)


@given(st.integers(0, 10**6))
def test_closed_form(seed):
    rng, net, cfg = _random_setting(seed)
    w = [rng.randrange(len(net.letters)) for _ in range(rng.randint(0, 25))]
    out = apply_word(net, cfg, w)
    N = message_count(net, cfg.states, w)
    wv = word_vector(net, w)
    assert out.counts == tuple(x - k + n for x, k, n in zip(cfg.counts, wv, N))


@given(st.integers(0, 10**6))
def test_message_count_monotone(seed):
    rng, net, cfg = _random_setting(seed)
    big = [rng.randrange(len(net.letters)) for _ in range(rng.randint(0, 25))]
    small = [a for a in big if rng.random() < 0.5]
    rng.shuffle(small)
    lo, hi = message_count(net, cfg.states, small), message_count(net, cfg.states, big)
    assert all(a <= b for a, b in zip(lo, hi))


@given(st.integers(0, 10**6))
def test_message_count_additive_across_vertices(seed):
    rng, net, cfg = _random_setting(seed)
    a, b = rng.randrange(len(net.letters)), rng.randrange(len(net.letters))
    if net.vertex_of[a] == net.vertex_of[b]:
        return
    ab = message_count(net, cfg.states, [a, b])
    na, nb = message_count(net, cfg.states, [a]), message_count(net, cfg.states, [b])
    assert ab == tuple(x + y for x, y in zip(na, nb))


@given(st.integers(0, 10**6))
def test_message_count_splits_by_vertex(seed):
    rng, net, cfg = _random_setting(seed)
    w = [rng.randrange(len(net.letters)) for _ in range(rng.randint(0, 20))]
    total = [0] * len(net.letters)
    for v in net.vertices:
        part = message_count(net, cfg.states, project(net, w, v))
        total = [t + p for t, p in zip(total, part)]
    assert tuple(total) == message_count(net, cfg.states, w)
