import pytest

from abelnet.core import Network, Processor
from abelnet.processors import SandpileSpec, SinkCounterSpec, build, nonabelian_mutant
from abelnet.verify import check_abelian, check_local_to_global, check_monotone, feed_one_at_a_time

from conftest import L, sandpile_path, sandpile_with_sink, two_cycle


class LastLetter(Processor):
    """Remembers the last symbol: abelian emissions (none) but order-dependent state."""

    alphabet_size = 2
    out_edges = ()

    def process(self, symbol, q):
        return symbol, ()

    def finite_states(self):
        return (0, 1)


class Shrinking(Processor):
    """Emits on the first letter only if it is a 0: a permutation-invariant count
    would need the same letters in every order, so this fails both checks."""

    alphabet_size = 2
    out_edges = ("e",)

    def process(self, symbol, q):
        if q == 0 and symbol == 0:
            return 1, (("e", 0, 1),)
        return 1, ()

    def finite_states(self):
        return (0, 1)


@pytest.mark.parametrize("seed", range(3))
def test_mutant_fails_with_replayable_witness(seed):
    m = nonabelian_mutant("out")
    rep = check_abelian(m, trials=1000, seed=seed)
    assert not rep.passed
    assert all(f.replay(m) for f in rep.failures)
    assert "witness" in rep.describe()


def test_state_divergence_is_reported():
    rep = check_abelian(LastLetter(), trials=200)
    assert not rep.passed
    assert {f.kind for f in rep.failures} == {"state"}


def test_report_records_soundness_parameters():
    rep = check_abelian(build(SandpileSpec(("a",), 3)), trials=50, max_len=5, seed=9)
    d = rep.to_dict()
    assert d["passed"] and d["trials"] == 50 and d["max_len"] == 5 and d["seed"] == 9
    assert d["states_sampled"] == 3


def test_empty_alphabet_passes():
    p = build(SinkCounterSpec(alphabet_size=0))
    assert check_abelian(p).passed and check_monotone(p).passed


def test_monotone_check():
    assert check_monotone(build(SandpileSpec(("a", "b"), 3)), trials=300).passed
    rep = check_monotone(Shrinking(), trials=300)
    assert not rep.passed
    assert all(f.kind == "not-nested" and f.replay(Shrinking()) for f in rep.failures)


def test_local_to_global_on_sandpile():
    net = sandpile_with_sink(6, seed=2)
    inputs = [[L(0)] * 5 + [L(3)] * 4 + [L(5)] * 2]
    rep = check_local_to_global(net, [0, 1, 2, 3, 4, 5], inputs, trials=150)
    assert rep.passed and rep.orders_tried == 5


def test_local_to_global_empty_interior_is_vacuous():
    rep = check_local_to_global(sandpile_path(2), [])
    assert rep.passed and rep.interior == ()


def test_local_to_global_detects_mutant_inside():
    procs = {"m": nonabelian_mutant("mc"), "c": build(SinkCounterSpec(counting=True))}
    net = Network(["m", "c"], [("m", "c", "mc")], procs)
    rep = check_local_to_global(net, ["m"], [[L("m", 0), L("m", 1)]], orders=10)
    assert not rep.passed


def test_local_to_global_inconclusive_when_interior_loops():
    rep = check_local_to_global(two_cycle(), ["u", "v"], budget=100)
    assert rep.inconclusive is not None and not rep.passed


def test_feed_one_at_a_time_matches_batch():
    from abelnet.engine import run

    net = sandpile_with_sink(5, seed=4)
    word = [L(0), L(2), L(0), L(4), L(2), L(0)]
    states, odo = feed_one_at_a_time(net, word)
    batch = run(net, {a: word.count(a) for a in set(word)})
    assert states == batch.final.states and odo == batch.odometer
