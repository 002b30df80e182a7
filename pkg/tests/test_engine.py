import dataclasses
import math
import random

import numpy as np
import pytest

from conftest import audited_step, ground_absorber, ladder_emitter, random_scenario, two_level_emitter
from oracles import born_enumeration
from rti_sim import engine
from rti_sim.amplitudes import prob_cw, prob_no_cw
from rti_sim.engine import (
    EnsembleStats,
    Scenario,
    SimulationState,
    Status,
    collapse,
    cw_trials,
    run_by_steps,
    run_ensemble,
    run_rng,
    run_trajectory,
    simulate_runs,
    step,
)
from rti_sim.errors import ScenarioError
from rti_sim.substratum import AbsorberState, BoundStateSpec, Channel, DetectorSpec, EmitterState, mk_offer_wave


def sigma3(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


def simple(absorbers, channels=(Channel("R", "r", 1),), alpha=0.007, **kw):
    return Scenario((two_level_emitter(),), tuple(absorbers), (), channels, alpha=alpha, **kw)


class TestScenario:
    def test_needs_emitter(self):
        with pytest.raises(ScenarioError):
            Scenario((), (), (), (Channel("R", "r", 1),))

    def test_duplicate_ids(self):
        with pytest.raises(ScenarioError):
            simple([ground_absorber("E", "R")])

    def test_unknown_channel(self):
        with pytest.raises(ScenarioError):
            simple([ground_absorber("a", "Q")])

    def test_normalizes(self):
        sc = simple([], channels=(Channel("L", "l", 1), Channel("R", "r", 1)))
        assert [c.prob for c in sc.channels] == pytest.approx([0.5, 0.5])

    @pytest.mark.parametrize("kw", [{"alpha": 0.0}, {"alpha": 1.2}, {"max_ticks": 0}, {"seed": -1}, {"seed": 2**64}])
    def test_field_checks(self, kw):
        with pytest.raises(ScenarioError):
            simple([ground_absorber("a", "R")], **kw)


class TestCwTrials:
    def test_empty(self):
        assert cw_trials([], 0.5, run_rng(1, 0)) == set()

    def test_certain(self):
        assert cw_trials(["a", "b"], 1.0, run_rng(1, 0)) == {"a", "b"}

    def test_large_block_never_empty(self):
        rng = run_rng(7, 0)
        ids = [f"x{k}" for k in range(10_000)]
        empties = sum(not cw_trials(ids, 0.007, rng) for _ in range(1000))
        assert prob_no_cw(0.007, 10_000).prob < 1e-30
        assert empties == 0

    def test_rate(self):
        rng = run_rng(3, 0)
        n = 20_000
        hits = sum(len(cw_trials(["a"], 0.2, rng)) for _ in range(n))
        assert abs(hits / n - 0.2) <= sigma3(0.2, n)


class TestCollapse:
    def _ow(self, amps, reg):
        return mk_offer_wave(two_level_emitter(), (1, 0), [Channel(c, c, a) for c, a in amps], reg)

    def test_single(self):
        reg = [ground_absorber("a", "R")]
        ow = self._ow([("R", 1)], reg)
        rng = run_rng(0, 0)
        assert {collapse(ow, {"R": ["a"]}, {"a"}, rng) for _ in range(20)} == {"a"}

    def test_needs_responder(self):
        reg = [ground_absorber("a", "R")]
        with pytest.raises(ValueError):
            collapse(self._ow([("R", 1)], reg), {"R": ["a"]}, set(), run_rng(0, 0))

    @pytest.mark.parametrize("amps", [(1.0, 1.0), (0.8, 0.6)])
    def test_born_frequencies(self, amps, frozen):
        reg = [ground_absorber("a", "L"), ground_absorber("c", "L"), ground_absorber("b", "R")]
        ow = self._ow([("L", amps[0]), ("R", amps[1])], reg)
        rng = run_rng(11, 0)
        n = 40_000
        # the winner is drawn regardless of who responded
        wins = sum(collapse(ow, {"L": ["a", "c"], "R": ["b"]}, {"b"}, rng) in ("a", "c") for _ in range(n))
        want = ow.component("L").prob
        row = next(r for r in frozen["born"] if r["rule"] == "all" and r["weights"]["L"] == pytest.approx(want))
        assert row["freq"]["L"] == pytest.approx(want, abs=1e-12)
        assert abs(wins / n - want) <= sigma3(want, n)


def test_responders_only_rule_breaks_born(frozen):
    rows = [r for r in frozen["born"] if r["weights"]["L"] == 0.64]
    full = next(r for r in rows if r["rule"] == "all")["freq"]["L"]
    resp = next(r for r in rows if r["rule"] == "responders")["freq"]["L"]
    assert full == pytest.approx(0.64, abs=1e-12)
    # more than 3 sigma at 10^5 runs away from the Born weight
    assert abs(resp - 0.64) > sigma3(0.64, 100_000)
    assert born_enumeration({"L": 0.64, "R": 0.36}, {"L": 2, "R": 1}, 0.007)["L"] == pytest.approx(full)


class TestActualize:
    def test_two_level(self):
        sc = simple([ground_absorber("a", "R")])
        st = SimulationState(sc)
        ow = st.offer_for(0, 1).ow
        before = st.total_energy()
        t = st.actualize(ow, "a", 1)
        assert st.emitters[0].current_level == 0 and st.absorbers[0].current_level == 1
        assert t.omega == 1.0 and st.total_energy() == before

    def test_three_level(self):
        spec = BoundStateSpec.from_energies([0.0, 1.0, 1.5], [(2, 1)], default_element=1.0)
        absorber = AbsorberState("a", BoundStateSpec.from_energies([0.0, 0.5, 2.0], [(0, 1)], default_element=1.0), 0, "R")
        sc = Scenario((EmitterState("E", spec, 2),), (absorber,), (), (Channel("R", "r", 1),))
        st = SimulationState(sc)
        t = st.actualize(st.offer_for(0, 1).ow, "a", 1)
        assert st.emitters[0].current_level == 1 and st.absorbers[0].current_level == 1
        assert t.omega == 0.5 and t.absorber_transition == (0, 1)

    def test_detector_constituent(self):
        sc = Scenario((two_level_emitter(),), (), (DetectorSpec("D", "R", 5, 1.0),), (Channel("R", "r", 1),))
        st = SimulationState(sc, build_causet=True)
        t = st.actualize(st.offer_for(0, 1).ow, "D#3", 1)
        assert t.winner_id == "D#3" and t.winner_system == "D"
        assert st.detectors[0].n_excited == 1 and len(st.causet) == 2


class TestStep:
    def test_no_absorbers(self):
        sc = simple([ground_absorber("a", "R", gap=3.0)])
        st = SimulationState(sc)
        assert step(st, run_rng(0, 0)) == []
        assert st.status is Status.NO_ABSORBERS
        assert run_trajectory(sc).status is Status.NO_ABSORBERS

    def test_certain_pair(self):
        sc = simple([ground_absorber("a", "R"), ground_absorber("b", "R")], alpha=1.0)
        (out,) = step(SimulationState(sc), run_rng(0, 0))
        assert out.transaction is not None
        assert len(out.cw_set) == 2 and len(out.nulls) == 1
        assert out.nulls[0].absorber_id != out.transaction.winner_id

    def test_ground_emitter_is_inert(self):
        em = EmitterState("E", BoundStateSpec.two_level(1.0, upward=False), 0)
        sc = Scenario((em,), (ground_absorber("a", "R"),), (), (Channel("R", "r", 1),))
        st = SimulationState(sc)
        assert step(st, run_rng(0, 0)) == [] and st.status is Status.EXHAUSTED

    def test_per_tick_rate(self):
        sc = simple([ground_absorber("a", "R")], max_ticks=1)
        stats = run_ensemble(sc, 40_000)
        p = stats.transactions / stats.runs
        assert abs(p - 0.007) <= sigma3(0.007, 40_000)


class TestEnsemble:
    def test_certain_single(self):
        sc = simple([ground_absorber("a", "R")], alpha=1.0)
        stats = run_ensemble(sc, 1)
        assert stats.absorber_frequencies == {"a": 1.0}
        assert stats.mean_ticks_to_transaction == 1.0

    def test_geometric_waiting_time(self):
        absorbers = [ground_absorber(f"a{k}", "R") for k in range(100)]
        sc = simple(absorbers, max_ticks=10_000)
        stats = run_ensemble(sc, 10_000)
        want = 1 / prob_cw(0.007, 100)
        assert stats.mean_ticks_to_transaction == pytest.approx(want, rel=0.05)

    def test_macro_detector_fires_first_tick(self):
        sc = Scenario((two_level_emitter(),), (), (DetectorSpec("D", "R", 10**23, 1.0),), (Channel("R", "r", 1),), max_ticks=5)
        stats = run_ensemble(sc, 200)
        assert stats.mean_ticks_to_transaction == 1.0 and stats.absorber_counts == {"D": 200}

    def test_frequencies_sum_to_one(self):
        sc = simple([ground_absorber("a", "L"), ground_absorber("b", "R")], channels=(Channel("L", "l", 0.6), Channel("R", "r", 0.8)))
        stats = run_ensemble(sc, 3000)
        assert math.fsum(stats.channel_frequencies.values()) == pytest.approx(1.0)

    def test_runs_must_be_positive(self):
        with pytest.raises(ValueError):
            run_ensemble(simple([ground_absorber("a", "R")]), 0)

    def test_thread_count_invariance(self):
        sc = simple([ground_absorber("a", "L"), ground_absorber("b", "R")], channels=(Channel("L", "l", 1), Channel("R", "r", 1)))
        one = run_ensemble(sc, 4000, workers=1)
        many = run_ensemble(sc, 4000, workers=8)
        assert one.to_json() == many.to_json()

    def test_run_streams_are_order_free(self):
        sc = simple([ground_absorber("a", "R")])
        batch = simulate_runs(sc, 50)
        alone = run_trajectory(sc, 37)
        assert batch[37].first_transaction == alone.first_transaction

    def test_analytic_detector_matches_bernoulli(self, monkeypatch):
        sc = Scenario((two_level_emitter(),), (), (DetectorSpec("D", "R", 300, 1.0),), (Channel("R", "r", 1),), max_ticks=1)
        n = 20_000
        explicit = run_ensemble(sc, n).transactions / n
        monkeypatch.setattr(engine, "ANALYTIC_THRESHOLD", 10)
        analytic = run_ensemble(sc, n).transactions / n
        p = prob_cw(0.007, 300)
        assert abs(explicit - p) <= sigma3(p, n)
        assert abs(analytic - p) <= sigma3(p, n)


def test_amplitude_weighting_mode():
    strong = AbsorberState("s", BoundStateSpec.two_level(1.0, matrix_element=0.3), 0, "R")
    weak = AbsorberState("w", BoundStateSpec.two_level(1.0, matrix_element=0.1), 0, "R")
    sc = Scenario((two_level_emitter(),), (strong, weak), (), (Channel("R", "r", 1),), alpha=0.5, amplitude_tau=1.0)
    stats = run_ensemble(sc, 20_000)
    want = 0.09 / (0.09 + 0.01)
    assert abs(stats.absorber_frequencies["s"] - want) <= sigma3(want, 20_000)


def _audit(sc, rng):
    """Step a scenario to the end, checking per-tick invariants; returns the number of transactions."""
    st = SimulationState(sc, build_causet=True)
    energy = st.total_energy()
    seen = {st.snapshot()}
    count = 0
    while st.tick <= sc.max_ticks and st.status is None:
        tick = st.tick
        outs, bad = audited_step(st, rng)
        assert not bad
        for out in outs:
            assert (out.transaction is not None) == bool(out.cw_set)
            cw_ids = {cw.absorber_id for cw in out.cw_set}
            assert {nm.absorber_id for nm in out.nulls} <= cw_ids
            if out.transaction is not None:
                count += 1
                assert out.transaction.winner_id not in {nm.absorber_id for nm in out.nulls}
        if any(o.transaction for o in outs):
            snap = st.snapshot()
            assert snap not in seen
            seen.add(snap)
        assert st.total_energy() == pytest.approx(energy, abs=1e-9)
    assert st.causet.check_invariants().ok
    return count


def test_energy_audit_random_scenarios():
    r = random.Random(20240601)
    rng = np.random.Generator(np.random.PCG64(5))
    total = 0
    for _ in range(10_000):
        total += _audit(random_scenario(r), rng)
    assert total > 1000


@pytest.mark.parametrize("seed", range(40))
def test_window_loop_matches_stepping(seed):
    sc = random_scenario(random.Random(seed))
    for stop in (True, False):
        fast = run_trajectory(sc, 3, stop_at_first=stop, build_causet=True)
        slow, _ = run_by_steps(sc, 3, stop_at_first=stop, build_causet=True)
        assert fast.transactions == slow.transactions
        assert fast.status == slow.status
        assert fast.causet.export("json") == slow.causet.export("json")


def test_ladder_emits_repeatedly():
    sc = Scenario(
        (ladder_emitter("L", 20),), (), (DetectorSpec("D", "R", 100, 1.0),), (Channel("R", "r", 1),), alpha=0.2, max_ticks=5000
    )
    res = run_trajectory(sc, stop_at_first=False, build_causet=True)
    assert len(res.transactions) == 20 and res.status is Status.EXHAUSTED
    assert EnsembleStats.from_results(sc, [res]).absorber_counts == {"D": 20}
