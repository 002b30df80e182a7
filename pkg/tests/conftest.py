import dataclasses
import json
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from rti_sim.engine import Scenario, step
from rti_sim.substratum import AbsorberState, BoundStateSpec, Channel, DetectorSpec, EmitterState

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FROZEN = json.loads(Path(__file__).with_name("frozen_oracles.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def two_level_emitter(eid="E", gap=1.0):
    return EmitterState(eid, BoundStateSpec.two_level(gap, upward=False), 1)


def ground_absorber(aid, channel, gap=1.0, active_from=1):
    return AbsorberState(aid, BoundStateSpec.two_level(gap), 0, channel, active_from)


def ladder_emitter(eid, rungs, gap=1.0):
    """Emitter on the top rung of an evenly spaced ladder, allowed to step down one rung at a time."""
    spec = BoundStateSpec.from_energies(
        [k * gap for k in range(rungs + 1)], [(k, k - 1) for k in range(1, rungs + 1)], default_element=1.0
    )
    return EmitterState(eid, spec, rungs)


def random_scenario(r: random.Random, seed: int | None = None) -> Scenario:
    """Small scenario with integer level energies so resonances are exact."""
    n_ch = r.randint(1, 3)
    channels = [Channel(f"c{k}", f"mode{k}", complex(r.uniform(-1, 1), r.uniform(-1, 1))) for k in range(n_ch)]

    def spec(upward: bool):
        n = r.randint(2, 4)
        energies = sorted(r.sample(range(0, 5), n))
        pairs = [(i, j) for i in range(n) for j in range(n) if (j > i if upward else j < i)]
        allowed = r.sample(pairs, r.randint(1, len(pairs)))
        return BoundStateSpec.from_energies(energies, allowed, {p: r.uniform(0.1, 2.0) for p in allowed})

    emitters = []
    for k in range(r.randint(1, 3)):
        s = spec(False)
        emitters.append(EmitterState(f"e{k}", s, r.randint(0, s.top)))
    absorbers = []
    for k in range(r.randint(0, 5)):
        s = spec(True)
        absorbers.append(AbsorberState(f"a{k}", s, r.randint(0, s.top), r.choice(channels).id, r.randint(1, 3)))
    detectors = []
    if r.random() < 0.4:
        detectors.append(DetectorSpec("d0", r.choice(channels).id, r.randint(1, 40), float(r.randint(1, 3))))
    return Scenario(
        tuple(emitters),
        tuple(absorbers),
        tuple(detectors),
        tuple(channels),
        alpha=r.uniform(0.05, 1.0),
        max_ticks=r.randint(1, 25),
        seed=r.getrandbits(64) if seed is None else seed,
        amplitude_tau=r.choice([None, None, r.uniform(0.1, 3.0)]),
    )


def audited_step(state, rng):
    """Run :func:`step` and return (outcomes, unsupported) where ``unsupported`` lists offer
    components that had no resonant absorber in the registry as that emitter saw it."""
    sc = state.scenario
    registry = {r.id: r for r in state.registry(state.tick)}
    outs = step(state, rng)
    bad = []
    for out in outs:
        for comp in out.offer.components:
            if not any(r.channel == comp.id and r.eligible_for(out.offer.omega, sc.energy_tol) for r in registry.values()):
                bad.append((out.tick, out.emitter_id, comp.id))
        t = out.transaction
        if t is not None:
            r = registry[t.winner_system]
            if isinstance(r, DetectorSpec):
                registry[r.id] = dataclasses.replace(r, n_excited=r.n_excited + 1)
            else:
                registry[r.id] = dataclasses.replace(r, current_level=t.absorber_transition[1])
    return outs, bad
