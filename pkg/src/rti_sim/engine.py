"""Stochastic state machine of the measurement transition.

One tick: every excited emitter, in id order, builds its offer over the
channels that have eligible absorbers; each eligible constituent confirms with
probability alpha; if any confirmation occurs the transaction is drawn over
*all* eligible absorbers (channel by ``|a_k|^2``, then a constituent within the
channel), energy is transferred, and the non-winning responders become null
measurements.

Trajectories run inert ticks through the gate kernel in whole windows (spans of
ticks over which nothing can change), which is draw-for-draw identical to
calling :func:`step` once per tick.
"""

from __future__ import annotations

import bisect
import enum
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .amplitudes import ALPHA, Sign, TransitionParams, prob_cw, transition_probability
from .causet import CausalSet
from .errors import EnergyMismatch, NoAbsorbers, NoEligible, ScenarioError
from .substratum import (
    DEFAULT_ENERGY_TOL,
    NORM_TOL,
    AbsorberState,
    Channel,
    ConfirmationWave,
    DetectorSpec,
    EmitterState,
    NullMeasurement,
    OfferWave,
    Transaction,
    mk_offer_wave,
    normalize_channels,
)

DEFAULT_SEED = 0xC0FFEE
ANALYTIC_THRESHOLD = 10**7
SEED_MAX = 2**64 - 1


class Status(str, enum.Enum):
    TRANSACTION = "transaction"
    MAX_TICKS = "max_ticks"
    NO_ABSORBERS = "no_absorbers"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Scenario:
    emitters: tuple[EmitterState, ...]
    absorbers: tuple[AbsorberState, ...] = ()
    detectors: tuple[DetectorSpec, ...] = ()
    channels: tuple[Channel, ...] = ()
    alpha: float = ALPHA
    energy_tol: float = DEFAULT_ENERGY_TOL
    max_ticks: int = 1000
    seed: int = DEFAULT_SEED
    amplitude_tau: float | None = None

    def __post_init__(self):
        for name in ("emitters", "absorbers", "detectors", "channels"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.emitters:
            raise ScenarioError("a scenario needs at least one emitter")
        if not self.channels:
            raise ScenarioError("a scenario needs at least one channel")
        # alpha = 1 is admitted for deterministic test scenarios
        if not 0.0 < self.alpha <= 1.0:
            raise ScenarioError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.energy_tol < 0:
            raise ScenarioError("energy_tol must be >= 0")
        if self.max_ticks < 1:
            raise ScenarioError("max_ticks must be >= 1")
        if not 0 <= self.seed <= SEED_MAX:
            raise ScenarioError("seed must be an unsigned 64-bit integer")
        if self.amplitude_tau is not None and self.amplitude_tau < 0:
            raise ScenarioError("amplitude_tau must be >= 0")
        ids = [x.id for x in (*self.emitters, *self.absorbers, *self.detectors)]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ScenarioError(f"duplicate system ids: {dupes}")
        chan_ids = [c.id for c in self.channels]
        if len(set(chan_ids)) != len(chan_ids):
            raise ScenarioError("duplicate channel ids")
        for x in (*self.absorbers, *self.detectors):
            if x.channel not in chan_ids:
                raise ScenarioError(f"{x.id} sits on unknown channel {x.channel!r}")
        if abs(math.fsum(c.prob for c in self.channels) - 1.0) > NORM_TOL:
            object.__setattr__(self, "channels", normalize_channels(self.channels))

    @property
    def activation_ticks(self) -> tuple[int, ...]:
        return tuple(sorted({a.active_from for a in self.absorbers if a.active_from > 1}))

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class TickOutcome:
    tick: int
    emitter_id: str
    offer: OfferWave
    cw_set: tuple[ConfirmationWave, ...] = ()
    transaction: Transaction | None = None
    nulls: tuple[NullMeasurement, ...] = ()


class _Kind(enum.Enum):
    MICRO = 0
    BERNOULLI = 1
    ANALYTIC = 2


@dataclass(frozen=True)
class _Block:
    kind: _Kind
    ref: int
    channel: str
    n: int
    p: float
    weight: float


@dataclass(frozen=True)
class _Offer:
    emitter_index: int
    ow: OfferWave
    blocks: tuple[_Block, ...]
    channel_cum: tuple[float, ...]
    # per offer component: (block indices, cumulative weights, weight per constituent)
    members: tuple[tuple[tuple[int, ...], tuple[float, ...], tuple[float, ...]], ...]


@dataclass(frozen=True)
class _Plan:
    offers: tuple[_Offer, ...]
    counts: np.ndarray
    probs: np.ndarray
    seg_starts: np.ndarray


def _plan_from(offers: Sequence[_Offer]) -> _Plan:
    counts, probs, seg = [], [], [0]
    for off in offers:
        for b in off.blocks:
            counts.append(1 if b.kind is _Kind.ANALYTIC else b.n)
            probs.append(b.p)
        seg.append(len(counts))
    return _Plan(
        tuple(offers),
        np.asarray(counts, dtype=np.int64),
        np.asarray(probs, dtype=np.float64),
        np.asarray(seg, dtype=np.int64),
    )


_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    z = x & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def run_state(seed: int, run_index: int) -> dict:
    """PCG64 state for run ``run_index``: outputs 4i+1..4i+4 of a splitmix64 sequence seeded with ``seed``.

    Distinct runs get disjoint splitmix positions, hence distinct (state, increment) pairs.
    """
    a, b, c, d = (_splitmix64(seed + (4 * run_index + k) * _GOLDEN) for k in range(1, 5))
    return {
        "bit_generator": "PCG64",
        "state": {"state": (a << 64) | b, "inc": ((c << 64) | d) | 1},
        "has_uint32": 0,
        "uinteger": 0,
    }


def reseed(rng: np.random.Generator, seed: int, run_index: int) -> np.random.Generator:
    rng.bit_generator.state = run_state(seed, run_index)
    return rng


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Fresh generator positioned at the start of run ``run_index``'s stream."""
    return reseed(np.random.Generator(np.random.PCG64(0)), seed, run_index)


class SimulationState:
    """Mutable per-trajectory state: current levels, event counter, optional causet."""

    def __init__(self, scenario: Scenario, build_causet: bool = False, shared_cache: dict | None = None):
        self.scenario = scenario
        self.emitters = list(scenario.emitters)
        self.absorbers = list(scenario.absorbers)
        self.detectors = list(scenario.detectors)
        self.order = sorted(range(len(self.emitters)), key=lambda i: self.emitters[i].id)
        self.tick = 1
        self.status: Status | None = None
        self.version = 0
        self.next_event = 0
        self.causet = CausalSet() if build_causet else None
        self._shared = shared_cache if shared_cache is not None else {}
        self._cache: dict = self._shared
        self._activations = scenario.activation_ticks

    # -- bookkeeping -------------------------------------------------------

    def snapshot(self) -> tuple:
        return (
            tuple(e.current_level for e in self.emitters),
            tuple(a.current_level for a in self.absorbers),
            tuple(d.n_excited for d in self.detectors),
        )

    def total_energy(self) -> float:
        em = math.fsum(e.spec.energy(e.current_level) for e in self.emitters)
        ab = math.fsum(a.spec.energy(a.current_level) for a in self.absorbers)
        det = math.fsum(d.n_excited * d.gap for d in self.detectors)
        return em + ab + det

    def any_excited(self) -> bool:
        return any(e.can_emit for e in self.emitters)

    def epoch(self, tick: int) -> int:
        return bisect.bisect_right(self._activations, tick)

    def next_activation(self, tick: int) -> int | None:
        k = bisect.bisect_right(self._activations, tick)
        return self._activations[k] if k < len(self._activations) else None

    def registry(self, tick: int) -> list:
        return [a for a in self.absorbers if a.active_from <= tick] + self.detectors

    # -- offers ------------------------------------------------------------

    def offer_for(self, ei: int, tick: int) -> _Offer | None:
        """The offer emitter ``ei`` makes at ``tick`` in the current state, or None if it cannot emit."""
        sc = self.scenario
        em = self.emitters[ei]
        pair = em.preferred_transition() if em.excited else None
        if pair is None:
            return None
        try:
            ow = mk_offer_wave(em, pair, sc.channels, self.registry(tick), sc.energy_tol)
        except NoAbsorbers:
            return None
        omega, tol = ow.omega, sc.energy_tol
        live = set(ow.channel_ids)
        blocks: list[_Block] = []
        for ai, a in enumerate(self.absorbers):
            if a.active_from > tick or a.channel not in live:
                continue
            t = a.matching_transition(omega, tol)
            if t is not None:
                w = self._weight(a.spec.matrix_elements[t], a.spec.energy(t[0]), a.spec.energy(t[1]), omega)
                blocks.append(_Block(_Kind.MICRO, ai, a.channel, 1, sc.alpha, w))
        for di, d in enumerate(self.detectors):
            if d.channel not in live or not d.eligible_for(omega, tol):
                continue
            w = self._weight(d.matrix_element, 0.0, d.gap, omega)
            if d.n_eligible > ANALYTIC_THRESHOLD:
                p = 1.0 if sc.alpha >= 1.0 else prob_cw(sc.alpha, d.n_eligible)
                blocks.append(_Block(_Kind.ANALYTIC, di, d.channel, d.n_eligible, p, w))
            else:
                blocks.append(_Block(_Kind.BERNOULLI, di, d.channel, d.n_eligible, sc.alpha, w))
        members = []
        for cid in ow.channel_ids:
            idx = tuple(k for k, b in enumerate(blocks) if b.channel == cid)
            weights = [blocks[k].n * blocks[k].weight for k in idx]
            per = [blocks[k].weight for k in idx]
            if not math.fsum(weights) > 0:
                weights = [float(blocks[k].n) for k in idx]
                per = [1.0] * len(idx)
            members.append((idx, tuple(itertools.accumulate(weights)), tuple(per)))
        cum = tuple(itertools.accumulate(c.prob for c in ow.components))
        return _Offer(ei, ow, tuple(blocks), cum, tuple(members))

    def _weight(self, m: float, e_i: float, e_f: float, omega: float) -> float:
        tau = self.scenario.amplitude_tau
        if tau is None:
            return 1.0
        return transition_probability(TransitionParams(m, e_i, e_f, omega, Sign.ABSORPTION, tau)).prob

    def plan(self, tick: int, after: int = -1) -> _Plan:
        """Offers of all emitters later than position ``after`` in id order, cached per state."""
        key = (self.epoch(tick), after)
        got = self._cache.get(key)
        if got is None:
            offers = []
            for pos, ei in enumerate(self.order):
                if pos <= after:
                    continue
                off = self.offer_for(ei, tick)
                if off is not None:
                    offers.append(off)
            got = _plan_from(offers)
            self._cache[key] = got
        return got

    def position(self, emitter_index: int) -> int:
        return self.order.index(emitter_index)

    # -- firing ------------------------------------------------------------

    def _member_id(self, block: _Block, idx: int) -> tuple[str, str]:
        """(constituent id, owning system id) of member ``idx`` of ``block``."""
        if block.kind is _Kind.MICRO:
            a = self.absorbers[block.ref]
            return a.id, a.id
        d = self.detectors[block.ref]
        return d.constituent_id(idx), d.id

    def choose_winner(self, offer: _Offer, rng) -> tuple[int, int]:
        """Draw (block, member) over every eligible constituent of the offer."""
        cum = offer.channel_cum
        k = min(bisect.bisect_right(cum, rng.random() * cum[-1]), len(cum) - 1)
        idx, wcum, per = offer.members[k]
        if not idx:
            raise NoEligible(f"channel {offer.ow.components[k].id} has no eligible absorber")
        x = rng.random() * wcum[-1]
        j = min(bisect.bisect_right(wcum, x), len(idx) - 1)
        blk = offer.blocks[idx[j]]
        lo = wcum[j - 1] if j else 0.0
        member = min(int((x - lo) / per[j]), blk.n - 1) if per[j] > 0 else 0
        return idx[j], max(member, 0)

    def resolve(self, offer: _Offer, hit_blocks, hit_idx, tick: int, rng) -> TickOutcome:
        """Turn a fired gate into CW records, a winner, a transaction and null records."""
        ow = offer.ow
        cws, responders = [], []
        for b, i in zip(hit_blocks.tolist(), hit_idx.tolist()):
            blk = offer.blocks[b]
            if blk.kind is _Kind.ANALYTIC:
                rid, itemized = self.detectors[blk.ref].id, False
            else:
                rid, itemized = self._member_id(blk, i)[0], True
            amp = ow.component(blk.channel).amplitude
            cws.append(ConfirmationWave(rid, blk.channel, amp.conjugate()))
            if itemized:
                responders.append((rid, blk.channel))
        wb, wi = self.choose_winner(offer, rng)
        txn = self._actualize(offer, wb, wi, tick)
        nulls = tuple(NullMeasurement(tick, rid, ch) for rid, ch in responders if rid != txn.winner_id)
        return TickOutcome(tick, ow.emitter_id, ow, tuple(cws), txn, nulls)

    def _actualize(self, offer: _Offer, block_index: int, idx: int, tick: int) -> Transaction:
        ow = offer.ow
        blk = offer.blocks[block_index]
        em = self.emitters[offer.emitter_index]
        src, dst = ow.transition
        if em.current_level != src:
            raise EnergyMismatch(f"emitter {em.id} left level {src} before actualization")
        tol = self.scenario.energy_tol
        if blk.kind is _Kind.MICRO:
            a = self.absorbers[blk.ref]
            t = a.matching_transition(ow.omega, tol)
            if t is None:
                raise EnergyMismatch(f"absorber {a.id} cannot take omega={ow.omega!r}")
            self.absorbers[blk.ref] = AbsorberState(a.id, a.spec, t[1], a.channel, a.active_from)
        else:
            d = self.detectors[blk.ref]
            if not d.eligible_for(ow.omega, tol):
                raise EnergyMismatch(f"detector {d.id} cannot take omega={ow.omega!r}")
            t = (0, 1)
            self.detectors[blk.ref] = replace(d, n_excited=d.n_excited + 1)
        self.emitters[offer.emitter_index] = EmitterState(em.id, em.spec, dst)
        winner_id, system = self._member_id(blk, idx)
        txn = Transaction(
            tick=tick,
            emitter_id=em.id,
            winner_id=winner_id,
            winner_system=system,
            channel_id=blk.channel,
            omega=ow.omega,
            emitter_transition=(src, dst),
            absorber_transition=t,
            emission_event=self.next_event,
            absorption_event=self.next_event + 1,
        )
        self.next_event += 2
        self.version += 1
        self._cache = {}
        if self.causet is not None:
            self.causet.add_transaction(txn)
        return txn

    def actualize(self, ow: OfferWave, winner_id: str, tick: int) -> Transaction:
        """Transfer ``ow``'s quantum to ``winner_id`` (an absorber, detector, or ``detector#k``)."""
        ei = next((i for i, e in enumerate(self.emitters) if e.id == ow.emitter_id), None)
        if ei is None:
            raise ScenarioError(f"unknown emitter {ow.emitter_id!r}")
        offer = self.offer_for(ei, tick)
        if offer is None or offer.ow.transition != ow.transition:
            raise EnergyMismatch(f"emitter {ow.emitter_id} cannot emit {ow.transition} now")
        base, _, member = winner_id.partition("#")
        for k, blk in enumerate(offer.blocks):
            bid = self._member_id(blk, 0)[1]
            if bid == base:
                return self._actualize(offer, k, int(member) if member else 0, tick)
        raise EnergyMismatch(f"{winner_id} is not eligible for omega={ow.omega!r}")


# -- single-operation API ------------------------------------------------------


def cw_trials(eligible: Sequence[str], alpha: float, rng) -> set[str]:
    """Ids of the eligible absorbers that confirm this tick (each independently with probability alpha)."""
    eligible = list(eligible)
    if not eligible:
        return set()
    t, _, _, idx = kernels.first_fire(rng, [len(eligible)], [float(alpha)], [0, 1], 1)
    return set() if t < 0 else {eligible[i] for i in idx.tolist()}


def collapse(ow: OfferWave, eligible_by_channel: Mapping[str, Sequence[str]], responders, rng) -> str:
    """Winner over all eligible absorbers: channel by renormalized ``|a_k|^2``, then uniform inside it."""
    if not responders:
        raise ValueError("collapse needs at least one responder")
    comps = [c for c in ow.components if eligible_by_channel.get(c.id)]
    if not comps:
        raise NoEligible("no channel of the offer hosts an eligible absorber")
    cum = np.cumsum([c.prob for c in comps])
    u = rng.random()
    k = min(int(np.searchsorted(cum, u * cum[-1], side="right")), len(comps) - 1)
    members = list(eligible_by_channel[comps[k].id])
    j = min(int(rng.random() * len(members)), len(members) - 1)
    return members[j]


def step(state: SimulationState, rng) -> list[TickOutcome]:
    """Advance one tick; returns one outcome per emitter that made an offer.

    When no emitter can make an offer now or later, ``state.status`` is set and
    an empty list comes back.
    """
    tick = state.tick
    if not state.any_excited():
        state.status = Status.EXHAUSTED
        return []
    outcomes = []
    for ei in list(state.order):
        offer = state.offer_for(ei, tick)
        if offer is None:
            continue
        plan = _plan_from([offer])
        t, _, hb, hi = kernels.first_fire(rng, plan.counts, plan.probs, plan.seg_starts, 1)
        if t < 0:
            outcomes.append(TickOutcome(tick, offer.ow.emitter_id, offer.ow))
        else:
            outcomes.append(state.resolve(offer, hb, hi, tick, rng))
    if not outcomes and state.next_activation(tick) is None:
        state.status = Status.NO_ABSORBERS
    state.tick += 1
    return outcomes


# -- trajectories ----------------------------------------------------------------


@dataclass
class RunResult:
    run_index: int
    status: Status
    ticks: int
    outcomes: list[TickOutcome] = field(default_factory=list)
    causet: CausalSet | None = None

    @property
    def transactions(self) -> list[Transaction]:
        return [o.transaction for o in self.outcomes if o.transaction is not None]

    @property
    def first_transaction(self) -> Transaction | None:
        for o in self.outcomes:
            if o.transaction is not None:
                return o.transaction
        return None


def run_trajectory(
    scenario: Scenario,
    run_index: int = 0,
    *,
    stop_at_first: bool = True,
    build_causet: bool = False,
    rng=None,
    shared_cache: dict | None = None,
) -> RunResult:
    """Simulate one trajectory up to the first transaction (or to exhaustion when ``stop_at_first`` is False)."""
    state = SimulationState(scenario, build_causet, shared_cache)
    rng = run_rng(scenario.seed, run_index) if rng is None else rng
    max_ticks = scenario.max_ticks
    outcomes: list[TickOutcome] = []
    status = Status.MAX_TICKS
    tick = 1
    while tick <= max_ticks:
        plan = state.plan(tick)
        if not plan.offers:
            nxt = state.next_activation(tick)
            if not state.any_excited():
                status = Status.EXHAUSTED
                break
            if nxt is None:
                status = Status.NO_ABSORBERS
                break
            tick = nxt
            continue
        nxt = state.next_activation(tick)
        window_end = max_ticks if nxt is None else min(max_ticks, nxt - 1)
        t, seg, hb, hi = kernels.first_fire(rng, plan.counts, plan.probs, plan.seg_starts, window_end - tick + 1)
        if t < 0:
            tick = window_end + 1
            continue
        tick += t
        offer = plan.offers[seg]
        outcomes.append(state.resolve(offer, hb, hi, tick, rng))
        if stop_at_first:
            status = Status.TRANSACTION
            break
        # remaining emitters of this tick see the updated state
        after = state.position(offer.emitter_index)
        while True:
            rest = state.plan(tick, after)
            if not rest.offers:
                break
            t, seg, hb, hi = kernels.first_fire(rng, rest.counts, rest.probs, rest.seg_starts, 1)
            if t < 0:
                break
            offer = rest.offers[seg]
            outcomes.append(state.resolve(offer, hb, hi, tick, rng))
            after = state.position(offer.emitter_index)
        tick += 1
    ticks = outcomes[0].tick if (stop_at_first and outcomes) else min(tick, max_ticks)
    return RunResult(run_index, status, ticks, outcomes, state.causet)


def run_by_steps(scenario: Scenario, run_index: int = 0, *, stop_at_first: bool = True, build_causet: bool = False):
    """Reference trajectory driven one :func:`step` at a time; returns (RunResult, all outcomes)."""
    state = SimulationState(scenario, build_causet)
    rng = run_rng(scenario.seed, run_index)
    fired, every = [], []
    status = Status.MAX_TICKS
    while state.tick <= scenario.max_ticks:
        outs = step(state, rng)
        every.extend(outs)
        got = [o for o in outs if o.transaction is not None]
        fired.extend(got)
        if state.status is not None:
            status = state.status
            break
        if stop_at_first and got:
            status = Status.TRANSACTION
            fired = got[:1]
            break
    ticks = fired[0].tick if (stop_at_first and fired) else min(state.tick, scenario.max_ticks)
    return RunResult(run_index, status, ticks, fired, state.causet), every


# -- ensembles ---------------------------------------------------------------------


def _sorted_counts(d: Mapping[str, int]) -> dict[str, int]:
    return {k: d[k] for k in sorted(d)}


@dataclass
class EnsembleStats:
    runs: int
    transactions: int
    no_detection: int
    status_counts: dict[str, int]
    channel_counts: dict[str, int]
    absorber_counts: dict[str, int]
    null_counts: dict[str, int]
    mean_ticks_to_transaction: float | None
    results: list[RunResult] | None = field(default=None, repr=False, compare=False)

    @property
    def channel_frequencies(self) -> dict[str, float]:
        return {k: (v / self.transactions if self.transactions else 0.0) for k, v in self.channel_counts.items()}

    @property
    def absorber_frequencies(self) -> dict[str, float]:
        return {k: (v / self.transactions if self.transactions else 0.0) for k, v in self.absorber_counts.items()}

    @classmethod
    def from_results(cls, scenario: Scenario, results: Sequence[RunResult]) -> "EnsembleStats":
        status = {s.value: 0 for s in Status}
        chans = {c.id: 0 for c in scenario.channels}
        systems = {x.id: 0 for x in (*scenario.absorbers, *scenario.detectors)}
        nulls = dict(systems)
        owner = {a.id: a.id for a in scenario.absorbers}
        n_txn, tick_sum = 0, 0
        for r in results:
            status[r.status.value] += 1
            first = r.first_transaction
            if first is not None:
                tick_sum += first.tick
            for txn in r.transactions:
                n_txn += 1
                chans[txn.channel_id] += 1
                systems[txn.winner_system] += 1
            for o in r.outcomes:
                for nm in o.nulls:
                    key = owner.get(nm.absorber_id, nm.absorber_id.partition("#")[0])
                    nulls[key] += 1
        with_txn = sum(1 for r in results if r.first_transaction is not None)
        return cls(
            runs=len(results),
            transactions=n_txn,
            no_detection=len(results) - with_txn,
            status_counts=status,
            channel_counts=_sorted_counts(chans),
            absorber_counts=_sorted_counts(systems),
            null_counts=_sorted_counts(nulls),
            mean_ticks_to_transaction=(tick_sum / with_txn) if with_txn else None,
        )

    def as_dict(self) -> dict:
        return {
            "runs": self.runs,
            "transactions": self.transactions,
            "no_detection": self.no_detection,
            "status_counts": self.status_counts,
            "channel_counts": self.channel_counts,
            "channel_frequencies": self.channel_frequencies,
            "absorber_counts": self.absorber_counts,
            "absorber_frequencies": self.absorber_frequencies,
            "null_counts": self.null_counts,
            "mean_ticks_to_transaction": self.mean_ticks_to_transaction,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def simulate_runs(
    scenario: Scenario,
    runs: int,
    *,
    workers: int = 1,
    stop_at_first: bool = True,
    causet_runs: Sequence[int] = (),
) -> list[RunResult]:
    """Execute ``runs`` independent trajectories; results come back in run-index order."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    shared: dict = {}
    want_causet = set(causet_runs)

    def chunk(lo: int, hi: int) -> list[RunResult]:
        rng = np.random.Generator(np.random.PCG64(0))
        return [
            run_trajectory(
                scenario,
                i,
                stop_at_first=stop_at_first,
                build_causet=i in want_causet,
                rng=reseed(rng, scenario.seed, i),
                shared_cache=shared,
            )
            for i in range(lo, hi)
        ]

    # run 0 on the calling thread first so the shared plan cache is warm
    first = chunk(0, 1)
    if workers <= 1 or runs == 1:
        return first + chunk(1, runs)
    n_chunks = min(runs - 1, workers * 8)
    edges = [1 + (runs - 1) * k // n_chunks for k in range(n_chunks + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda k: chunk(edges[k], edges[k + 1]), range(n_chunks)))
    return first + [r for part in parts for r in part]


def run_ensemble(scenario: Scenario, runs: int, *, workers: int = 1, keep_results: bool = False) -> EnsembleStats:
    results = simulate_runs(scenario, runs, workers=workers)
    stats = EnsembleStats.from_results(scenario, results)
    if keep_results:
        stats.results = results
    return stats


def gate_fire_probability(scenario: Scenario) -> float:
    """Analytic chance that the first tick of ``scenario`` produces at least one CW (single emitter)."""
    state = SimulationState(scenario)
    plan = state.plan(1)
    log_none = 0.0
    for b in (b for off in plan.offers for b in off.blocks):
        if b.p >= 1.0:
            return 1.0
        log_none += (1 if b.kind is _Kind.ANALYTIC else b.n) * math.log1p(-b.p)
    return -math.expm1(log_none)

