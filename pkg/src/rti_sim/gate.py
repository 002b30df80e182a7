"""Relativistic admissibility of offer-wave sources, light-tight audits, and the built-in scenarios."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .engine import Scenario, SimulationState
from .errors import NoAbsorbers
from .substratum import AbsorberState, BoundStateSpec, Channel, DetectorSpec, EmitterState, mk_offer_wave


class SourceCategory(enum.Enum):
    MASSLESS_BOSON = "MasslessBoson"
    MASSIVE_BOSON = "MassiveBoson"
    FERMION_DIRECT = "FermionDirect"
    BOUND_STATE_MOTION = "BoundStateMotion"


class Rule(str, enum.Enum):
    NOT_AN_OFFER_WAVE = "NotAnOfferWave"
    FERMION_UNMEDIATED = "FermionUnmediated"
    SHORT_RANGE = "ShortRange"
    NO_ABSORBERS = "NoAbsorbers"


_MESSAGES = {
    Rule.NOT_AN_OFFER_WAVE: "a slow-moving quantum is a bound state; its center-of-mass state is not an offer wave",
    Rule.FERMION_UNMEDIATED: "fermions only transact through the bosons they source; no fermion-fermion OW/CW exchange",
    Rule.SHORT_RANGE: "a massive boson cannot carry an offer beyond its Compton range 1/mass",
    Rule.NO_ABSORBERS: "no field component is emitted unless an absorber can respond",
}


@dataclass(frozen=True)
class GateRejection:
    rule: Rule
    message: str

    @classmethod
    def of(cls, rule: Rule, detail: str = "") -> "GateRejection":
        msg = _MESSAGES[rule]
        return cls(rule, f"{msg} ({detail})" if detail else msg)

    def as_dict(self) -> dict:
        return {"error": "GateRejection", "rule": self.rule.value, "message": self.message}


@dataclass(frozen=True)
class SourceKind:
    category: SourceCategory
    mass: float = 0.0
    range: float = math.inf

    def __post_init__(self):
        if self.mass < 0 or not self.range > 0:
            raise ValueError("mass must be >= 0 and range > 0")
        if self.category is SourceCategory.MASSLESS_BOSON and (self.mass != 0 or math.isfinite(self.range)):
            raise ValueError("a massless boson has zero mass and unbounded range")
        if self.category is SourceCategory.MASSIVE_BOSON:
            if not self.mass > 0:
                raise ValueError("a massive boson needs mass > 0")
            if self.range > 1.0 / self.mass:
                object.__setattr__(self, "range", 1.0 / self.mass)

    @classmethod
    def photon(cls) -> "SourceKind":
        return cls(SourceCategory.MASSLESS_BOSON)

    @classmethod
    def massive_boson(cls, mass: float) -> "SourceKind":
        return cls(SourceCategory.MASSIVE_BOSON, mass, 1.0 / mass)


def validate_source(kind: SourceKind, intended_range: float) -> GateRejection | None:
    """None when ``kind`` can carry an offer over ``intended_range``; otherwise the violated rule."""
    cat = kind.category
    if cat is SourceCategory.MASSLESS_BOSON:
        return None
    if cat is SourceCategory.BOUND_STATE_MOTION:
        return GateRejection.of(Rule.NOT_AN_OFFER_WAVE)
    if cat is SourceCategory.FERMION_DIRECT:
        return GateRejection.of(Rule.FERMION_UNMEDIATED)
    if intended_range > 1.0 / kind.mass:
        return GateRejection.of(Rule.SHORT_RANGE, f"range {intended_range:g} > 1/mass = {1.0 / kind.mass:g}")
    return None


# -- light-tight audit ----------------------------------------------------------


@dataclass(frozen=True)
class ChannelAudit:
    emitter_id: str
    channel_id: str
    retained: bool


@dataclass
class AuditReport:
    channels: list[ChannelAudit] = field(default_factory=list)
    unable_to_emit: list[str] = field(default_factory=list)
    support_ok: bool = True

    def pruned(self, emitter_id: str | None = None) -> list[str]:
        return [c.channel_id for c in self.channels if not c.retained and emitter_id in (None, c.emitter_id)]

    def retained(self, emitter_id: str | None = None) -> list[str]:
        return [c.channel_id for c in self.channels if c.retained and emitter_id in (None, c.emitter_id)]


def light_tight_audit(scenario: Scenario, tick: int = 1) -> AuditReport:
    """Which offer components each excited emitter could emit at ``tick`` in the initial state."""
    state = SimulationState(scenario)
    registry = state.registry(tick)
    report = AuditReport()
    for em in sorted(scenario.emitters, key=lambda e: e.id):
        pair = em.preferred_transition() if em.excited else None
        if pair is None:
            continue
        try:
            ow = mk_offer_wave(em, pair, scenario.channels, registry, scenario.energy_tol)
            kept = set(ow.channel_ids)
        except NoAbsorbers:
            ow, kept = None, set()
            report.unable_to_emit.append(em.id)
        for ch in scenario.channels:
            report.channels.append(ChannelAudit(em.id, ch.id, ch.id in kept))
        if ow is not None:
            # independent re-scan: every surviving component must have a resonant absorber on it
            for comp in ow.components:
                if not any(r.channel == comp.id and r.eligible_for(ow.omega, scenario.energy_tol) for r in registry):
                    report.support_ok = False
    return report


# -- scenario library ---------------------------------------------------------------


def _photon_emitter(omega: float = 1.0) -> EmitterState:
    return EmitterState("E", BoundStateSpec.two_level(omega, upward=False), 1)


def _ground_absorber(aid: str, channel: str, omega: float = 1.0, active_from: int = 1) -> AbsorberState:
    return AbsorberState(aid, BoundStateSpec.two_level(omega), 0, channel, active_from)


class MaudlinVariant(enum.Enum):
    AS_PROPOSED = "AsProposed"
    PHOTON_ANALOG = "PhotonAnalog"


def maudlin_scenario(
    variant: MaudlinVariant,
    *,
    amplitudes: tuple[complex, complex] = (1.0, 1.0),
    with_background: bool = True,
    with_b: bool = True,
    swing_tick: int = 2,
    alpha: float = 0.007,
    max_ticks: int = 100_000,
    seed: int | None = None,
) -> Scenario | GateRejection:
    """The contingent-absorber setup.

    ``AS_PROPOSED`` needs a slow massive quantum, which is rejected before any
    scenario exists. ``PHOTON_ANALOG`` puts detector A on the rightward channel,
    the background absorber C on the leftward one, and swings detector B onto the
    left at ``swing_tick``.
    """
    if variant is MaudlinVariant.AS_PROPOSED:
        slow_quantum = SourceKind(SourceCategory.BOUND_STATE_MOTION, mass=1.0, range=1.0)
        rejection = validate_source(slow_quantum, intended_range=2.0)
        assert rejection is not None
        return rejection
    left, right = amplitudes
    channels = (Channel("L", "left", complex(left)), Channel("R", "right", complex(right)))
    absorbers = [_ground_absorber("A", "R")]
    if with_background:
        absorbers.append(_ground_absorber("C", "L"))
    if with_b:
        absorbers.append(_ground_absorber("B", "L", active_from=swing_tick))
    kwargs = {} if seed is None else {"seed": seed}
    return Scenario(
        (_photon_emitter(),), tuple(absorbers), (), channels, alpha=alpha, max_ticks=max_ticks, **kwargs
    )


def _certain_pair(seed: int | None = None) -> Scenario:
    kwargs = {} if seed is None else {"seed": seed}
    return Scenario(
        (_photon_emitter(),),
        (_ground_absorber("A1", "R"), _ground_absorber("A2", "R")),
        (),
        (Channel("R", "right", 1.0),),
        alpha=1.0,
        max_ticks=10,
        **kwargs,
    )


def _macro_detector(seed: int | None = None) -> Scenario:
    kwargs = {} if seed is None else {"seed": seed}
    return Scenario(
        (_photon_emitter(),),
        (),
        (DetectorSpec("D", "R", 10**23, 1.0),),
        (Channel("R", "right", 1.0),),
        max_ticks=10,
        **kwargs,
    )


BUILTINS = {
    "maudlin-as-proposed": lambda seed=None: maudlin_scenario(MaudlinVariant.AS_PROPOSED, seed=seed),
    "maudlin-photon-analog": lambda seed=None: maudlin_scenario(MaudlinVariant.PHOTON_ANALOG, seed=seed),
    "maudlin-photon-analog-asym": lambda seed=None: maudlin_scenario(
        MaudlinVariant.PHOTON_ANALOG, amplitudes=(0.8, 0.6), seed=seed
    ),
    "maudlin-photon-analog-no-c": lambda seed=None: maudlin_scenario(
        MaudlinVariant.PHOTON_ANALOG, with_background=False, with_b=False, seed=seed
    ),
    "certain-pair": _certain_pair,
    "macro-detector": _macro_detector,
}


def builtin(name: str, seed: int | None = None) -> Scenario | GateRejection:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown built-in scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(seed)
