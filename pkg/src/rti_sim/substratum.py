"""Emitters, absorbers, channels and the offer/confirmation records built on them.

Natural units throughout (hbar = c = 1). Energies are plain floats; a level gap
is ``E_to - E_from``, so emission gaps are negative and absorption gaps positive.
Frequencies are always reported as positive magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    ChannelMismatch,
    EnergyMismatch,
    ForbiddenTransition,
    GroundStateEmitter,
    NoAbsorbers,
    NormalizationError,
)

DEFAULT_ENERGY_TOL = 1e-9
NORM_TOL = 1e-12

Pair = tuple[int, int]


def within_tol(gap: float, omega: float, tol: float) -> bool:
    """Relative energy match ``|gap - omega| <= tol * omega``."""
    return abs(gap - omega) <= tol * omega


@dataclass(frozen=True)
class EnergyLevel:
    index: int
    energy: float


@dataclass(frozen=True)
class BoundStateSpec:
    """Level ladder plus the directed transitions the selection rules allow.

    ``matrix_elements`` maps each allowed ``(from, to)`` pair to the supplied
    magnitude of the interaction matrix element.
    """

    levels: tuple[EnergyLevel, ...]
    allowed: frozenset[Pair]
    matrix_elements: Mapping[Pair, float] = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        if not self.levels:
            raise ValueError("a bound state needs at least one level")
        for k, lvl in enumerate(self.levels):
            if lvl.index != k:
                raise ValueError(f"level {k} carries index {lvl.index}")
            if k and not lvl.energy > self.levels[k - 1].energy:
                raise ValueError("energies must be strictly increasing with index")
        n = len(self.levels)
        for i, j in self.allowed:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"allowed pair ({i}, {j}) references a missing level")
            if i == j:
                raise ValueError(f"self-pair ({i}, {i}) is not a transition")
            m = self.matrix_elements.get((i, j))
            if m is None or not m > 0:
                raise ValueError(f"matrix element for ({i}, {j}) must be > 0")

    @classmethod
    def from_energies(
        cls,
        energies: Sequence[float],
        allowed: Iterable[Pair],
        matrix_elements: Mapping[Pair, float] | None = None,
        default_element: float | None = None,
    ) -> "BoundStateSpec":
        allowed = frozenset((int(i), int(j)) for i, j in allowed)
        elements = dict(matrix_elements or {})
        if default_element is not None:
            for pair in allowed:
                elements.setdefault(pair, default_element)
        levels = tuple(EnergyLevel(k, float(e)) for k, e in enumerate(energies))
        return cls(levels, allowed, elements)

    @classmethod
    def two_level(cls, gap: float, matrix_element: float = 1.0, upward: bool = True) -> "BoundStateSpec":
        pair = (0, 1) if upward else (1, 0)
        return cls.from_energies([0.0, gap], [pair], {pair: matrix_element})

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def energy(self, index: int) -> float:
        return self.levels[index].energy

    def gap(self, i: int, j: int) -> float:
        return self.levels[j].energy - self.levels[i].energy

    def downward(self, level: int) -> list[Pair]:
        return sorted((i, j) for i, j in self.allowed if i == level and j < level)

    def upward(self, level: int) -> list[Pair]:
        return sorted((i, j) for i, j in self.allowed if i == level and j > level)

    def matching_upward(self, level: int, omega: float, tol: float) -> Pair | None:
        """Closest allowed upward transition from ``level`` resonant with ``omega``."""
        best = None
        for pair in self.upward(level):
            miss = abs(self.gap(*pair) - omega)
            if within_tol(self.gap(*pair), omega, tol) and (best is None or miss < best[0]):
                best = (miss, pair)
        return None if best is None else best[1]

    def valid_level(self, level: int) -> bool:
        return 0 <= level < len(self.levels)


@dataclass(frozen=True)
class EmitterState:
    id: str
    spec: BoundStateSpec
    current_level: int

    def __post_init__(self):
        if not self.spec.valid_level(self.current_level):
            raise ValueError(f"emitter {self.id}: level {self.current_level} not in spec")

    @property
    def excited(self) -> bool:
        return self.current_level > 0

    @property
    def can_emit(self) -> bool:
        return self.excited and bool(self.spec.downward(self.current_level))

    def preferred_transition(self) -> Pair | None:
        """Downward transition with the largest matrix element; ties go to the lower target."""
        options = self.spec.downward(self.current_level)
        if not options:
            return None
        return max(options, key=lambda p: (self.spec.matrix_elements[p], -p[1]))


@dataclass(frozen=True)
class AbsorberState:
    id: str
    spec: BoundStateSpec
    current_level: int
    channel: str
    active_from: int = 1

    def __post_init__(self):
        if not self.spec.valid_level(self.current_level):
            raise ValueError(f"absorber {self.id}: level {self.current_level} not in spec")

    def matching_transition(self, omega: float, tol: float) -> Pair | None:
        return self.spec.matching_upward(self.current_level, omega, tol)

    def eligible_for(self, omega: float, tol: float = DEFAULT_ENERGY_TOL) -> bool:
        return self.matching_transition(omega, tol) is not None


@dataclass(frozen=True)
class DetectorSpec:
    """A block of ``n`` identical two-level micro-absorbers on one channel.

    Constituents are exchangeable, so only the number already excited is
    tracked. ``n`` may be far beyond anything enumerable (10**23).
    """

    id: str
    channel: str
    n: int
    gap: float
    n_excited: int = 0
    matrix_element: float = 1.0

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.n_excited <= self.n:
            raise ValueError(f"detector {self.id}: bad constituent counts")
        if not self.gap > 0:
            raise ValueError(f"detector {self.id}: gap must be positive")

    @property
    def constituent_spec(self) -> BoundStateSpec:
        return BoundStateSpec.two_level(self.gap, self.matrix_element)

    @property
    def n_eligible(self) -> int:
        return self.n - self.n_excited

    def eligible_for(self, omega: float, tol: float = DEFAULT_ENERGY_TOL) -> bool:
        return self.n_eligible > 0 and within_tol(self.gap, omega, tol)

    def constituent_id(self, index: int) -> str:
        return f"{self.id}#{index}"

    def constituents(self) -> Iterator[AbsorberState]:
        spec = self.constituent_spec
        for i in range(self.n):
            level = 1 if i < self.n_excited else 0
            yield AbsorberState(self.constituent_id(i), spec, level, self.channel)


Registrant = Union[AbsorberState, DetectorSpec]


@dataclass(frozen=True)
class Channel:
    id: str
    label: str
    amplitude: complex

    @property
    def prob(self) -> float:
        return abs(self.amplitude) ** 2


def normalize_channels(channels: Sequence[Channel]) -> tuple[Channel, ...]:
    peak = max((abs(c.amplitude) for c in channels), default=0.0)
    if not peak > 0:
        raise NormalizationError("all channel amplitudes are zero")
    # divide by the largest magnitude first so tiny amplitudes do not underflow when squared
    scaled = [c.amplitude / peak for c in channels]
    norm = math.sqrt(math.fsum(abs(a) ** 2 for a in scaled))
    return tuple(Channel(c.id, c.label, a / norm) for c, a in zip(channels, scaled))


@dataclass(frozen=True)
class OfferWave:
    emitter_id: str
    transition: Pair
    omega: float
    components: tuple[Channel, ...]

    def component(self, channel_id: str) -> Channel:
        for c in self.components:
            if c.id == channel_id:
                return c
        raise ChannelMismatch(f"channel {channel_id!r} carries no component of this offer")

    @property
    def channel_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)


@dataclass(frozen=True)
class ConfirmationWave:
    absorber_id: str
    channel_id: str
    response_amplitude: complex


@dataclass(frozen=True)
class Transaction:
    tick: int
    emitter_id: str
    winner_id: str
    winner_system: str
    channel_id: str
    omega: float
    emitter_transition: Pair
    absorber_transition: Pair
    emission_event: int
    absorption_event: int


@dataclass(frozen=True)
class NullMeasurement:
    tick: int
    absorber_id: str
    channel_id: str


def _as_channel(raw) -> Channel:
    if isinstance(raw, Channel):
        return raw
    cid, amp = raw
    return Channel(cid, cid, complex(amp))


def mk_offer_wave(
    emitter: EmitterState,
    target_gap: Pair,
    raw_channels: Sequence,
    registry: Sequence[Registrant],
    energy_tol: float = DEFAULT_ENERGY_TOL,
) -> OfferWave:
    """Build the offer emitted on ``target_gap``, keeping only absorber-backed components.

    ``raw_channels`` holds :class:`Channel` values or ``(id, amplitude)`` pairs.
    Components whose channel hosts no eligible absorber do not exist; the
    survivors are renormalized to unit total probability.
    """
    if not emitter.excited:
        raise GroundStateEmitter(f"emitter {emitter.id} is in its ground state")
    target_gap = tuple(target_gap)
    src, dst = target_gap
    if target_gap not in emitter.spec.allowed or src != emitter.current_level or dst >= src:
        raise ForbiddenTransition(
            f"emitter {emitter.id}: {target_gap} is not an allowed downward transition "
            f"from level {emitter.current_level}"
        )
    if not raw_channels:
        raise ValueError("an offer needs at least one channel")
    omega = -emitter.spec.gap(src, dst)
    supported = {r.channel for r in registry if r.eligible_for(omega, energy_tol)}
    kept = [c for c in map(_as_channel, raw_channels) if c.id in supported and c.amplitude != 0]
    if not kept:
        raise NoAbsorbers(f"emitter {emitter.id}: no channel has an absorber for omega={omega!r}")
    return OfferWave(emitter.id, target_gap, omega, normalize_channels(kept))


def conjugate_response(
    ow: OfferWave, absorber: AbsorberState, energy_tol: float = DEFAULT_ENERGY_TOL
) -> ConfirmationWave:
    comp = ow.component(absorber.channel)
    if not absorber.eligible_for(ow.omega, energy_tol):
        raise EnergyMismatch(f"absorber {absorber.id} has no transition resonant with {ow.omega!r}")
    return ConfirmationWave(absorber.id, comp.id, comp.amplitude.conjugate())


def eligible_absorbers(
    ow: OfferWave, registry: Sequence[Registrant], energy_tol: float = DEFAULT_ENERGY_TOL
) -> dict[str, list[str]]:
    """Ids of registry entries that can confirm ``ow``, keyed by channel in offer order.

    Detectors appear once, under their own id, standing for all their
    still-unexcited constituents.
    """
    if energy_tol < 0:
        raise ValueError("energy_tol must be >= 0")
    groups: dict[str, list[str]] = {}
    for cid in ow.channel_ids:
        ids = [r.id for r in registry if r.channel == cid and r.eligible_for(ow.omega, energy_tol)]
        if ids:
            groups[cid] = ids
    return groups

