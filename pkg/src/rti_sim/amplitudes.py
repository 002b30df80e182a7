"""First-order transition amplitudes and the no-confirmation probability algebra.

All probabilities that scale with a constituent count are evaluated through
``n * log1p(-alpha)`` so that counts like 10**23 never touch a power loop and
the base-10 logarithm survives when the probability itself underflows.
"""

from __future__ import annotations

import cmath
import decimal
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import InvalidAlpha

ALPHA = 0.007
ALPHA_PHYSICAL = 1 / 137.035999084
SERIES_CUTOFF = 1e-8

Count = Union[int, str]


@dataclass(frozen=True)
class CouplingConstant:
    alpha: float = ALPHA

    def __post_init__(self):
        check_alpha(self.alpha)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _alpha(alpha) -> float:
    if isinstance(alpha, CouplingConstant):
        return alpha.alpha
    return check_alpha(alpha)


class Sign(enum.Enum):
    """Selects the sign in front of omega in the exponent."""

    ABSORPTION = -1
    EMISSION = +1


@dataclass(frozen=True)
class TransitionParams:
    matrix_element: float
    e_initial: float
    e_final: float
    omega: float
    sign: Sign = Sign.ABSORPTION
    tau: float = 1.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.matrix_element < 0:
            raise ValueError("matrix_element must be >= 0")

    @classmethod
    def from_detuning(cls, detuning: float, matrix_element: float, tau: float) -> "TransitionParams":
        """Absorption from level energy 0 at unit frequency, offset to the requested detuning."""
        return cls(matrix_element, 0.0, 1.0 + detuning, 1.0, Sign.ABSORPTION, tau)


def detuning(p: TransitionParams) -> float:
    return p.e_final - p.e_initial + p.sign.value * p.omega


def _sinc(x: float) -> float:
    if abs(x) < SERIES_CUTOFF:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


def time_integral(delta: float, tau: float) -> complex:
    """``int_0^tau exp(i*delta*t) dt`` written as ``tau * e^{i x} * sinc(x)``, ``x = delta*tau/2``."""
    x = 0.5 * delta * tau
    return tau * _sinc(x) * cmath.exp(1j * x)


def transition_amplitude(p: TransitionParams) -> complex:
    return -1j * p.matrix_element * time_integral(detuning(p), p.tau)


class TransitionProbability(NamedTuple):
    prob: float
    breakdown: bool
    raw: float


def transition_probability(p: TransitionParams) -> TransitionProbability:
    """``|c|^2`` clamped to 1; ``breakdown`` marks where first-order theory stopped conserving probability."""
    raw = abs(transition_amplitude(p)) ** 2
    if raw > 1.0:
        return TransitionProbability(1.0, True, raw)
    return TransitionProbability(raw, False, raw)


def parse_count(n: Count) -> int:
    """Accept an int or a decimal string (``"60"``, ``"1e23"``) naming a nonnegative integer."""
    if isinstance(n, bool):
        raise ValueError("count must be an integer, not a bool")
    if isinstance(n, int):
        value = n
    elif isinstance(n, float):
        if not n.is_integer():
            raise ValueError(f"count must be integral, got {n!r}")
        value = int(n)
    else:
        try:
            d = decimal.Decimal(str(n).strip())
        except decimal.InvalidOperation:
            raise ValueError(f"not a count: {n!r}") from None
        if not d.is_finite() or d != d.to_integral_value():
            raise ValueError(f"count must be a finite integer, got {n!r}")
        value = int(d)
    if value < 0:
        raise ValueError(f"count must be >= 0, got {value}")
    return value


def _log_no_cw(alpha, n: Count) -> float:
    return float(parse_count(n)) * math.log1p(-_alpha(alpha))


class NoCWProbability(NamedTuple):
    prob: float
    log10_prob: float


def prob_no_cw(alpha, n: Count) -> NoCWProbability:
    """``(1 - alpha)**n`` and its base-10 log; the log stays finite after the value underflows."""
    x = _log_no_cw(alpha, n)
    return NoCWProbability(math.exp(x), x / math.log(10.0))


def prob_cw(alpha, n: Count) -> float:
    return -math.expm1(_log_no_cw(alpha, n))
