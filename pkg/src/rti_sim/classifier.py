"""Micro / meso / macro classification by constituent count."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .amplitudes import ALPHA, Count, _alpha, parse_count, prob_cw, prob_no_cw
from .errors import InvalidTarget, InvalidThresholds

EPS_MACRO = 1e-6
DELTA_MICRO = 0.05


class Scale(enum.IntEnum):
    MICRO = 0
    MESO = 1
    MACRO = 2

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class ScaleClass:
    scale: Scale
    n: int
    alpha: float
    prob_cw: float
    prob_no_cw: float
    log10_prob_no_cw: float

    def as_dict(self) -> dict:
        return {
            "class": self.scale.label,
            "n": str(self.n),
            "alpha": self.alpha,
            "prob_cw": self.prob_cw,
            "prob_no_cw": self.prob_no_cw,
            "log10_prob_no_cw": self.log10_prob_no_cw,
        }


def classify(n: Count, alpha=ALPHA, eps_macro: float = EPS_MACRO, delta_micro: float = DELTA_MICRO) -> ScaleClass:
    if not 0 < delta_micro < 1 - eps_macro < 1:
        raise InvalidThresholds(
            f"need 0 < delta_micro < 1 - eps_macro < 1, got delta_micro={delta_micro}, eps_macro={eps_macro}"
        )
    a = _alpha(alpha)
    count = parse_count(n)
    no = prob_no_cw(a, count)
    p = prob_cw(a, count)
    # compare in log space so an underflowed prob_no_cw still classifies
    if no.log10_prob <= math.log10(eps_macro):
        scale = Scale.MACRO
    elif p <= delta_micro:
        scale = Scale.MICRO
    else:
        scale = Scale.MESO
    return ScaleClass(scale, count, a, p, no.prob, no.log10_prob)


def threshold_count(alpha, target_prob_cw: float) -> int:
    """Smallest n with ``prob_cw(alpha, n) >= target_prob_cw``."""
    if not 0.0 < target_prob_cw < 1.0:
        raise InvalidTarget(f"target must lie in (0, 1), got {target_prob_cw!r}")
    a = _alpha(alpha)
    n = max(0, math.ceil(math.log1p(-target_prob_cw) / math.log1p(-a)))
    # the log ratio can land one off either way after rounding
    while n > 0 and prob_cw(a, n - 1) >= target_prob_cw:
        n -= 1
    while prob_cw(a, n) < target_prob_cw:
        n += 1
    return n
