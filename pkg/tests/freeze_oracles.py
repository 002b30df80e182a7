"""Regenerate frozen_oracles.json: ``python3 tests/freeze_oracles.py``."""

import json
import math
from pathlib import Path

from oracles import born_enumeration, mp_no_cw, quad_amplitude, scan_threshold


def compute() -> dict:
    out = {"amplitude": [], "no_cw": [], "threshold": [], "born": []}
    for m, delta, tau in [(1.0, math.pi, 1.0), (0.1, 0.0, 2.0), (0.3, 2.0, 1.7), (1.0, 1e-12, 3.0)]:
        c = quad_amplitude(m, delta, tau)
        out["amplitude"].append({"m": m, "delta": delta, "tau": tau, "re": c.real, "im": c.imag, "prob": abs(c) ** 2})
    for n in ["0", "1", "60", "1000", "1e23"]:
        p, lg = mp_no_cw("0.007", n)
        out["no_cw"].append({"alpha": 0.007, "n": n, "prob": float(p), "log10_prob": float(lg), "prob_str": str(p)})
    for target in [0.007, 0.5, 0.9, 0.999999]:
        out["threshold"].append({"alpha": 0.007, "target": target, "n": scan_threshold(0.007, target)})
    for w, counts in [({"L": 0.5, "R": 0.5}, {"L": 2, "R": 1}), ({"L": 0.64, "R": 0.36}, {"L": 2, "R": 1})]:
        for rule in ("all", "responders"):
            out["born"].append(
                {"weights": w, "absorbers": counts, "alpha": 0.007, "rule": rule, "freq": born_enumeration(w, counts, 0.007, rule)}
            )
    return out


if __name__ == "__main__":
    path = Path(__file__).with_name("frozen_oracles.json")
    path.write_text(json.dumps(compute(), indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")
