"""rti-sim command line: run ensembles, classify absorbers, evaluate amplitudes, export causets."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import kernels
from .amplitudes import ALPHA, Sign, TransitionParams, transition_amplitude, transition_probability
from .classifier import DELTA_MICRO, EPS_MACRO, classify
from .engine import DEFAULT_SEED, EnsembleStats, Scenario, run_trajectory, simulate_runs
from .errors import RTIError, SchemaError
from .gate import BUILTINS, GateRejection, builtin
from .scenario_io import parse_scenario

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
FORMATS = ("csv", "json", "dot")
CSV_COLUMNS = ("run", "tick", "channel", "absorber_id", "is_null")
SEED_ENV = "RTI_SIM_SEED"


class Rejected(Exception):
    def __init__(self, rejection: GateRejection):
        self.rejection = rejection
        super().__init__(rejection.message)


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    runs: int = 1
    seed: int | None = None
    out: Path = Path(".")
    formats: frozenset[str] = frozenset(FORMATS)
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.formats or not self.formats <= set(FORMATS):
            raise ValueError(f"formats must be a nonempty subset of {FORMATS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def load_scenario(name_or_path: str, seed: int | None = None) -> Scenario:
    """A built-in name or a JSON file. Seed precedence: ``seed`` > file > ``RTI_SIM_SEED`` > 0xC0FFEE."""
    if name_or_path in BUILTINS and not Path(name_or_path).exists():
        chosen = seed if seed is not None else _env_seed()
        sc = builtin(name_or_path, chosen if chosen is not None else DEFAULT_SEED)
        if isinstance(sc, GateRejection):
            raise Rejected(sc)
        return sc
    sc = parse_scenario(Path(name_or_path).read_bytes())
    return sc if seed is None else sc.with_seed(seed)


def _fail(code: int, kind: str, message: str, **extra) -> int:
    doc = {"error": kind, "message": message, **extra}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return code


def _guarded(fn):
    def wrapper(args) -> int:
        try:
            return fn(args)
        except Rejected as exc:
            print(json.dumps(exc.rejection.as_dict(), sort_keys=True), file=sys.stderr)
            return EXIT_INVALID
        except SchemaError as exc:
            return _fail(EXIT_INVALID, type(exc).__name__, str(exc), path=exc.path)
        except (RTIError, ValueError, KeyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            return _fail(EXIT_INVALID, type(exc).__name__, str(msg))
        except OSError as exc:
            return _fail(EXIT_IO, type(exc).__name__, str(exc))

    return wrapper


# -- run ---------------------------------------------------------------------------


def detections_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        for o in r.outcomes:
            if o.transaction is not None:
                t = o.transaction
                w.writerow((r.run_index, t.tick, t.channel_id, t.winner_id, 0))
            for nm in o.nulls:
                w.writerow((r.run_index, nm.tick, nm.channel_id, nm.absorber_id, 1))
    return buf.getvalue()


def stats_document(scenario: Scenario, stats: EnsembleStats) -> str:
    doc = {"seed": scenario.seed, "alpha": scenario.alpha, **stats.as_dict()}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def summary_table(stats: EnsembleStats) -> str:
    rows = [("runs", str(stats.runs)), ("transactions", str(stats.transactions)), ("no detection", str(stats.no_detection))]
    for cid, n in stats.channel_counts.items():
        rows.append((f"channel {cid}", f"{n}  ({stats.channel_frequencies[cid]:.4f})"))
    for sid, n in stats.absorber_counts.items():
        rows.append((f"absorber {sid}", f"{n}  nulls={stats.null_counts.get(sid, 0)}"))
    if stats.mean_ticks_to_transaction is not None:
        rows.append(("mean ticks", f"{stats.mean_ticks_to_transaction:.2f}"))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def cmd_run(config: RunConfig) -> int:
    scenario = load_scenario(config.scenario, config.seed)
    results = simulate_runs(scenario, config.runs, workers=config.workers, causet_runs=(0,))
    stats = EnsembleStats.from_results(scenario, results)
    config.out.mkdir(parents=True, exist_ok=True)
    if "json" in config.formats:
        (config.out / "stats.json").write_text(stats_document(scenario, stats))
    if "csv" in config.formats:
        (config.out / "detections.csv").write_text(detections_csv(results))
    if "dot" in config.formats:
        (config.out / "causet.dot").write_bytes(results[0].causet.export("dot"))
    print(summary_table(stats))
    return EXIT_OK


def _formats(raw: str) -> frozenset[str]:
    parts = frozenset(p.strip().lower() for p in raw.split(",") if p.strip())
    bad = parts - set(FORMATS)
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"formats must be a comma list drawn from {','.join(FORMATS)}")
    return parts


def _run(args) -> int:
    cfg = RunConfig(args.scenario, args.runs, args.seed, Path(args.out), args.format, args.workers)
    return cmd_run(cfg)


# -- classify ------------------------------------------------------------------------


def _classify(args) -> int:
    result = classify(args.n, args.alpha, args.eps_macro, args.delta_micro)
    print(json.dumps(result.as_dict(), sort_keys=True))
    return EXIT_OK


# -- amplitude -------------------------------------------------------------------------


def _sweep(spec: str) -> list[float]:
    try:
        lo, hi, num = spec.split(":")
        lo_f, hi_f, n = float(lo), float(hi), int(num)
    except ValueError:
        raise ValueError(f"--sweep wants start:stop:count, got {spec!r}") from None
    if n < 2 or lo_f < 0 or hi_f < lo_f:
        raise ValueError("--sweep needs count >= 2 and 0 <= start <= stop")
    return [lo_f + (hi_f - lo_f) * k / (n - 1) for k in range(n)]


def _params(args, tau: float) -> TransitionParams:
    if args.detuning is not None:
        return TransitionParams.from_detuning(args.detuning, args.matrix_element, tau)
    return TransitionParams(args.matrix_element, args.e_initial, args.e_final, args.omega, Sign[args.sign.upper()], tau)


def _amplitude(args) -> int:
    for name in ("matrix_element", "e_initial", "e_final", "omega", "tau", "detuning"):
        v = getattr(args, name)
        if v is not None and not math.isfinite(v):
            raise ValueError(f"{name} must be finite")
    if args.sweep:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("tau", "prob"))
        for tau in _sweep(args.sweep):
            w.writerow((repr(tau), repr(transition_probability(_params(args, tau)).raw)))
        if args.out:
            Path(args.out).write_text(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return EXIT_OK
    p = _params(args, args.tau)
    c = transition_amplitude(p)
    tp = transition_probability(p)
    print(json.dumps({"re": c.real, "im": c.imag, "prob": tp.raw, "breakdown": tp.breakdown}, sort_keys=True))
    return EXIT_OK


# -- export-causet ---------------------------------------------------------------------


def _export(args) -> int:
    scenario = load_scenario(args.scenario, args.seed)
    result = run_trajectory(scenario, args.run_index, stop_at_first=not args.all, build_causet=True)
    data = result.causet.export(args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rti-sim", description="Transactional-interpretation measurement simulator")
    ap.add_argument("--backend", choices=kernels.available_backends(), help="gate kernel to use")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an ensemble and write stats/detections/causet")
    run.add_argument("--scenario", required=True, help=f"JSON file or built-in ({', '.join(sorted(BUILTINS))})")
    run.add_argument("--runs", type=int, default=1)
    run.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    run.add_argument("--out", default=".")
    run.add_argument("--format", type=_formats, default=frozenset(FORMATS), help="comma list of csv,json,dot")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=_guarded(_run))

    cl = sub.add_parser("classify", help="micro/meso/macro class of an N-constituent absorber")
    cl.add_argument("--n", required=True, help="constituent count; integer or decimal string like 1e23")
    cl.add_argument("--alpha", type=float, default=ALPHA)
    cl.add_argument("--eps-macro", type=float, default=EPS_MACRO)
    cl.add_argument("--delta-micro", type=float, default=DELTA_MICRO)
    cl.set_defaults(func=_guarded(_classify))

    am = sub.add_parser("amplitude", help="first-order transition amplitude c(tau)")
    am.add_argument("--matrix-element", "-M", type=float, default=1.0)
    am.add_argument("--e-initial", type=float, default=0.0)
    am.add_argument("--e-final", type=float, default=1.0)
    am.add_argument("--omega", type=float, default=1.0)
    am.add_argument("--sign", choices=[s.name.lower() for s in Sign], default="absorption")
    am.add_argument("--tau", type=float, default=1.0)
    am.add_argument("--detuning", type=float, default=None, help="shortcut: set the detuning directly")
    am.add_argument("--sweep", default=None, help="start:stop:count over tau; emits tau,prob CSV")
    am.add_argument("--out", default=None)
    am.set_defaults(func=_guarded(_amplitude))

    ex = sub.add_parser("export-causet", help="run one trajectory and export its causal set")
    ex.add_argument("--scenario", required=True)
    ex.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    ex.add_argument("--run-index", type=int, default=0)
    ex.add_argument("--all", action="store_true", help="keep going after the first transaction")
    ex.add_argument("--format", choices=("dot", "json"), default="dot")
    ex.add_argument("--out", default=None)
    ex.set_defaults(func=_guarded(_export))
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend:
        kernels.use_backend(args.backend)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
