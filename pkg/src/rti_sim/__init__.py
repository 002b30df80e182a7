"""Monte Carlo simulator for transactional measurement: offer waves, confirmation waves and the causal sets they grow."""

from .amplitudes import ALPHA, Sign, TransitionParams, prob_cw, prob_no_cw, transition_amplitude, transition_probability
from .causet import CausalSet, Event, EventKind
from .classifier import Scale, classify, threshold_count
from .engine import EnsembleStats, RunResult, Scenario, Status, run_ensemble, run_trajectory, simulate_runs, step
from .gate import GateRejection, SourceCategory, SourceKind, builtin, light_tight_audit, maudlin_scenario, validate_source
from .scenario_io import parse_scenario, serialize_scenario

__version__ = "0.1.0"
