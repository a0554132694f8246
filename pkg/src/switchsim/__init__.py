"""Event-driven simulator of channel switching policies on a UMTS downlink.

A single cell serves TCP traffic over one shared FACH (slow, also carrying
priority CBR signaling) and a small pool of dedicated DCH channels (fast,
with a set-up cost).  The policy engine decides when a connection moves
between the two.  Runs are deterministic for a fixed (config, seed).
"""

from .config import ScenarioConfig, SweepSpec, ConfigError
from .core import EventQueue, Event, RandomStreams, sample_exponential, sample_pareto_burst
from .engine import Simulation, run_scenario
from .metrics import RunSummary, estimate_transfer_time, CSV_HEADER
from .policies import PolicyConfig

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "SweepSpec",
    "ConfigError",
    "EventQueue",
    "Event",
    "RandomStreams",
    "sample_exponential",
    "sample_pareto_burst",
    "Simulation",
    "run_scenario",
    "RunSummary",
    "estimate_transfer_time",
    "CSV_HEADER",
    "PolicyConfig",
    "__version__",
]
