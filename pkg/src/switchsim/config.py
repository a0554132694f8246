"""Scenario configuration: defaults, file parsing, validation, sweep specs.

Defaults reproduce the reference workload: one 33 kbps FACH shared with a
24 kbps CBR signaling source, 384 kbps DCHs with a 250 ms switch cost, and
Pareto(1.1) ON/OFF TCP traffic averaging 30 kbyte bursts of 280-byte packets.
Config files are flat `key = value` text; CLI flags override file values.
"""

import dataclasses
from dataclasses import dataclass, field

from .policies import KINDS, PolicyConfig

SCHEDULERS = ("ps", "las")


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


@dataclass
class ScenarioConfig:
    # scenario
    policy: str = "QS"
    scheduler: str = "ps"          # FACH data discipline: ps | las
    n_tcp: int = 2
    n_dch: int = 1
    # policy thresholds
    t_h: int = 8                   # upper queue-length threshold (packets)
    t_l: int = 1                   # lower queue-length threshold (packets)
    s: int = 8                     # flow-size threshold (packets)
    t_out: float = 2.0             # inactivity timer (seconds)
    # run control
    seed: int = 1
    duration_s: float = 20000.0
    warmup_frac: float = 0.05
    # radio
    fach_rate_bps: float = 33000.0
    dch_rate_bps: float = 384000.0
    switch_time_s: float = 0.250
    radio_prop_s: float = 0.0
    # CBR signaling on the FACH
    cbr_enabled: bool = True
    cbr_packet_bytes: int = 1000
    cbr_interval_s: float = 1.0 / 3.0
    # traffic model
    traffic_enabled: bool = True
    pareto_shape: float = 1.1
    mean_file_bytes: float = 30000.0
    t_on_s: float = 0.3
    p_off: float = 0.33
    t_off_s: float = 5.0
    packet_bytes: int = 280
    # transport
    w_max: int = 20
    initial_cwnd: float = 2.0
    idle_restart_s: float = 0.5    # window restarts after this much idle; 0 disables
    ack_bytes: int = 40
    # backhaul between TCP sources and the base station
    backhaul_rate_bps: float = 5_000_000.0
    backhaul_delay_s: float = 0.030

    def mean_burst_packets(self) -> float:
        return self.mean_file_bytes / self.packet_bytes

    def policy_config(self) -> PolicyConfig:
        return PolicyConfig(kind=self.policy, t_h=self.t_h, t_l=self.t_l,
                            s=self.s, t_out=self.t_out)

    def validate(self) -> None:
        if self.policy not in KINDS:
            raise ConfigError(f"policy: unknown kind {self.policy!r}, expected one of {KINDS}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler: expected ps or las, got {self.scheduler!r}")
        if self.n_tcp < 1:
            raise ConfigError(f"n_tcp: must be >= 1, got {self.n_tcp}")
        if self.n_dch < 1:
            raise ConfigError(f"n_dch: must be >= 1, got {self.n_dch}")
        self.policy_config().validate()
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError(f"seed: must fit in 64 bits, got {self.seed}")
        if self.duration_s <= 0:
            raise ConfigError(f"duration_s: must be positive, got {self.duration_s}")
        if not 0.0 <= self.warmup_frac < 1.0:
            raise ConfigError(f"warmup_frac: must be in [0, 1), got {self.warmup_frac}")
        for name in ("fach_rate_bps", "dch_rate_bps", "cbr_interval_s", "t_on_s",
                     "t_off_s", "mean_file_bytes", "backhaul_rate_bps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be positive, got {getattr(self, name)}")
        for name in ("switch_time_s", "radio_prop_s", "backhaul_delay_s", "idle_restart_s"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be non-negative, got {getattr(self, name)}")
        for name in ("packet_bytes", "cbr_packet_bytes", "ack_bytes", "w_max"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1, got {getattr(self, name)}")
        if self.initial_cwnd < 1:
            raise ConfigError(f"initial_cwnd: must be >= 1, got {self.initial_cwnd}")
        if self.pareto_shape <= 1.0:
            raise ConfigError(f"pareto_shape: must exceed 1, got {self.pareto_shape}")
        if not 0.0 <= self.p_off <= 1.0:
            raise ConfigError(f"p_off: must be in [0, 1], got {self.p_off}")

    def replace(self, **overrides) -> "ScenarioConfig":
        return dataclasses.replace(self, **overrides)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(
            f"{name}: cannot parse value {raw!r} as {kind.__name__}") from None


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines (# starts a comment) into overrides."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        overrides[key] = _coerce(key, value)
    return overrides


def load_config(path: str | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Defaults, then file values, then explicit overrides; validated."""
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    if overrides:
        for key, val in overrides.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, str(val)) if isinstance(val, str) else val
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg


# Default threshold grid for sweeps.  Spans the useful range on both sides of
# the 12-packet mark while keeping a full policy comparison tractable on a
# few cores.
DEFAULT_SWEEP_VALUES = (1, 2, 4, 8, 12, 20, 30)

# Which threshold a policy sweeps when compared "at its best":  queue-based
# kinds move t_h, flow-based kinds move s, and QSFS moves both together.
SWEEP_PARAM_FOR_KIND = {
    "QS": "t_h",
    "MT": "t_h",
    "FS": "s",
    "FSDCH": "s",
    "QSFS": "both",
}


@dataclass
class SweepSpec:
    param: str                     # "s" | "t_h" | "both"
    values: tuple[int, ...] = DEFAULT_SWEEP_VALUES
    policies: tuple[str, ...] = ("QS", "FS", "QSFS", "FSDCH")
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)

    def validate(self) -> None:
        if self.param not in ("s", "t_h", "both"):
            raise ConfigError(f"param: expected s, t_h or both, got {self.param!r}")
        if not self.values:
            raise ConfigError("values: empty sweep value list")
        if any(v < 1 for v in self.values):
            raise ConfigError(f"values: must be positive integers, got {list(self.values)}")
        if not self.policies:
            raise ConfigError("policies: empty policy list")
        for kind in self.policies:
            if kind not in KINDS:
                raise ConfigError(f"policies: unknown kind {kind!r}")
        if not self.seeds:
            raise ConfigError("seeds: empty seed list")

    def apply(self, base: ScenarioConfig, policy: str, value: int, seed: int) -> ScenarioConfig:
        fields = {"policy": policy, "seed": seed}
        if self.param in ("t_h", "both"):
            fields["t_h"] = value
        if self.param in ("s", "both"):
            fields["s"] = value
        return base.replace(**fields)
