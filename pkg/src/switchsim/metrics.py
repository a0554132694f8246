"""Per-burst response accounting, run summaries, closed-form transfer times.

Response time of a burst runs from its generation at the source until the
sender holds the ACK of its last packet.  Slowdown is reported two ways: the
aggregate form (mean response / mean burst size) and the per-burst mean of
response/size.  Bursts generated during the warmup window are dropped from
summaries.
"""

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

FACH = "FACH"
DCH = "DCH"

DEFAULT_FACH_RATE = 33000.0
DEFAULT_DCH_RATE = 384000.0
DEFAULT_CBR_RATE = 24000.0
DEFAULT_SETUP_S = 0.250


def estimate_transfer_time(n_packets: int, packet_bytes: int, channel: str,
                           cbr_active: bool = False, include_setup: bool = False, *,
                           fach_rate_bps: float = DEFAULT_FACH_RATE,
                           dch_rate_bps: float = DEFAULT_DCH_RATE,
                           cbr_rate_bps: float = DEFAULT_CBR_RATE,
                           setup_s: float = DEFAULT_SETUP_S) -> float:
    """Fluid transfer time of n packets on one channel, decimal kilo units.

    FACH under CBR load serves data at the residual rate (33 - 24 kbps by
    default); the DCH optionally charges one set-up delay up front.
    """
    if n_packets < 1:
        raise ValueError(f"n_packets must be >= 1, got {n_packets}")
    if packet_bytes <= 0:
        raise ValueError(f"packet_bytes must be positive, got {packet_bytes}")
    bits = n_packets * packet_bytes * 8.0
    if channel == DCH:
        setup = setup_s if include_setup else 0.0
        return setup + bits / dch_rate_bps
    if channel == FACH:
        rate = fach_rate_bps - (cbr_rate_bps if cbr_active else 0.0)
        if rate <= 0:
            raise ValueError("CBR load leaves no residual FACH rate")
        return bits / rate
    raise ValueError(f"channel must be {FACH!r} or {DCH!r}, got {channel!r}")


class EmptyRunError(RuntimeError):
    """A summary was requested but no burst completed after the warmup."""


class BurstRecord(NamedTuple):
    conn: int
    burst: int
    size: int            # packets
    generated_at: float
    completed_at: float


@dataclass
class RunSummary:
    policy: str
    scheduler: str
    n_tcp: int
    n_dch: int
    s: int
    t_h: int
    t_l: int
    t_out: float
    seed: int
    duration_s: float
    n_bursts: int
    mean_response_s: float
    slowdown_aggregate: float
    slowdown_per_burst: float
    util_fach: float
    util_dch: float
    switches_per_flow: float


CSV_HEADER = ("policy,scheduler,n_tcp,n_dch,s,t_h,t_l,t_out,seed,duration_s,"
              "n_bursts,mean_response_s,slowdown_aggregate,slowdown_per_burst,"
              "util_fach,util_dch,switches_per_flow")


def fmt6(x: float) -> str:
    """Fixed 6-significant-digit float formatting for stable CSV bytes."""
    return f"{x:.6g}"


def summary_row(rs: RunSummary) -> str:
    return ",".join((
        rs.policy, rs.scheduler, str(rs.n_tcp), str(rs.n_dch), str(rs.s),
        str(rs.t_h), str(rs.t_l), fmt6(rs.t_out), str(rs.seed),
        fmt6(rs.duration_s), str(rs.n_bursts), fmt6(rs.mean_response_s),
        fmt6(rs.slowdown_aggregate), fmt6(rs.slowdown_per_burst),
        fmt6(rs.util_fach), fmt6(rs.util_dch), fmt6(rs.switches_per_flow),
    ))


class MetricsCollector:
    """Accumulates burst records and channel/service counters during a run."""

    def __init__(self) -> None:
        self.records: list[BurstRecord] = []
        self._seen: set[tuple[int, int]] = set()
        self.fach_busy_s = 0.0
        self.dch_busy_s = 0.0
        self.switch_count = 0
        self.flow_count = 0        # flows that served at least one packet
        self.max_cbr_wait_s = 0.0
        self.fach_data_served: dict[int, int] = {}
        self.dch_data_served: dict[int, int] = {}

    def record(self, rec: BurstRecord) -> None:
        key = (rec.conn, rec.burst)
        if key in self._seen:
            raise ValueError(f"duplicate burst record for conn {rec.conn} burst {rec.burst}")
        if rec.completed_at <= rec.generated_at:
            raise ValueError(f"burst {key} completed at {rec.completed_at} "
                             f"not after generation at {rec.generated_at}")
        self._seen.add(key)
        self.records.append(rec)

    def count_fach_service(self, cid: int) -> None:
        self.fach_data_served[cid] = self.fach_data_served.get(cid, 0) + 1

    def count_dch_service(self, cid: int) -> None:
        self.dch_data_served[cid] = self.dch_data_served.get(cid, 0) + 1


def summarize(records: Iterable[BurstRecord], *, warmup_cutoff: float,
              policy: str, scheduler: str, n_tcp: int, n_dch: int, s: int,
              t_h: int, t_l: int, t_out: float, seed: int, duration_s: float,
              util_fach: float, util_dch: float, switches_per_flow: float,
              allow_empty: bool = False) -> RunSummary:
    """Reduce completed bursts to one summary; order of records is irrelevant.

    With allow_empty, a run where nothing completed after the warmup (a
    saturated cell) reports zero bursts and infinite response/slowdown instead
    of raising, so sweeps can rank it as arbitrarily bad.
    """
    post = [r for r in records if r.generated_at >= warmup_cutoff]
    if not post:
        if not allow_empty:
            raise EmptyRunError("no completed bursts after the warmup cutoff")
        inf = float("inf")
        return RunSummary(
            policy=policy, scheduler=scheduler, n_tcp=n_tcp, n_dch=n_dch, s=s,
            t_h=t_h, t_l=t_l, t_out=t_out, seed=seed, duration_s=duration_s,
            n_bursts=0, mean_response_s=inf, slowdown_aggregate=inf,
            slowdown_per_burst=inf, util_fach=util_fach, util_dch=util_dch,
            switches_per_flow=switches_per_flow,
        )
    n = len(post)
    mean_response = math.fsum(r.completed_at - r.generated_at for r in post) / n
    mean_size = math.fsum(r.size for r in post) / n
    per_burst = math.fsum((r.completed_at - r.generated_at) / r.size for r in post) / n
    return RunSummary(
        policy=policy, scheduler=scheduler, n_tcp=n_tcp, n_dch=n_dch, s=s,
        t_h=t_h, t_l=t_l, t_out=t_out, seed=seed, duration_s=duration_s,
        n_bursts=n, mean_response_s=mean_response,
        slowdown_aggregate=mean_response / mean_size,
        slowdown_per_burst=per_burst,
        util_fach=util_fach, util_dch=util_dch,
        switches_per_flow=switches_per_flow,
    )
