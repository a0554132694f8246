"""Channel-switching decision rules.

Five policy kinds decide when a connection moves between the shared FACH and
a dedicated DCH:

* QS    -- switch up when the NodeB queue exceeds t_h; waiter with the
           largest queue wins a freed DCH.
* FS    -- switch up when the current flow has been served more than s
           packets; flow counter clears on return to FACH.
* QSFS  -- both QS and FS conditions must hold.
* FSDCH -- a new flow (served at most s packets so far) asks for a DCH
           immediately; old flows fall back to the QS rule.  A freed DCH goes
           to the oldest new-flow request first, else to the old flow with
           the largest queue.  An idle old flow is preempted at once when
           others are waiting.
* MT    -- QS trigger with plain FCFS waiter selection (baseline).

Everything here is a pure function of explicit state so the rules can be
unit-tested without the simulation kernel.  The engine owns the request set
and timers; these functions only say what to do next.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

QS = "QS"
FS = "FS"
QSFS = "QSFS"
FSDCH = "FSDCH"
MT = "MT"
KINDS = (QS, FS, QSFS, FSDCH, MT)

# Kinds whose rules read the per-flow served-packet counter.
FLOW_AWARE = frozenset((FS, QSFS, FSDCH))

# Actions returned by the decision functions.
NONE = "none"
START_TIMER = "start-timer"
PREEMPT = "preempt-now"
VACATE = "vacate-and-grant"
RESTART = "restart-timer"


@dataclass
class PolicyConfig:
    kind: str = QS
    t_h: int = 8
    t_l: int = 1
    s: int = 8
    t_out: float = 2.0

    def validate(self) -> None:
        from .config import ConfigError  # local import avoids a cycle
        if self.kind not in KINDS:
            raise ConfigError(f"policy: unknown kind {self.kind!r}, expected one of {KINDS}")
        if self.t_l < 0:
            raise ConfigError(f"t_l: must be >= 0, got {self.t_l}")
        if self.t_h < self.t_l:
            raise ConfigError(f"t_h: must be >= t_l ({self.t_l}), got {self.t_h}")
        if self.s < 0:
            raise ConfigError(f"s: must be >= 0, got {self.s}")
        if self.t_out <= 0:
            raise ConfigError(f"t_out: must be positive, got {self.t_out}")


def wants_dch(kind: str, q: int, f: int, t_h: int, s: int) -> bool:
    """FACH-side trigger: should this connection try to move to a DCH?

    Evaluated after a packet arrival (and when a switch back to FACH settles
    with backlog), so q counts at least the packet that prompted the check.
    """
    if kind == FS:
        return f > s
    if kind == QSFS:
        return q > t_h and f > s
    if kind == FSDCH:
        return f <= s or q > t_h
    return q > t_h  # QS and MT


def after_dch_service(kind: str, q: int, f: int, t_l: int, s: int,
                      pool_full: bool, have_request: bool) -> str:
    """Rule applied after each DCH service completion left queue length q.

    Below t_l the connection is going idle: normally an inactivity timer
    starts, but an FSDCH old flow is preempted on the spot when the pool is
    full and someone is waiting.
    """
    if q >= t_l:
        return NONE
    if kind == FSDCH and f > s and pool_full and have_request:
        return PREEMPT
    return START_TIMER


def on_timer_expired(q: int, t_l: int, pool_full: bool, have_request: bool) -> str:
    """Same for every kind: vacate only if still idle, the pool is full and
    someone is waiting; otherwise keep the DCH and re-arm the timer."""
    if q < t_l and pool_full and have_request:
        return VACATE
    return RESTART


def reset_flow_on_vacate(kind: str, f: int, s: int) -> bool:
    """Does returning to FACH end the current flow (clear f)?

    FS/QSFS always clear on a successful switch back; FSDCH only when the
    flow was still new (it kept its at-most-s packets on the DCH); queue-based
    kinds never track flows.
    """
    if kind in (FS, QSFS):
        return True
    if kind == FSDCH:
        return f <= s
    return False


def resets_flow_on_idle(kind: str) -> bool:
    """Only flow-aware kinds give f a boundary after a quiet spell on FACH."""
    return kind in FLOW_AWARE


def select_waiter(kind: str, s: int,
                  entries: Sequence[tuple[int, float, int, int]]) -> int:
    """Pick the winning request for a freed DCH.

    entries are (conn_id, enqueued_at, q, f) for every pending request.
    QS/FS/QSFS take the largest queue; MT takes the oldest request (FCFS);
    FSDCH serves new flows (f <= s) oldest-first and falls back to largest
    queue among old flows.  All ties break toward the lowest connection id.
    """
    if not entries:
        raise ValueError("select_waiter called with an empty request set")
    if kind == MT:
        return min(entries, key=lambda e: (e[1], e[0]))[0]
    if kind == FSDCH:
        new_flows = [e for e in entries if e[3] <= s]
        if new_flows:
            return min(new_flows, key=lambda e: (e[1], e[0]))[0]
        return max(entries, key=lambda e: (e[2], -e[0]))[0]
    return max(entries, key=lambda e: (e[2], -e[0]))[0]


def has_new_flow_entry(s: int, entries: Iterable[tuple[int, float, int, int]]) -> bool:
    return any(e[3] <= s for e in entries)
