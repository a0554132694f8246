"""Base-station radio model: FACH scheduling, the DCH pool, switch jobs.

One FACH transmits a single packet at a time.  Queued CBR signaling always
goes first (non-preemptive: an in-flight data packet finishes).  Data service
among FACH-assigned backlogged connections is either PS (per-packet round
robin) or LAS (least served packets of the current flow, ties to the lowest
connection id).  DCHs are dedicated: the occupant serves its own queue FIFO
at full rate.  A switch in either direction takes switch_time_s during which
the moving connection transmits nothing; a DCH is reserved (counted used)
from the moment a switch toward it begins and released only when a switch
away from it completes.
"""

from collections import deque
from dataclasses import dataclass

# Channel assignment values kept as small ints for cheap comparisons.
FACH = 0
DCH = 1

CHANNEL_NAMES = {FACH: "fach", DCH: "dch"}


def tx_time(size_bytes: int, rate_bps: float) -> float:
    """Serialization time of one packet; rejects use of a busy channel upstream."""
    return size_bytes * 8.0 / rate_bps


@dataclass(slots=True)
class SwitchJob:
    cid: int
    frm: int            # FACH or DCH
    to: int
    started_at: float
    completes_at: float
    dch_index: int      # channel being entered or vacated
    reset_f: bool       # clear the flow counter when the FACH arrival settles


class DchPool:
    """Fixed pool of dedicated channels; at most one occupant each."""

    __slots__ = ("n", "occupant", "busy", "used")

    def __init__(self, n: int) -> None:
        self.n = n
        self.occupant: list[int | None] = [None] * n
        self.busy = [False] * n      # a packet is on the air
        self.used = 0                # occupied or reserved channels

    def free_index(self) -> int | None:
        for i, occ in enumerate(self.occupant):
            if occ is None:
                return i
        return None

    def reserve(self, index: int, cid: int) -> None:
        if self.occupant[index] is not None:
            raise RuntimeError(f"DCH {index} already held by conn {self.occupant[index]}")
        self.occupant[index] = cid
        self.used += 1
        if self.used > self.n:
            raise RuntimeError(f"DCH pool over capacity: {self.used} > {self.n}")

    def release(self, index: int) -> None:
        if self.occupant[index] is None:
            raise RuntimeError(f"DCH {index} released while free")
        if self.busy[index]:
            raise RuntimeError(f"DCH {index} released mid-transmission")
        self.occupant[index] = None
        self.used -= 1

    def is_full(self) -> bool:
        return self.used >= self.n


class FachState:
    """Shared-channel scheduler state."""

    __slots__ = ("discipline", "busy", "cursor", "cbr_queue")

    def __init__(self, discipline: str) -> None:
        self.discipline = discipline          # "ps" | "las"
        self.busy = False
        self.cursor = -1                      # conn id served last under PS
        self.cbr_queue: deque[float] = deque()  # enqueue timestamps


def pick_fach_data_conn(fach: FachState, conns: list):
    """Next FACH-assigned, settled, backlogged connection, or None.

    PS scans cyclically starting after the cursor; LAS takes the minimum
    (f, cid).  Connections mid-switch or holding a DCH are skipped.
    """
    if fach.discipline == "las":
        best = None
        for c in conns:
            if c.assign == FACH and c.switch is None and c.qlen > 0:
                if best is None or (c.f, c.cid) < (best.f, best.cid):
                    best = c
        return best
    n = len(conns)
    start = fach.cursor + 1
    for k in range(n):
        c = conns[(start + k) % n]
        if c.assign == FACH and c.switch is None and c.qlen > 0:
            return c
    return None
