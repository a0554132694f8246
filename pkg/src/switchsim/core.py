"""Simulation kernel: event queue with deterministic ordering, seeded RNG streams.

Events fire in (fire_at, seq) order, so simultaneous events dispatch in
insertion order.  All randomness is drawn from named streams derived from one
master seed; the same (seed, label) pair reproduces the same draw sequence on
any platform (plain Mersenne Twister, no numpy dependency).
"""

import hashlib
import heapq
import math
import random
from enum import IntEnum
from typing import Callable, NamedTuple, Optional

SimTime = float  # seconds, non-negative


class EventKind(IntEnum):
    BURST_GENERATION = 0
    PACKET_ARRIVAL_AT_QUEUE = 1
    TRANSMISSION_COMPLETE = 2
    SWITCH_COMPLETE = 3
    TIMER_EXPIRY = 4
    CBR_EMISSION = 5
    ACK_ARRIVAL = 6


class Event(NamedTuple):
    """One scheduled occurrence.  Tuple layout keeps heap comparisons cheap:
    fire_at is compared first and seq (unique) breaks ties, so payload fields
    never participate in ordering."""

    fire_at: SimTime
    seq: int
    kind: int
    subject: int        # connection id, or channel index for channel events
    payload: tuple      # kind-specific extras


class EventQueue:
    """Time-ordered event queue with a monotonic clock.

    schedule() rejects events in the past, cancel() removes a pending event by
    handle, run_until() dispatches everything due up to a horizon.  Two runs
    that schedule the same events in the same order dispatch identically.
    """

    __slots__ = ("now", "_heap", "_seq", "_pending")

    def __init__(self) -> None:
        self.now: SimTime = 0.0
        self._heap: list[Event] = []
        self._seq = 0
        self._pending: set[int] = set()

    def __len__(self) -> int:
        return len(self._pending)

    def schedule(self, fire_at: SimTime, kind: int, subject: int = -1,
                 payload: tuple = ()) -> int:
        """Queue an event; returns a handle usable with cancel()."""
        if fire_at < self.now:
            raise ValueError(
                f"cannot schedule event at t={fire_at} before clock t={self.now}")
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, Event(fire_at, seq, kind, subject, payload))
        self._pending.add(seq)
        return seq

    def cancel(self, handle: int) -> bool:
        """True if the event was still pending and is now removed; the entry
        stays in the heap and is skipped lazily when popped."""
        if handle in self._pending:
            self._pending.discard(handle)
            return True
        return False

    def run_until(self, t_end: SimTime, handler: Callable[[Event], None]) -> int:
        """Dispatch every pending event with fire_at <= t_end, in (fire_at, seq)
        order, then advance the clock to t_end.  Events scheduled during
        dispatch are honored if they are due.  Returns the dispatch count."""
        if t_end < self.now:
            raise ValueError(f"t_end={t_end} is before clock t={self.now}")
        heap = self._heap
        pending = self._pending
        discard = pending.discard
        pop = heapq.heappop
        count = 0
        while heap:
            ev = heap[0]
            if ev[0] > t_end:
                break
            pop(heap)
            seq = ev[1]
            if seq not in pending:
                continue
            discard(seq)
            self.now = ev[0]
            handler(ev)
            count += 1
        self.now = t_end
        return count


def _derive_seed(master_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{master_seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RandomStreams:
    """Independent named RNG streams fanned out from one 64-bit master seed.

    Each stochastic process (burst sizes, burst gaps, off decisions, off
    durations, ...) draws from its own stream, so perturbing one process in a
    sweep does not shift the draws of the others.
    """

    def __init__(self, master_seed: int) -> None:
        self.master_seed = master_seed
        self._streams: dict[str, random.Random] = {}

    def stream(self, label: str) -> random.Random:
        rng = self._streams.get(label)
        if rng is None:
            rng = random.Random(_derive_seed(self.master_seed, label))
            self._streams[label] = rng
        return rng


def sample_exponential(rng: random.Random, mean: float) -> float:
    """Positive exponential draw with the given mean."""
    if mean <= 0:
        raise ValueError(f"exponential mean must be positive, got {mean}")
    # 1 - random() is in (0, 1], so the log argument never hits zero.
    return -mean * math.log(1.0 - rng.random())


def pareto_scale_for_mean(shape: float, mean: float) -> float:
    """Scale x_m such that a Pareto(shape) variable has the given mean."""
    if shape <= 1.0:
        raise ValueError(f"pareto shape must exceed 1 for a finite mean, got {shape}")
    if mean <= 0:
        raise ValueError(f"pareto mean must be positive, got {mean}")
    return mean * (shape - 1.0) / shape


def sample_pareto_burst(rng: random.Random, shape: float, mean: float) -> int:
    """Burst size in whole packets: ceil of a Pareto draw whose mean is
    `mean` packets.  Always at least 1."""
    x_m = pareto_scale_for_mean(shape, mean)
    x = x_m / (1.0 - rng.random()) ** (1.0 / shape)
    n = math.ceil(x)
    return n if n >= 1 else 1
