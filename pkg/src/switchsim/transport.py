"""Loss-free window-controlled sender and the ON/OFF burst source.

The transport is deliberately thin: packets release under an ACK-clocked
window that grows by one packet per ACK up to w_max (no losses exist in the
model, so no recovery machinery).  Bursts append to a FIFO send buffer and a
burst completes when the ACK for its last packet returns.  After a quiet
spell with nothing in flight the window restarts at its initial value, so a
flow beginning on a slow channel rebuilds its window ACK by ACK, which is
what makes queue build-up gradual there.
"""

import random
from collections import deque

from .core import sample_exponential, sample_pareto_burst


class TcpSender:
    """Per-connection sender state.

    The send buffer stores [burst_id, packets_left_to_release] pairs instead
    of individual packets; per-packet sequence numbers are minted at release
    time.  in_flight counts released-but-unacked packets and never exceeds
    min(floor(cwnd), w_max).
    """

    __slots__ = ("cwnd", "initial_cwnd", "w_max", "in_flight", "send_q",
                 "burst_pending", "unacked", "next_seq", "dup_acks")

    def __init__(self, initial_cwnd: float, w_max: int) -> None:
        self.cwnd = float(initial_cwnd)
        self.initial_cwnd = float(initial_cwnd)
        self.w_max = w_max
        self.in_flight = 0
        self.send_q: deque[list] = deque()
        self.burst_pending: dict[int, int] = {}   # burst id -> unacked packets
        self.unacked: set[int] = set()            # released packet seqs
        self.next_seq = 0
        self.dup_acks = 0

    def enqueue_burst(self, burst_id: int, size: int) -> None:
        self.send_q.append([burst_id, size])
        self.burst_pending[burst_id] = size

    def restart_window(self) -> None:
        """Collapse the window back to its initial value after an idle spell."""
        self.cwnd = self.initial_cwnd

    def buffered(self) -> int:
        return sum(entry[1] for entry in self.send_q)

    def pop_release(self):
        """Next (burst_id, packet_seq) the window allows, else None."""
        limit = int(self.cwnd)
        if limit > self.w_max:
            limit = self.w_max
        if self.in_flight >= limit or not self.send_q:
            return None
        head = self.send_q[0]
        seq = self.next_seq
        self.next_seq = seq + 1
        self.in_flight += 1
        self.unacked.add(seq)
        head[1] -= 1
        if head[1] == 0:
            self.send_q.popleft()
        return head[0], seq

    def on_ack(self, burst_id: int, seq: int):
        """Consume one ACK; returns burst_id if that burst just completed.

        Duplicate or unknown ACKs are counted and ignored (they cannot occur
        in a correct run; a non-zero counter flags a model bug).
        """
        if seq not in self.unacked:
            self.dup_acks += 1
            return None
        self.unacked.discard(seq)
        self.in_flight -= 1
        if self.cwnd < self.w_max:
            self.cwnd += 1.0
        left = self.burst_pending[burst_id] - 1
        if left:
            self.burst_pending[burst_id] = left
            return None
        del self.burst_pending[burst_id]
        return burst_id


def next_burst(rngs, shape: float, mean_packets: float, p_off: float,
               t_on: float, t_off: float):
    """Draw one burst and the gap to the next one.

    Returns (size_packets, gap_seconds, went_off).  After each burst the
    source goes OFF with probability p_off for an Exp(t_off) spell (the next
    burst fires when ON resumes); otherwise the next burst follows an
    Exp(t_on) gap.
    """
    size = sample_pareto_burst(rngs.stream("burst_size"), shape, mean_packets)
    went_off = rngs.stream("off_decision").random() < p_off
    if went_off:
        gap = sample_exponential(rngs.stream("off_duration"), t_off)
    else:
        gap = sample_exponential(rngs.stream("burst_gap"), t_on)
    return size, gap, went_off


def ack_delay(ack_bytes: int, channel_rate_bps: float, backhaul_delay_s: float) -> float:
    """Uplink latency of one ACK: serialization at the radio channel rate it
    traverses plus the fixed backhaul delay.  ACKs consume no radio or
    backhaul bandwidth (pure delay)."""
    return ack_bytes * 8.0 / channel_rate_bps + backhaul_delay_s
