"""Event-driven single-cell downlink simulation.

Wires the pieces together: ON/OFF sources feed window-controlled senders,
released packets cross a fixed-delay backhaul into per-connection NodeB
queues, the FACH/DCH radio serves them under the configured switching policy,
and ACKs return over the connection's channel to clock out more packets.

A run is a pure function of (config, seed): with the same inputs, two runs
produce identical event sequences, traces, and summaries.

Per-connection inactivity timers use a lazy scheme: packet arrivals just
stamp last_arrival, and a firing timer re-arms itself when the stamp proves
there was activity.  That keeps the heap free of per-arrival churn while
preserving exact "reset on arrival" semantics.  Handlers unpack events
positionally and dispatch through a flat list; long runs push tens of
millions of events, so the hot path stays allocation-light.
"""

from collections import deque

from . import policies, radio, transport
from .config import ScenarioConfig
from .core import EventKind, EventQueue, RandomStreams, sample_exponential
from .metrics import BurstRecord, MetricsCollector, RunSummary, summarize

FACH = radio.FACH
DCH = radio.DCH

# int aliases keep enum overhead out of the hot path
_K_BURST = int(EventKind.BURST_GENERATION)
_K_ARRIVAL = int(EventKind.PACKET_ARRIVAL_AT_QUEUE)
_K_TX_DONE = int(EventKind.TRANSMISSION_COMPLETE)
_K_SWITCH = int(EventKind.SWITCH_COMPLETE)
_K_TIMER = int(EventKind.TIMER_EXPIRY)
_K_CBR = int(EventKind.CBR_EMISSION)
_K_ACK = int(EventKind.ACK_ARRIVAL)

# timer payload discriminators
_T_DCH_IDLE = 0
_T_FACH_IDLE = 1


class Connection:
    """All per-connection state the engine tracks."""

    __slots__ = (
        "cid", "sender", "queue", "qlen", "assign", "dch_index", "switch",
        "f", "phase", "burst_seq", "burst_info", "link_free", "last_arrival",
        "last_transport", "dch_timer_on", "dch_timer_gen", "idle_on",
        "idle_gen", "request_at",
    )

    def __init__(self, cid: int, sender: transport.TcpSender) -> None:
        self.cid = cid
        self.sender = sender
        self.queue: deque[tuple[int, int]] = deque()  # (burst id, packet seq)
        self.qlen = 0
        self.assign = FACH
        self.dch_index = -1
        self.switch: radio.SwitchJob | None = None
        self.f = 0                      # packets served for the current flow
        self.phase = "ON"
        self.burst_seq = 0
        self.burst_info: dict[int, tuple[int, float]] = {}  # bid -> (size, gen time)
        self.link_free = 0.0            # backhaul serialization horizon
        self.last_arrival = -1.0
        self.last_transport = 0.0       # last sender release or ACK
        self.dch_timer_on = False
        self.dch_timer_gen = 0
        self.idle_on = False
        self.idle_gen = 0
        self.request_at: float | None = None


class Simulation:
    """One configured run.  Use run() then summary(), or drive it manually
    with inject_burst()/run() for validation scenarios."""

    def __init__(self, cfg: ScenarioConfig, trace=None, checks: bool = False) -> None:
        cfg.validate()
        self.cfg = cfg
        self.kernel = EventQueue()
        self.rngs = RandomStreams(cfg.seed)
        self.collector = MetricsCollector()
        self._trace = trace             # callable(str) or None
        self._checks = checks

        self.fach = radio.FachState(cfg.scheduler)
        self.pool = radio.DchPool(cfg.n_dch)
        self.conns = [Connection(i, transport.TcpSender(cfg.initial_cwnd, cfg.w_max))
                      for i in range(cfg.n_tcp)]
        self.n_requests = 0

        # precomputed per-packet times
        self._data_tx_fach = radio.tx_time(cfg.packet_bytes, cfg.fach_rate_bps)
        self._data_tx_dch = radio.tx_time(cfg.packet_bytes, cfg.dch_rate_bps)
        self._cbr_tx = radio.tx_time(cfg.cbr_packet_bytes, cfg.fach_rate_bps)
        self._ack_fach = transport.ack_delay(cfg.ack_bytes, cfg.fach_rate_bps,
                                             cfg.backhaul_delay_s)
        self._ack_dch = transport.ack_delay(cfg.ack_bytes, cfg.dch_rate_bps,
                                            cfg.backhaul_delay_s)
        self._backhaul_ser = radio.tx_time(cfg.packet_bytes, cfg.backhaul_rate_bps)

        pc = cfg.policy_config()
        self._kind = pc.kind
        self._t_h = pc.t_h
        self._t_l = pc.t_l
        self._s = pc.s
        self._t_out = pc.t_out
        self._track_idle = policies.resets_flow_on_idle(pc.kind)
        self._idle_restart = cfg.idle_restart_s

        # channel service tallies
        self.fach_busy_s = 0.0
        self.dch_busy_s = 0.0
        self.switch_count = 0
        self.flow_count = 0
        self.fach_data_served = [0] * cfg.n_tcp
        self.dch_data_served = [0] * cfg.n_tcp

        # packet conservation counters
        self.n_generated = 0
        self.n_released = 0
        self.n_arrived = 0
        self.n_queued = 0
        self.data_in_service = 0
        self.n_delivered = 0
        self.cbr_emitted = 0
        self.cbr_in_service = 0
        self.cbr_delivered = 0

        handlers = [None] * 7
        handlers[_K_BURST] = self._on_burst_generation
        handlers[_K_ARRIVAL] = self._on_packet_arrival
        handlers[_K_TX_DONE] = self._on_tx_complete
        handlers[_K_SWITCH] = self._on_switch_complete
        handlers[_K_TIMER] = self._on_timer
        handlers[_K_CBR] = self._on_cbr_emission
        handlers[_K_ACK] = self._on_ack
        self._handlers = handlers
        self._setup_done = False

    # ------------------------------------------------------------------ setup

    def setup(self) -> None:
        if self._setup_done:
            return
        self._setup_done = True
        if self.cfg.cbr_enabled:
            self.kernel.schedule(0.0, _K_CBR, -1)
        if self.cfg.traffic_enabled:
            gap_rng = self.rngs.stream("burst_gap")
            for conn in self.conns:
                first = sample_exponential(gap_rng, self.cfg.t_on_s)
                self.kernel.schedule(first, _K_BURST, conn.cid)

    def inject_burst(self, cid: int, n_packets: int, at: float) -> None:
        """Hand a fixed-size burst to one connection at a given time (test and
        validation hook; bypasses the random traffic model)."""
        if n_packets < 1:
            raise ValueError(f"n_packets must be >= 1, got {n_packets}")
        self.setup()
        self.kernel.schedule(at, _K_BURST, cid, (n_packets,))

    def run(self, until: float | None = None) -> int:
        self.setup()
        t_end = self.cfg.duration_s if until is None else until
        handler = self._dispatch_checked if self._checks else self._dispatch
        return self.kernel.run_until(t_end, handler)

    def summary(self, allow_empty: bool = False) -> RunSummary:
        cfg = self.cfg
        elapsed = self.kernel.now
        return summarize(
            self.collector.records,
            warmup_cutoff=cfg.duration_s * cfg.warmup_frac,
            policy=cfg.policy, scheduler=cfg.scheduler, n_tcp=cfg.n_tcp,
            n_dch=cfg.n_dch, s=cfg.s, t_h=cfg.t_h, t_l=cfg.t_l, t_out=cfg.t_out,
            seed=cfg.seed, duration_s=cfg.duration_s,
            util_fach=self.fach_busy_s / elapsed if elapsed > 0 else 0.0,
            util_dch=self.dch_busy_s / (cfg.n_dch * elapsed) if elapsed > 0 else 0.0,
            switches_per_flow=self.switch_count / max(1, self.flow_count),
            allow_empty=allow_empty,
        )

    # --------------------------------------------------------------- dispatch

    def _dispatch(self, ev) -> None:
        self._handlers[ev[2]](ev)

    def _dispatch_checked(self, ev) -> None:
        self._handlers[ev[2]](ev)
        self._verify_invariants()

    def _verify_invariants(self) -> None:
        pool = self.pool
        assert pool.used <= pool.n, "DCH pool over capacity"
        assert pool.used == sum(1 for o in pool.occupant if o is not None)
        assert self.n_arrived == self.n_queued + self.data_in_service + self.n_delivered, \
            "data packet conservation violated"
        assert self.n_generated >= self.n_released >= self.n_arrived
        assert self.cbr_emitted == (len(self.fach.cbr_queue) + self.cbr_in_service
                                    + self.cbr_delivered), "CBR conservation violated"
        n_req = 0
        for c in self.conns:
            if c.request_at is not None:
                n_req += 1
                assert c.assign == FACH and c.switch is None, \
                    f"request pending for non-FACH conn {c.cid}"
            limit = min(int(c.sender.cwnd), c.sender.w_max)
            assert c.sender.in_flight <= limit, f"window overrun on conn {c.cid}"
            assert c.qlen == len(c.queue)
        assert n_req == self.n_requests

    # --------------------------------------------------------------- handlers

    def _on_burst_generation(self, ev) -> None:
        now, _seq, _k, cid, payload = ev
        conn = self.conns[cid]
        cfg = self.cfg
        if payload:
            size = payload[0]
        else:
            size, gap, went_off = transport.next_burst(
                self.rngs, cfg.pareto_shape, cfg.mean_burst_packets(),
                cfg.p_off, cfg.t_on_s, cfg.t_off_s)
            conn.phase = "OFF" if went_off else "ON"
            self.kernel.schedule(now + gap, _K_BURST, cid)
        sender = conn.sender
        if (self._idle_restart > 0.0 and sender.in_flight == 0
                and not sender.send_q
                and now - conn.last_transport > self._idle_restart):
            sender.restart_window()
        bid = conn.burst_seq
        conn.burst_seq = bid + 1
        conn.burst_info[bid] = (size, now)
        self.n_generated += size
        conn.sender.enqueue_burst(bid, size)
        if self._trace is not None:
            self._trace(f"{now:.9f} burst {cid} id={bid} size={size}")
        self._release(conn, now)

    def _release(self, conn: Connection, now: float) -> None:
        pop_release = conn.sender.pop_release
        schedule = self.kernel.schedule
        ser = self._backhaul_ser
        delay = self.cfg.backhaul_delay_s
        cid = conn.cid
        dep = conn.link_free
        released = 0
        while True:
            nxt = pop_release()
            if nxt is None:
                break
            if dep < now:
                dep = now
            dep += ser
            released += 1
            schedule(dep + delay, _K_ARRIVAL, cid, nxt)
        if released:
            conn.link_free = dep
            conn.last_transport = now
            self.n_released += released

    def _on_packet_arrival(self, ev) -> None:
        now, _seq, _k, cid, payload = ev
        conn = self.conns[cid]
        conn.queue.append(payload)
        conn.qlen += 1
        self.n_arrived += 1
        self.n_queued += 1
        if self._trace is not None:
            self._trace(f"{now:.9f} arrive {cid} id={payload[0]} seq={payload[1]} "
                        f"q={conn.qlen}")
        if conn.switch is not None:
            return                      # decisions wait until the switch settles
        if conn.assign == DCH:
            conn.last_arrival = now     # re-arms any pending inactivity timer
            self._dch_try_start(conn, now)
            return
        # settled on FACH
        if conn.idle_on:
            conn.idle_on = False
            conn.idle_gen += 1
        if policies.wants_dch(self._kind, conn.qlen, conn.f, self._t_h, self._s):
            if not self.pool.is_full():
                self._begin_switch(conn, DCH, now, reset_f=False)
                return
            if conn.request_at is None:
                self._add_request(conn, now)
        self._fach_try_start(now)

    def _fach_try_start(self, now: float) -> None:
        fach = self.fach
        if fach.busy:
            return
        if fach.cbr_queue:
            enq = fach.cbr_queue.popleft()
            wait = now - enq
            if wait > self.collector.max_cbr_wait_s:
                self.collector.max_cbr_wait_s = wait
            fach.busy = True
            self.cbr_in_service = 1
            self.kernel.schedule(now + self._cbr_tx, _K_TX_DONE, -1, (-1, 0, 0))
            if self._trace is not None:
                self._trace(f"{now:.9f} txstart fach cbr")
            return
        conn = radio.pick_fach_data_conn(fach, self.conns)
        if conn is None:
            return
        if self._trace is not None:
            seq = conn.queue[0][1]
            if fach.discipline == "las":
                cand = ",".join(f"{c.cid}:{c.f}" for c in self.conns
                                if c.assign == FACH and c.switch is None and c.qlen > 0)
                self._trace(f"{now:.9f} txstart fach conn={conn.cid} seq={seq} "
                            f"f={conn.f} cand={cand}")
            else:
                self._trace(f"{now:.9f} txstart fach conn={conn.cid} seq={seq}")
        bid_seq = conn.queue.popleft()
        conn.qlen -= 1
        self.n_queued -= 1
        self.data_in_service += 1
        fach.busy = True
        if fach.discipline == "ps":
            fach.cursor = conn.cid
        self.kernel.schedule(now + self._data_tx_fach, _K_TX_DONE, -1,
                             (conn.cid, bid_seq[0], bid_seq[1]))

    def _dch_try_start(self, conn: Connection, now: float) -> None:
        idx = conn.dch_index
        if self.pool.busy[idx] or conn.qlen == 0 or conn.switch is not None:
            return
        bid_seq = conn.queue.popleft()
        conn.qlen -= 1
        self.n_queued -= 1
        self.data_in_service += 1
        self.pool.busy[idx] = True
        if self._trace is not None:
            self._trace(f"{now:.9f} txstart dch{idx} conn={conn.cid} seq={bid_seq[1]}")
        self.kernel.schedule(now + self._data_tx_dch, _K_TX_DONE, idx,
                             (conn.cid, bid_seq[0], bid_seq[1]))

    def _on_tx_complete(self, ev) -> None:
        now, _seq, _k, ch, payload = ev   # ch: -1 = FACH, else DCH index
        cid, bid, seq = payload
        if cid < 0:                     # CBR packet
            self.fach.busy = False
            self.cbr_in_service = 0
            self.cbr_delivered += 1
            self.fach_busy_s += self._cbr_tx
            if self._trace is not None:
                self._trace(f"{now:.9f} txdone fach cbr")
            self._fach_try_start(now)
            return
        conn = self.conns[cid]
        self.data_in_service -= 1
        self.n_delivered += 1
        if conn.f == 0:
            self.flow_count += 1
        conn.f += 1
        if ch < 0:
            self.fach.busy = False
            self.fach_busy_s += self._data_tx_fach
            self.fach_data_served[cid] += 1
        else:
            self.pool.busy[ch] = False
            self.dch_busy_s += self._data_tx_dch
            self.dch_data_served[cid] += 1
        if self._trace is not None:
            chname = "fach" if ch < 0 else f"dch{ch}"
            self._trace(f"{now:.9f} txdone {chname} conn={cid} seq={seq} f={conn.f}")
        # ACK returns over the original channel while a switch is in progress
        switch = conn.switch
        ack_over = switch.frm if switch is not None else conn.assign
        ack_dt = self._ack_fach if ack_over == FACH else self._ack_dch
        self.kernel.schedule(now + self.cfg.radio_prop_s + ack_dt, _K_ACK, cid,
                             (bid, seq))
        if ch >= 0 and switch is None:
            action = policies.after_dch_service(
                self._kind, conn.qlen, conn.f, self._t_l, self._s,
                self.pool.is_full(), self.n_requests > 0)
            if action is policies.PREEMPT:
                # old flow makes way immediately; its flow counter survives
                self._begin_switch(conn, FACH, now, reset_f=False)
            elif action is policies.START_TIMER:
                self._start_dch_timer(conn, now)
        if ch < 0:
            self._fach_try_start(now)
            if conn.qlen == 0 and conn.assign == FACH and conn.switch is None:
                self._start_idle_timer(conn, now)
        else:
            self._dch_try_start(conn, now)

    def _on_ack(self, ev) -> None:
        now, _seq, _k, cid, payload = ev
        conn = self.conns[cid]
        conn.last_transport = now
        done = conn.sender.on_ack(payload[0], payload[1])
        if self._trace is not None:
            self._trace(f"{now:.9f} ack {cid} id={payload[0]} seq={payload[1]}")
        if done is not None:
            size, gen_t = conn.burst_info.pop(done)
            self.collector.record(BurstRecord(cid, done, size, gen_t, now))
            if self._trace is not None:
                self._trace(f"{now:.9f} complete {cid} id={done} size={size} "
                            f"resp={now - gen_t:.9f}")
        self._release(conn, now)

    def _on_switch_complete(self, ev) -> None:
        now, _seq, _k, cid, _payload = ev
        conn = self.conns[cid]
        job = conn.switch
        conn.switch = None
        if self._trace is not None:
            self._trace(f"{now:.9f} swdone {cid} dir={radio.CHANNEL_NAMES[job.frm]}"
                        f"->{radio.CHANNEL_NAMES[job.to]} ch={job.dch_index}")
        if job.to == DCH:
            conn.assign = DCH
            conn.dch_index = job.dch_index
            if conn.qlen > 0:
                self._dch_try_start(conn, now)
            if conn.qlen < self._t_l:
                self._start_dch_timer(conn, now)
            return
        # arrived back on FACH
        conn.assign = FACH
        conn.dch_index = -1
        self.pool.release(job.dch_index)
        if job.reset_f and conn.f:
            if self._trace is not None:
                self._trace(f"{now:.9f} flowreset {cid} f_was={conn.f}")
            conn.f = 0
        self._grant_free_dch(now)       # waiters take the channel first
        if conn.qlen > 0:
            # decisions deferred while switching are taken now
            if policies.wants_dch(self._kind, conn.qlen, conn.f, self._t_h, self._s):
                if not self.pool.is_full():
                    self._begin_switch(conn, DCH, now, reset_f=False)
                    return
                if conn.request_at is None:
                    self._add_request(conn, now)
            self._fach_try_start(now)
        else:
            self._start_idle_timer(conn, now)

    def _on_timer(self, ev) -> None:
        now, _seq, _k, cid, payload = ev
        conn = self.conns[cid]
        which, gen = payload
        if which == _T_DCH_IDLE:
            if not conn.dch_timer_on or gen != conn.dch_timer_gen:
                return
            if conn.assign != DCH or conn.switch is not None:
                conn.dch_timer_on = False
                return
            resume = conn.last_arrival + self._t_out
            if resume > now:            # there were arrivals; push the deadline
                self.kernel.schedule(resume, _K_TIMER, cid, (_T_DCH_IDLE, gen))
                return
            if self.pool.busy[conn.dch_index]:   # still draining; check again later
                self.kernel.schedule(now + self._t_out, _K_TIMER, cid,
                                     (_T_DCH_IDLE, gen))
                return
            action = policies.on_timer_expired(conn.qlen, self._t_l,
                                               self.pool.is_full(), self.n_requests > 0)
            if self._trace is not None:
                self._trace(f"{now:.9f} timerfire {cid} q={conn.qlen} act={action}")
            if action is policies.VACATE:
                conn.dch_timer_on = False
                conn.dch_timer_gen += 1
                reset = policies.reset_flow_on_vacate(self._kind, conn.f, self._s)
                self._begin_switch(conn, FACH, now, reset_f=reset)
            else:
                self.kernel.schedule(now + self._t_out, _K_TIMER, cid,
                                     (_T_DCH_IDLE, gen))
            return
        # FACH idle: a quiet t_out on the shared channel ends the current flow
        if not conn.idle_on or gen != conn.idle_gen:
            return
        conn.idle_on = False
        if conn.assign != FACH or conn.switch is not None or conn.qlen:
            return
        if conn.f:
            if self._trace is not None:
                self._trace(f"{now:.9f} flowreset {cid} f_was={conn.f}")
            conn.f = 0

    def _on_cbr_emission(self, ev) -> None:
        now = ev[0]
        self.fach.cbr_queue.append(now)
        self.cbr_emitted += 1
        self.kernel.schedule(now + self.cfg.cbr_interval_s, _K_CBR, -1)
        if self._trace is not None:
            self._trace(f"{now:.9f} cbr enq backlog={len(self.fach.cbr_queue)}")
        self._fach_try_start(now)

    # ----------------------------------------------------------- policy moves

    def _add_request(self, conn: Connection, now: float) -> None:
        conn.request_at = now
        self.n_requests += 1
        if self._trace is not None:
            self._trace(f"{now:.9f} request {conn.cid} q={conn.qlen} f={conn.f}")
        if self._kind == policies.FSDCH:
            self._preempt_idle_old_flow(now)

    def _preempt_idle_old_flow(self, now: float) -> None:
        """A waiting request preempts an idle old-flow DCH occupant on the
        spot (the preemption condition is a state predicate, so it fires when
        a request appears, not only at a service completion).  In-flight
        transmissions still finish: that case is picked up by the
        service-completion hook one packet later."""
        for c in self.conns:
            if (c.assign == DCH and c.switch is None and c.f > self._s
                    and c.qlen < self._t_l and not self.pool.busy[c.dch_index]):
                self._begin_switch(c, FACH, now, reset_f=False)
                return

    def _remove_request(self, conn: Connection) -> None:
        if conn.request_at is not None:
            conn.request_at = None
            self.n_requests -= 1

    def _grant_free_dch(self, now: float) -> None:
        while self.n_requests and not self.pool.is_full():
            entries = [(c.cid, c.request_at, c.qlen, c.f)
                       for c in self.conns if c.request_at is not None]
            winner = self.conns[policies.select_waiter(self._kind, self._s, entries)]
            if self._trace is not None or self._checks:
                had_new = policies.has_new_flow_entry(self._s, entries)
                is_new = winner.f <= self._s
                if self._checks and self._kind == policies.FSDCH:
                    assert is_new or not had_new, \
                        "FSDCH granted an old flow while a new flow was waiting"
                if self._trace is not None:
                    self._trace(f"{now:.9f} grant {winner.cid} q={winner.qlen} "
                                f"f={winner.f} wait={now - winner.request_at:.9f} "
                                f"new={int(is_new)} had_new={int(had_new)}")
            self._remove_request(winner)
            self._begin_switch(winner, DCH, now, reset_f=False)

    def _begin_switch(self, conn: Connection, to: int, now: float, reset_f: bool) -> None:
        if conn.switch is not None:
            raise RuntimeError(f"conn {conn.cid} is already switching")
        if to == DCH:
            idx = self.pool.free_index()
            if idx is None:
                raise RuntimeError("switch toward DCH with no free channel")
            self.pool.reserve(idx, conn.cid)
            self._remove_request(conn)
            if conn.idle_on:
                conn.idle_on = False
                conn.idle_gen += 1
            frm = FACH
        else:
            frm = DCH
            idx = conn.dch_index
            if conn.dch_timer_on:
                conn.dch_timer_on = False
                conn.dch_timer_gen += 1
        job = radio.SwitchJob(conn.cid, frm, to, now, now + self.cfg.switch_time_s,
                              idx, reset_f)
        conn.switch = job
        self.switch_count += 1
        if self._trace is not None:
            self._trace(f"{now:.9f} swbegin {conn.cid} dir={radio.CHANNEL_NAMES[frm]}"
                        f"->{radio.CHANNEL_NAMES[to]} ch={idx}")
        self.kernel.schedule(job.completes_at, _K_SWITCH, conn.cid)

    def _start_dch_timer(self, conn: Connection, now: float) -> None:
        if conn.dch_timer_on:
            return
        conn.dch_timer_on = True
        conn.dch_timer_gen += 1
        self.kernel.schedule(now + self._t_out, _K_TIMER, conn.cid,
                             (_T_DCH_IDLE, conn.dch_timer_gen))

    def _start_idle_timer(self, conn: Connection, now: float) -> None:
        if not self._track_idle or conn.idle_on or conn.f == 0:
            return
        conn.idle_on = True
        conn.idle_gen += 1
        self.kernel.schedule(now + self._t_out, _K_TIMER, conn.cid,
                             (_T_FACH_IDLE, conn.idle_gen))


def run_scenario(cfg: ScenarioConfig, trace=None, checks: bool = False,
                 allow_empty: bool = False) -> RunSummary:
    """Run one scenario to its configured horizon and summarize it."""
    sim = Simulation(cfg, trace=trace, checks=checks)
    sim.run()
    return sim.summary(allow_empty=allow_empty)
