"""Generic traffic modules: latency probes, responders, random endpoints."""

from collections import deque

from .adapter import (
    MM_READ_REQ, MM_READ_RESP, MM_WRITE_REQ, MM_WRITE_RESP, STREAM, Transaction,
)
from .engine import Module
from .noc.state import payload_pattern

_RESPONSE_KIND = {MM_READ_REQ: MM_READ_RESP, MM_WRITE_REQ: MM_WRITE_RESP}


class ProbeSource(Module):
    """Sends MM write requests per a fixed schedule, one at a time.

    The next request is issued only after the destination's response
    arrives, so the NoC carries a single probe transaction at any time.
    """

    def __init__(self, sim, name, port_name, schedule, data_bytes, trace,
                 one_at_a_time=True):
        super().__init__(sim, name)
        self.port = self.attach_port(port_name)
        self.schedule = schedule
        self.data_bytes = data_bytes
        self.trace = trace
        self.one_at_a_time = one_at_a_time
        self.next_idx = 0
        self.outstanding = 0
        self.responses = 0

    def done(self):
        return self.next_idx >= len(self.schedule) and self.outstanding == 0

    def tick(self, now):
        while self.port.try_recv(now) is not None:
            self.outstanding -= 1
            self.responses += 1
        if self.next_idx < len(self.schedule):
            if not self.one_at_a_time or self.outstanding == 0:
                dest = self.schedule[self.next_idx]
                tx = Transaction(
                    kind=MM_WRITE_REQ, src=self.port.name, dest=dest,
                    data=payload_pattern(self.next_idx, 0, self.data_bytes),
                    address=self.next_idx, trace=self.trace)
                if self.port.try_send(tx, now):
                    self.next_idx += 1
                    self.outstanding += 1
        return not self.done()


class MmResponder(Module):
    """Echoes an MM response for every request received on any port."""

    def __init__(self, sim, name, port_names, stalled=False):
        super().__init__(sim, name)
        for p in port_names:
            self.attach_port(p)
        self.stalled = stalled
        self.pending = deque()
        self.requests = 0

    def tick(self, now):
        if self.stalled:
            return False  # never drains its receive queues
        busy = False
        for port in self.ports.values():
            tx = port.try_recv(now)
            if tx is None:
                continue
            busy = True
            self.requests += 1
            kind = _RESPONSE_KIND.get(tx.kind)
            if kind is not None:
                resp = Transaction(kind=kind, src=port.name, dest=tx.src,
                                   data=tx.data[:8], address=tx.address)
                self.pending.append((port, resp))
        while self.pending:
            port, resp = self.pending[0]
            if not port.try_send(resp, now):
                break
            self.pending.popleft()
            busy = True
        return busy or bool(self.pending) \
            or any(p.pending_rx() for p in self.ports.values())


class RandomEndpoint(Module):
    """Uniform-random source/sink used for NoC stress workloads.

    Each module cycle within the generation window it flips a
    rate-weighted coin and, on success, sends a fixed-length stream
    packet to a uniformly chosen other endpoint.  Draws come from the
    simulation RNG in component order, so runs are reproducible.
    """

    def __init__(self, sim, name, port_names, workload):
        super().__init__(sim, name)
        for p in port_names:
            self.attach_port(p)
        self.workload = workload
        self.cycles = 0

    def tick(self, now):
        w = self.workload
        for port in self.ports.values():
            while port.try_recv(now) is not None:
                w.received += 1
        generating = self.cycles < w.duration_cycles and w.sent < w.cap
        if generating:
            self.cycles += 1
            for port in self.ports.values():
                if w.sent >= w.cap:
                    break
                if self.sim.rng.random() >= w.rate:
                    continue
                peers = w.peers(port.name)
                dest = peers[int(self.sim.rng.integers(len(peers)))]
                tx = Transaction(kind=STREAM, src=port.name, dest=dest,
                                 data=payload_pattern(w.sent, 1, w.data_bytes),
                                 last=True)
                if port.try_send(tx, now):
                    w.sent += 1
        return generating or any(p.pending_rx() for p in self.ports.values())
