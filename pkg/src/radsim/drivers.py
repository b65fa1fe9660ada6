"""Workload drivers: turn a parsed spec into simulation modules."""

from .errors import MalformedValue
from .modules import MmResponder, ProbeSource, RandomEndpoint
from .npu import NpuWorkload
from .workload import (
    LATENCY_PROBE, NPU_TRACE, RANDOM_UNIFORM, generate_latency_probe,
)


class ProbeWorkload:
    def __init__(self, spec):
        self.spec = spec
        self.source = None

    def build_modules(self, sim):
        schedule = generate_latency_probe(self.spec, sim.interface_table)
        self.source = ProbeSource(
            sim, self.spec.source[0], self.spec.source[1], schedule,
            self.spec.data_bytes, self.spec.trace,
            one_at_a_time=self.spec.one_at_a_time)
        modules = [self.source]
        by_module = {}
        for (module, port) in sim.interface_table:
            if module == self.spec.source[0]:
                continue
            by_module.setdefault(module, []).append(port)
        stalled = self.spec.responders == "stalled"
        for module, ports in by_module.items():
            modules.append(MmResponder(sim, module, ports, stalled=stalled))
        return modules

    def done(self):
        return self.source.done()

    def total_ops(self):
        return 0


class UniformWorkload:
    def __init__(self, spec):
        self.spec = spec
        self.rate = spec.rate
        self.data_bytes = spec.data_bytes
        self.duration_cycles = spec.duration_cycles
        self.cap = spec.total_packets if spec.total_packets > 0 else 1 << 62
        self.sent = 0
        self.received = 0
        self.endpoints = []
        self._peers = {}

    def build_modules(self, sim):
        self._table = dict(sim.interface_table)
        by_module = {}
        for (module, port) in self._table:
            by_module.setdefault(module, []).append(port)
        for module, ports in by_module.items():
            endpoint = RandomEndpoint(sim, module, ports, self)
            self.endpoints.append(endpoint)
        return list(self.endpoints)

    def peers(self, port_name):
        cached = self._peers.get(port_name)
        if cached is None:
            noc_id = self._table[port_name][0]
            cached = [mp for mp, loc in self._table.items()
                      if mp != port_name and loc[0] == noc_id]
            self._peers[port_name] = cached
        return cached

    def done(self):
        finished = all(e.cycles >= self.duration_cycles for e in self.endpoints) \
            or self.sent >= self.cap
        return finished and self.received == self.sent

    def total_ops(self):
        return 0


def build_workload(spec):
    if spec.kind == LATENCY_PROBE:
        return ProbeWorkload(spec)
    if spec.kind == RANDOM_UNIFORM:
        return UniformWorkload(spec)
    if spec.kind == NPU_TRACE:
        return NpuWorkload(spec)
    raise MalformedValue(f"no driver for workload kind {spec.kind!r}")
