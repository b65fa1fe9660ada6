"""Deterministic multi-clock-domain cycle scheduler.

Time is integer picoseconds; a domain with frequency f MHz ticks every
round(1e6 / f) ps starting at its phase (default 0).  When several
domains share an edge time, domains fire in id order (ids are assigned
by ascending frequency) and components within a domain fire in creation
order, so identical inputs and seed always replay the same event
sequence.

Components observe each other only through timestamped queues whose
items become visible strictly after the producing edge, so no component
can see a same-edge write regardless of fire order.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .adapter import Adapter, Interface
from .config import validate
from .errors import BuildError, DomainMismatch, UnplacedPort, UnroutableDestination
from .noc import NocInstance
from .telemetry import TelemetryRegistry

DEFAULT_QUIESCENCE_CYCLES = 10_000

COMPLETED = "completed"
DEADLINE_EXCEEDED = "deadline_exceeded"
DEADLOCK_SUSPECTED = "deadlock_suspected"


@dataclass(frozen=True)
class ClockDomain:
    id: int
    freq_mhz: int
    period_ps: int
    phase_ps: int = 0


def domain_period(freq_mhz):
    if freq_mhz <= 0:
        raise DomainMismatch(f"frequency must be positive MHz, got {freq_mhz}")
    return round(1_000_000 / freq_mhz)


@dataclass(frozen=True)
class StopCondition:
    kind: str                 # all_received | max_time | max_cycles
    value: int = 0
    domain_freq: int = 0

    @staticmethod
    def all_received():
        return StopCondition(kind="all_received")

    @staticmethod
    def max_time(ps):
        return StopCondition(kind="max_time", value=ps)

    @staticmethod
    def max_cycles(freq_mhz, count):
        return StopCondition(kind="max_cycles", value=count, domain_freq=freq_mhz)

    @staticmethod
    def parse(text):
        if text in ("all", "all_received"):
            return StopCondition.all_received()
        kind, _, rest = text.partition(":")
        if kind == "time":
            return StopCondition.max_time(int(rest))
        if kind == "cycles":
            freq, _, count = rest.partition(":")
            return StopCondition.max_cycles(int(freq), int(count))
        raise ValueError(f"bad stop condition {text!r}; expected "
                         "'all', 'time:<ps>', or 'cycles:<mhz>:<n>'")


class Module:
    """Base class for clocked application modules.

    Subclasses implement tick(now) and return True while they have work;
    a sleeping module is re-armed by wake() whenever one of its queues
    is touched.
    """

    def __init__(self, sim, name):
        self.sim = sim
        self.name = name
        self.ports = {}
        self.comp_id = -1
        self.domain = None
        self.active = True
        self._wake_time = -1

    def wake(self):
        self.active = True
        self._wake_time = self.sim.global_time

    def attach_port(self, port_name):
        port = self.sim.bind_port(self, port_name)
        self.ports[port_name] = port
        return port

    def tick(self, now):
        raise NotImplementedError


class ModulePort:
    """Send/receive endpoint of one module port bound to an adapter slot."""

    def __init__(self, sim, module, port_name, iface, loc):
        self.sim = sim
        self.module = module
        self.name = (module.name, port_name)
        self.iface = iface
        self.loc = loc  # (noc_id, router, iface index)

    def pending_rx(self):
        return len(self.iface.rx) > 0

    def peek_recv(self, now):
        return self.iface.rx.peek(now)

    def can_send(self):
        return not self.iface.tx.full()

    def try_send(self, tx, now):
        """Issue a transaction; False when the interface queue is full."""
        if self.iface.tx.full():
            return False
        dest_loc = self.sim.interface_table.get(tx.dest)
        if dest_loc is None:
            raise UnroutableDestination(
                f"{self.name[0]}.{self.name[1]} sends to unplaced port "
                f"{tx.dest[0]}.{tx.dest[1]}")
        if dest_loc[0] != self.loc[0]:
            raise UnroutableDestination(
                f"{self.name[0]}.{self.name[1]} on noc {self.loc[0]} sends to "
                f"noc {dest_loc[0]}; NoCs are independent")
        tx.id = self.sim.next_tx_id()
        tx.src = self.name
        self.sim.telemetry.on_send(
            tx, f"{tx.src[0]}.{tx.src[1]}", f"{tx.dest[0]}.{tx.dest[1]}",
            self.loc[1], dest_loc[1], self.sim.nocs[self.loc[0]].state.topo, now)
        self.iface.tx.push(tx, now)
        self.sim.activity += 1
        return True

    def try_recv(self, now):
        tx = self.iface.rx.pop(now)
        if tx is None:
            return None
        self.sim.telemetry.on_receive(tx.id, now)
        self.sim.digests[tx.id] = hashlib.sha256(tx.data).hexdigest()
        self.sim.activity += 1
        return tx


@dataclass
class SimResult:
    total_time: int
    cycles_per_domain: dict
    termination: str
    telemetry: TelemetryRegistry
    noc_states: list
    digests: dict
    sent: int
    received: int


class Simulation:
    """One fully-elaborated simulatable system; single-threaded stepping."""

    def __init__(self, arch, placement, workload, seed=0,
                 quiescence_cycles=DEFAULT_QUIESCENCE_CYCLES):
        diags = validate(arch, placement)
        if diags:
            raise BuildError("architecture/placement validation failed:\n  "
                             + "\n  ".join(diags))
        self.arch = arch
        self.placement = placement
        self.workload = workload
        self.rng_seed = seed
        self.rng = np.random.default_rng(seed)
        self.telemetry = TelemetryRegistry(arch.telemetry)
        self.global_time = 0
        self.activity = 0
        self._last_activity_time = 0
        self._tx_counter = 0
        self.digests = {}
        self.quiescence_cycles = quiescence_cycles

        self.interface_table = placement.interface_table()
        self._iface_names = {loc: mp for mp, loc in self.interface_table.items()}

        self.nocs = [NocInstance(self, i, cfg, arch.adapter)
                     for i, cfg in enumerate(arch.nocs)]
        self.adapters = {}
        for noc in self.nocs:
            for r in range(noc.state.R):
                adapter = Adapter(self, noc, r)
                self.adapters[(noc.noc_id, r)] = adapter
                noc.adapters.append(adapter)
        for (module, port), loc in self.interface_table.items():
            noc_id, router, idx = loc
            iface = Interface((module, port))
            adapter = self.adapters[(noc_id, router)]
            assert len(adapter.interfaces) == idx
            adapter.add_interface(iface)

        self.modules = workload.build_modules(self)

        freqs = set()
        for module in self.modules:
            cfg = self.arch.modules.get(module.name)
            if cfg is None or cfg.freq_mhz <= 0:
                raise DomainMismatch(
                    f"module {module.name} has no declared clock frequency")
            freqs.add(cfg.freq_mhz)
        freqs.add(arch.adapter.freq_mhz)
        for noc_cfg in arch.nocs:
            freqs.add(noc_cfg.freq_mhz)
        self.domains = [ClockDomain(i, f, domain_period(f))
                        for i, f in enumerate(sorted(freqs))]
        self._domain_by_freq = {d.freq_mhz: d for d in self.domains}

        self.components = []
        self._by_domain = [[] for _ in self.domains]
        for module in self.modules:
            freq = self.arch.modules[module.name].freq_mhz
            self._register(module, self._domain_by_freq[freq])
        for key in sorted(self.adapters):
            self._register(self.adapters[key],
                           self._domain_by_freq[arch.adapter.freq_mhz])
        for noc in self.nocs:
            self._register(noc, self._domain_by_freq[noc.cfg.freq_mhz])

        self.next_edges = [d.phase_ps for d in self.domains]
        self.fired_counts = [0] * len(self.domains)

    def _register(self, comp, domain):
        comp.comp_id = len(self.components)
        comp.domain = domain
        self.components.append(comp)
        self._by_domain[domain.id].append(comp)

    # --- lookups ---------------------------------------------------------

    def interface_name(self, noc_id, router, iface):
        return self._iface_names[(noc_id, router, iface)]

    def bind_port(self, module, port_name):
        key = (module.name, port_name)
        loc = self.interface_table.get(key)
        if loc is None:
            raise UnplacedPort(f"{module.name}.{port_name} is not in the placement")
        iface = self.adapters[(loc[0], loc[1])].interfaces[loc[2]]
        iface.rx.consumer = module
        iface.tx.producer = module
        return ModulePort(self, module, port_name, iface, loc)

    def next_tx_id(self):
        tx_id = self._tx_counter
        self._tx_counter += 1
        return tx_id

    def workload_done(self):
        return self.workload.done()

    # --- stepping ---------------------------------------------------------

    def advance_tick(self):
        """Advance to the next edge; fire its components in canonical order."""
        t = min(self.next_edges)
        self.global_time = t
        fired = []
        for d in range(len(self.domains)):
            if self.next_edges[d] != t:
                continue
            for comp in self._by_domain[d]:
                fired.append(comp.comp_id)
                if comp.active:
                    comp.active = False
                    if comp.tick(t) or comp._wake_time >= t:
                        comp.active = True
            self.next_edges[d] = t + self.domains[d].period_ps
            self.fired_counts[d] += 1
        return fired

    def run_until(self, stop):
        noc_period = max(d.period_ps for d in self.domains
                         if d.freq_mhz in {n.freq_mhz for n in self.arch.nocs})
        quiescence_ps = self.quiescence_cycles * noc_period
        termination = None
        while termination is None:
            done = self.workload_done()
            if stop.kind == "all_received" and done:
                termination = COMPLETED
                break
            t_next = min(self.next_edges)
            if stop.kind == "max_time" and t_next > stop.value:
                termination = COMPLETED if done else DEADLINE_EXCEEDED
                break
            if stop.kind == "max_cycles":
                d = self._domain_by_freq.get(stop.domain_freq)
                if d is None:
                    raise BuildError(f"no clock domain at {stop.domain_freq} MHz")
                if self.fired_counts[d.id] >= stop.value:
                    termination = COMPLETED if done else DEADLINE_EXCEEDED
                    break
            before = self.activity
            self.advance_tick()
            if self.activity != before:
                self._last_activity_time = self.global_time
            elif self.global_time - self._last_activity_time > quiescence_ps:
                termination = COMPLETED if self.workload_done() else DEADLOCK_SUSPECTED
                break
        return SimResult(
            total_time=self.global_time,
            cycles_per_domain={d.freq_mhz: self.fired_counts[d.id]
                               for d in self.domains},
            termination=termination,
            telemetry=self.telemetry,
            noc_states=[n.state for n in self.nocs],
            digests=self.digests,
            sent=self.telemetry.sent,
            received=self.telemetry.received,
        )


def build_simulation(arch, placement, workload, seed=0,
                     quiescence_cycles=DEFAULT_QUIESCENCE_CYCLES):
    return Simulation(arch, placement, workload, seed=seed,
                      quiescence_cycles=quiescence_cycles)


def advance_tick(sim):
    return sim.advance_tick()


def run_until(sim, stop):
    return sim.run_until(stop)
