"""Per-transaction timestamp ladders, NoC counters, and report export."""

import csv
import os
from dataclasses import dataclass

from .errors import (
    IncompleteRun,
    IncompleteTrace,
    IoFailure,
    LadderViolation,
    UnknownTrace,
)
from .topology import PORT_NAMES, min_hops

INITIATION, PACKETIZATION, INJECTION, EJECTION, DEPACKETIZATION, RECEIPT = range(6)
STAGE_NAMES = ("initiation", "packetization", "injection", "ejection",
               "depacketization", "receipt")
NUM_STAGES = 6


@dataclass
class TelemetryTrace:
    tx_id: int
    src: str
    dest: str
    stamps: list          # six picosecond entries, None until recorded
    hops: int

    def complete(self):
        return all(t is not None for t in self.stamps)


class TelemetryRegistry:
    """Stores timestamp ladders for transactions whose trace tag is enabled.

    Global first-initiation / last-receipt times are tracked for every
    transaction regardless of tracing so aggregate performance never
    depends on trace configuration.
    """

    def __init__(self, cfg):
        self.enabled = cfg.num_traces > 0
        self._ids = {name: i for i, name in enumerate(cfg.trace_names)}
        self.traces = {}
        self.first_initiation = None
        self.last_receipt = None
        self.sent = 0
        self.received = 0

    def trace_id(self, name):
        if not name:
            return -1
        return self._ids.get(name, -1)

    def on_send(self, tx, src_label, dest_label, src_router, dest_router, topo, now):
        self.sent += 1
        if self.first_initiation is None or now < self.first_initiation:
            self.first_initiation = now
        if not tx.trace:
            return
        if not self.enabled:
            return
        if tx.trace not in self._ids:
            raise UnknownTrace(f"transaction {tx.id} tagged with unregistered "
                               f"trace {tx.trace!r}")
        trace = TelemetryTrace(
            tx_id=tx.id, src=src_label, dest=dest_label,
            stamps=[None] * NUM_STAGES,
            hops=min_hops(src_router, dest_router, topo),
        )
        trace.stamps[INITIATION] = now
        self.traces[tx.id] = trace

    def on_receive(self, tx_id, now):
        self.received += 1
        if self.last_receipt is None or now > self.last_receipt:
            self.last_receipt = now
        self.record(tx_id, RECEIPT, now)

    def record(self, tx_id, stage, now):
        if not 0 <= stage < NUM_STAGES:
            raise AssertionError(f"unknown ladder stage {stage}")
        trace = self.traces.get(tx_id)
        if trace is None:
            return
        if trace.stamps[stage] is not None:
            raise AssertionError(
                f"stage {STAGE_NAMES[stage]} re-recorded for transaction {tx_id}")
        trace.stamps[stage] = now

    def sorted_traces(self):
        return [self.traces[k] for k in sorted(self.traces)]


@dataclass
class LatencyBreakdown:
    """Partition of end-to-end latency; the four parts sum exactly."""

    module_wait: int
    injection_adapter: int
    noc: int
    ejection_adapter: int

    @property
    def total(self):
        return (self.module_wait + self.injection_adapter + self.noc
                + self.ejection_adapter)


def latency_breakdown(trace):
    if not trace.complete():
        missing = [STAGE_NAMES[i] for i, t in enumerate(trace.stamps) if t is None]
        raise IncompleteTrace(
            f"transaction {trace.tx_id} is missing stages: {', '.join(missing)}")
    s = trace.stamps
    return LatencyBreakdown(
        module_wait=s[PACKETIZATION] - s[INITIATION],
        injection_adapter=s[INJECTION] - s[PACKETIZATION],
        noc=s[EJECTION] - s[INJECTION],
        ejection_adapter=s[RECEIPT] - s[EJECTION],
    )


def _check_ladder(trace):
    present = [(i, t) for i, t in enumerate(trace.stamps) if t is not None]
    for (i, a), (j, b) in zip(present, present[1:]):
        if b < a:
            raise LadderViolation(
                f"transaction {trace.tx_id}: {STAGE_NAMES[j]} at {b} ps precedes "
                f"{STAGE_NAMES[i]} at {a} ps")


TRACE_COLUMNS = ["id", "src", "dest", "initiation_ps", "packetization_ps",
                 "injection_ps", "ejection_ps", "depacketization_ps",
                 "receipt_ps", "hops"]
COUNTER_COLUMNS = ["noc_id", "router", "port", "flits_forwarded",
                   "credit_stall_cycles", "peak_vc_occupancy"]


def export_csv(registry, noc_states, out_dir):
    """Write traces.csv and noc_counters.csv; deterministic row order."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        traces_path = os.path.join(out_dir, "traces.csv")
        with open(traces_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for trace in registry.sorted_traces():
                _check_ladder(trace)
                row = [trace.tx_id, trace.src, trace.dest]
                row += ["" if t is None else t for t in trace.stamps]
                row.append(trace.hops)
                writer.writerow(row)

        counters_path = os.path.join(out_dir, "noc_counters.csv")
        with open(counters_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(COUNTER_COLUMNS)
            for state in noc_states:
                for r in range(state.R):
                    for p in range(5):
                        writer.writerow([
                            state.noc_id, r, PORT_NAMES[p],
                            int(state.fwd[r, p]), int(state.stall[r, p]),
                            int(state.peak[r, p].max()),
                        ])
    except OSError as exc:
        raise IoFailure(f"writing telemetry to {out_dir}: {exc}") from exc
    return traces_path, counters_path


def aggregate_performance(registry, total_ops):
    """Runtime and TOPS; runtime spans first initiation to last receipt."""
    if registry.first_initiation is None or registry.last_receipt is None:
        raise IncompleteRun("no transactions completed; nothing to aggregate")
    runtime_ps = registry.last_receipt - registry.first_initiation
    # 1 op/ps == 1 Tera-op/s
    tops = 0.0 if runtime_ps <= 0 else total_ops / runtime_ps
    return {"runtime_ps": runtime_ps, "total_ops": total_ops, "tops": tops}
