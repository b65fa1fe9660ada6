"""NPU overlay modules: dispatcher, MVU slices, and the vector chain.

Each NPU instance is a set of placed modules per core: a matrix-vector
slice (mvu), an external vector register file (evrf), two elementwise
units (mfu0, mfu1), and a loader (ld), fed by a shared dispatcher.
Instructions travel as small control transactions ahead of their data
stream on the same virtual channel, so per-link ordering keeps every
block's view of the program in order.  Loader writebacks return vectors
to the mvu or evrf register files over the NoC, and the receiving block
acknowledges the dispatcher with a token transaction, which is what
dependent instructions wait for.

Wire encoding: the transaction `address` field distinguishes control
(1), writeback announcements (2), and tokens (3) from data chunks (0);
descriptors are 24-byte packed structs.
"""

import math
import struct
from collections import deque
from dataclasses import dataclass

from .adapter import STREAM, Transaction
from .engine import Module
from .errors import ProtocolViolation
from .noc.state import payload_pattern
from .workload import MFU_OPS, LD_DESTS, NpuInstruction, mvu_cycles, workload_ops

ADDR_DATA = 0
ADDR_CTRL = 1
ADDR_WB = 2
ADDR_TOKEN = 3

_DESC = struct.Struct("<4B4I4B")
FLAG_EVRF_SOURCE = 1
FLAG_DEP = 2


def pack_desc(npu, core, instr, mvu_m, vec_len):
    flags = (FLAG_EVRF_SOURCE if instr.evrf_source else 0) \
        | (FLAG_DEP if instr.dep else 0)
    return _DESC.pack(npu, core, instr.thread, 0, instr.seq, mvu_m,
                      instr.mvu_n, vec_len, flags,
                      MFU_OPS.index(instr.mfu0), MFU_OPS.index(instr.mfu1),
                      LD_DESTS.index(instr.ld_dest))


@dataclass(frozen=True)
class Desc:
    npu: int
    core: int
    thread: int
    seq: int
    mvu_m: int
    mvu_n: int
    vec_len: int
    evrf_source: bool
    dep: bool
    mfu0: str
    mfu1: str
    ld_dest: str


def unpack_desc(data):
    npu, core, thread, _pad, seq, m, n, vec, flags, f0, f1, ld = \
        _DESC.unpack(data[:_DESC.size])
    return Desc(npu=npu, core=core, thread=thread, seq=seq, mvu_m=m, mvu_n=n,
                vec_len=vec, evrf_source=bool(flags & FLAG_EVRF_SOURCE),
                dep=bool(flags & FLAG_DEP), mfu0=MFU_OPS[f0], mfu1=MFU_OPS[f1],
                ld_dest=LD_DESTS[ld])


def block_name(npu_id, block, core=None):
    if block == "dispatcher":
        return f"npu{npu_id}_dispatcher"
    return f"npu{npu_id}_{block}{core}"


def npu_module_names(cfg):
    """All module names of an `npu_trace` workload (placement checklist)."""
    names = []
    for i in range(cfg.count):
        names.append(block_name(i, "dispatcher"))
        for c in range(cfg.cores):
            for block in ("mvu", "evrf", "mfu0_", "mfu1_", "ld"):
                names.append(block_name(i, block, c))
    return names


def _n_chunks(vec_len, cfg):
    return max(1, math.ceil(vec_len * cfg.element_bytes / cfg.tx_data_bytes))


class _NpuModule(Module):
    """Shared rx plumbing: classify by address marker, drain one per cycle."""

    def __init__(self, sim, name, workload):
        super().__init__(sim, name)
        self.w = workload
        self.cfg = workload.cfg
        self.port = self.attach_port("p0")
        self.ctrl_q = deque()
        self.wb_open = {}
        self.out = deque()
        self.chunks_in = 0      # stream data consumed from the upstream block
        self.chunks_out = 0     # stream data produced for the downstream block
        self.wb_chunks_in = 0   # register-file writeback data received

    def _drain_out(self, now):
        if self.out and self.port.try_send(self.out[0], now):
            self.out.popleft()
            if not self.out:
                self._out_drained()
            return True
        return False

    def _out_drained(self):
        pass

    def _accepts_stream_data(self):
        return False

    def _consume_stream_chunk(self, tx, now):
        raise ProtocolViolation(f"{self.name} received unexpected data chunk")

    def _rx(self, now):
        tx = self.port.peek_recv(now)
        if tx is None:
            return False
        addr = tx.address
        if addr == ADDR_CTRL:
            self.ctrl_q.append(unpack_desc(self.port.try_recv(now).data))
            return True
        if addr == ADDR_WB:
            desc = unpack_desc(self.port.try_recv(now).data)
            self.wb_open[tx.src] = [desc, _n_chunks(desc.vec_len, self.cfg)]
            return True
        if addr == ADDR_TOKEN:
            self._on_token(unpack_desc(self.port.try_recv(now).data), now)
            return True
        if tx.src in self.wb_open:
            self.port.try_recv(now)
            entry = self.wb_open[tx.src]
            entry[1] -= 1
            self.wb_chunks_in += 1
            if entry[1] == 0:
                del self.wb_open[tx.src]
                self._wb_complete(entry[0], now)
            return True
        if self._accepts_stream_data():
            self._consume_stream_chunk(self.port.try_recv(now), now)
            return True
        return False

    def _on_token(self, desc, now):
        raise ProtocolViolation(f"{self.name} received a stray token")

    def _wb_complete(self, desc, now):
        # register-file write finished: acknowledge the dispatcher
        token = Transaction(
            kind=STREAM, src=self.port.name,
            dest=(block_name(desc.npu, "dispatcher"), "p0"),
            data=pack_desc(desc.npu, desc.core, self._desc_to_instr(desc),
                           desc.mvu_m, desc.vec_len),
            address=ADDR_TOKEN)
        self.out.append(token)

    @staticmethod
    def _desc_to_instr(desc):
        return NpuInstruction(
            thread=desc.thread, seq=desc.seq, mvu_m=desc.mvu_m,
            mvu_n=desc.mvu_n, evrf_source=desc.evrf_source, mfu0=desc.mfu0,
            mfu1=desc.mfu1, ld_dest=desc.ld_dest, dep=desc.dep,
            vec_len=desc.vec_len)

    def _chunk_tx(self, desc, dest, idx, total, addr=ADDR_DATA):
        size = min(self.cfg.tx_data_bytes,
                   desc.vec_len * self.cfg.element_bytes - idx * self.cfg.tx_data_bytes)
        size = max(1, size)
        tag = (desc.npu << 20) | (desc.core << 16) | (desc.thread << 12) | desc.seq
        return Transaction(kind=STREAM, src=self.port.name, dest=dest,
                           data=payload_pattern(tag, idx, size),
                           last=idx == total - 1, address=addr)


class Dispatcher(_NpuModule):
    """Issues per-core control descriptors and retires instruction tokens."""

    def __init__(self, sim, name, npu_id, workload):
        super().__init__(sim, name, workload)
        self.npu_id = npu_id
        self.threads = workload.spec.threads
        self.ptr = [0] * len(self.threads)
        self.in_flight = [0] * len(self.threads)
        self.tokens = {}
        self.rr = len(self.threads) - 1
        self.retired = 0
        self.total = sum(len(t) for t in self.threads)
        self.completion_time = {}

    def done(self):
        return self.retired == self.total and not self.out

    def _on_token(self, desc, now):
        key = (desc.thread, desc.seq)
        count = self.tokens.get(key, 0) + 1
        if count < self.cfg.cores:
            self.tokens[key] = count
            return
        self.tokens.pop(key, None)
        self.in_flight[desc.thread] -= 1
        self.retired += 1
        self.completion_time[desc.thread] = now
        self.sim.activity += 1

    def tick(self, now):
        busy = self._rx(now)
        busy = self._drain_out(now) or busy
        if not self.out:
            busy = self._try_issue() or busy
        return busy or not self.done()

    def _try_issue(self):
        n = len(self.threads)
        for k in range(1, n + 1):
            t = (self.rr + k) % n
            if self.ptr[t] >= len(self.threads[t]):
                continue
            instr = self.threads[t][self.ptr[t]]
            if self.in_flight[t] >= self.cfg.issue_window:
                continue
            if instr.dep and self.in_flight[t] > 0:
                continue
            self.ptr[t] += 1
            self.in_flight[t] += 1
            self.rr = t
            cores = self.cfg.cores
            m_core = max(1, math.ceil(instr.mvu_m / cores)) if instr.mvu_m else 0
            vec_core = max(1, math.ceil(instr.vec_len / cores))
            for c in range(cores):
                first = "evrf" if instr.evrf_source else "mvu"
                self.out.append(Transaction(
                    kind=STREAM, src=self.port.name,
                    dest=(block_name(self.npu_id, first, c), "p0"),
                    data=pack_desc(self.npu_id, c, instr, m_core, vec_core),
                    address=ADDR_CTRL))
            self.sim.activity += 1
            return True
        return False


class MvuCore(_NpuModule):
    """One matrix-vector slice: computes, then streams its rows to the evrf."""

    def __init__(self, sim, name, npu_id, core, workload):
        super().__init__(sim, name, workload)
        self.npu_id = npu_id
        self.core = core
        self.busy = 0
        self.computed = None   # descriptor whose output awaits the streamer
        self.cur = None        # descriptor being computed
        self.stream = None     # (desc, next chunk idx, total chunks)

    def tick(self, now):
        busy = self._rx(now)

        if self.busy > 0:
            self.busy -= 1
            self.sim.activity += 1
            busy = True
            if self.busy == 0:
                self.computed = self.cur
                self.cur = None
        if self.busy == 0 and self.cur is None and self.computed is None \
                and self.ctrl_q:
            desc = self.ctrl_q.popleft()
            self.cur = desc
            instr = self._desc_to_instr(desc)
            self.busy = mvu_cycles(instr, self.cfg)
            self.sim.activity += 1
            busy = True

        if self.computed is not None and self.stream is None and not self.out:
            desc = self.computed
            self.computed = None
            self.stream = [desc, 0, _n_chunks(desc.vec_len, self.cfg)]
            self.out.append(Transaction(
                kind=STREAM, src=self.port.name,
                dest=(block_name(self.npu_id, "evrf", self.core), "p0"),
                data=pack_desc(desc.npu, desc.core, self._desc_to_instr(desc),
                               desc.mvu_m, desc.vec_len),
                address=ADDR_CTRL))

        if self.stream is not None and not self.out:
            desc, idx, total = self.stream
            dest = (block_name(self.npu_id, "evrf", self.core), "p0")
            self.out.append(self._chunk_tx(desc, dest, idx, total))
            self.chunks_out += 1
            if idx + 1 == total:
                self.stream = None
            else:
                self.stream[1] = idx + 1

        busy = self._drain_out(now) or busy
        return busy or bool(self.ctrl_q) or self.busy > 0 or bool(self.out) \
            or self.stream is not None or self.computed is not None


_DOWNSTREAM = {"evrf": "mfu0_", "mfu0_": "mfu1_", "mfu1_": "ld"}
_LATENCY_KEY = {"evrf": "evrf_latency", "mfu0_": "mfu_latency",
                "mfu1_": "mfu_latency", "ld": "ld_latency"}


class VectorBlock(_NpuModule):
    """evrf / mfu / ld stage: fixed fill latency, one chunk per cycle."""

    def __init__(self, sim, name, npu_id, core, role, workload):
        super().__init__(sim, name, workload)
        self.npu_id = npu_id
        self.core = core
        self.role = role
        self.latency = getattr(self.cfg, _LATENCY_KEY[role])
        self.cur = None
        self.lat = 0
        self.in_left = 0
        self.gen_left = 0       # chunks this block itself must produce
        self.gen_idx = 0
        self.wb = None          # (desc, next idx, total) writeback being sent

    def _downstream(self):
        role = _DOWNSTREAM.get(self.role)
        if role is None:
            return None
        return (block_name(self.npu_id, role, self.core), "p0")

    def _accepts_stream_data(self):
        return (self.cur is not None and self.lat == 0 and self.in_left > 0
                and (self.role == "ld" or not self.out))

    def _consume_stream_chunk(self, tx, now):
        self.chunks_in += 1
        self.in_left -= 1
        if self.role != "ld":
            desc = self.cur
            total = _n_chunks(desc.vec_len, self.cfg)
            idx = total - 1 - self.in_left
            self.out.append(self._chunk_tx(desc, self._downstream(), idx, total))
            self.chunks_out += 1
        if self.in_left == 0 and self.role == "ld":
            self._input_complete(now)

    def _input_complete(self, now):
        desc = self.cur
        if desc.ld_dest == "out":
            self.out.append(Transaction(
                kind=STREAM, src=self.port.name,
                dest=(block_name(desc.npu, "dispatcher"), "p0"),
                data=pack_desc(desc.npu, desc.core, self._desc_to_instr(desc),
                               desc.mvu_m, desc.vec_len),
                address=ADDR_TOKEN))
        else:
            target = "mvu" if desc.ld_dest == "wb_mvu" else "evrf"
            dest = (block_name(desc.npu, target, desc.core), "p0")
            self.out.append(Transaction(
                kind=STREAM, src=self.port.name, dest=dest,
                data=pack_desc(desc.npu, desc.core, self._desc_to_instr(desc),
                               desc.mvu_m, desc.vec_len),
                address=ADDR_WB))
            self.wb = [desc, 0, _n_chunks(desc.vec_len, self.cfg), dest]

    def tick(self, now):
        busy = self._drain_out(now)
        busy = self._rx(now) or busy

        if self.cur is None and not self.out and self.wb is None and self.ctrl_q:
            desc = self.ctrl_q.popleft()
            self.cur = desc
            self.lat = self.latency
            total = _n_chunks(desc.vec_len, self.cfg)
            if self.role == "evrf" and desc.evrf_source:
                self.in_left = 0
                self.gen_left = total
                self.gen_idx = 0
            else:
                self.in_left = total
                self.gen_left = 0
            if self.role != "ld":
                self.out.append(Transaction(
                    kind=STREAM, src=self.port.name, dest=self._downstream(),
                    data=pack_desc(desc.npu, desc.core,
                                   self._desc_to_instr(desc), desc.mvu_m,
                                   desc.vec_len),
                    address=ADDR_CTRL))
            busy = True

        if self.cur is not None and self.lat > 0:
            self.lat -= 1
            self.sim.activity += 1
            busy = True

        if self.cur is not None and self.lat == 0 and self.gen_left > 0 \
                and not self.out:
            desc = self.cur
            total = _n_chunks(desc.vec_len, self.cfg)
            self.out.append(self._chunk_tx(desc, self._downstream(),
                                           self.gen_idx, total))
            self.chunks_out += 1
            self.gen_idx += 1
            self.gen_left -= 1
            busy = True

        if self.wb is not None and not self.out:
            desc, idx, total, dest = self.wb
            self.out.append(self._chunk_tx(desc, dest, idx, total))
            self.chunks_out += 1
            if idx + 1 == total:
                self.wb = None
            else:
                self.wb[1] = idx + 1
            busy = True

        if self.cur is not None and self.lat == 0 and self.in_left == 0 \
                and self.gen_left == 0 and not self.out and self.wb is None:
            self.cur = None
            busy = True

        return busy or bool(self.ctrl_q) or self.cur is not None \
            or bool(self.out) or self.wb is not None


class NpuWorkload:
    """Driver: builds the module set and tracks completion."""

    def __init__(self, spec):
        self.spec = spec
        self.cfg = spec.cfg
        self.dispatchers = []
        self.blocks = []

    def build_modules(self, sim):
        modules = []
        for i in range(self.cfg.count):
            d = Dispatcher(sim, block_name(i, "dispatcher"), i, self)
            self.dispatchers.append(d)
            modules.append(d)
            for c in range(self.cfg.cores):
                mvu = MvuCore(sim, block_name(i, "mvu", c), i, c, self)
                modules.append(mvu)
                self.blocks.append(mvu)
                for role in ("evrf", "mfu0_", "mfu1_", "ld"):
                    block = VectorBlock(sim, block_name(i, role, c), i, c,
                                        role, self)
                    modules.append(block)
                    self.blocks.append(block)
        return modules

    def done(self):
        return all(d.done() for d in self.dispatchers)

    def total_ops(self):
        return workload_ops(self.spec)

    def per_thread_completion(self):
        out = {}
        for i, d in enumerate(self.dispatchers):
            for t, time in d.completion_time.items():
                out[(i, t)] = time
        return out
