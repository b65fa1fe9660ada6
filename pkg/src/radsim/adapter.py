"""Latency-insensitive NoC adapters.

Three stages in each direction, mirroring a streaming slave/master pair:
module interfacing (input arbitration / steering), encode/decode
(packetize / depacketize), and NoC interfacing (asynchronous injection
and ejection FIFOs owned by the NoC state so the stepping kernel can
drain/fill them).

All clock-domain crossings use the same visibility rule: an item pushed
at producer edge tw can be popped at the first consumer edge strictly
after tw.
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import (
    OversizedTransaction,
    ProtocolViolation,
    UnknownInterface,
    UnroutableDestination,
)
from .telemetry import DEPACKETIZATION, PACKETIZATION
from .noc.state import (
    BASE_FIELDS, BODY, F_DEST_I, F_KIND, F_SEQ, F_TX, F_VC, HEAD, HEAD_TAIL,
    TAIL, encode_flit, payload_bytes,
)

STREAM = "stream"
MM_READ_REQ = "mm_read_req"
MM_WRITE_REQ = "mm_write_req"
MM_READ_RESP = "mm_read_resp"
MM_WRITE_RESP = "mm_write_resp"

KIND_CODES = {STREAM: 0, MM_READ_REQ: 1, MM_WRITE_REQ: 2,
              MM_READ_RESP: 3, MM_WRITE_RESP: 4}
KIND_BY_CODE = {v: k for k, v in KIND_CODES.items()}

_VC_CLASS = {STREAM: "stream", MM_READ_REQ: "mm_req", MM_WRITE_REQ: "mm_req",
             MM_READ_RESP: "mm_resp", MM_WRITE_RESP: "mm_resp"}


def vc_class(kind):
    return _VC_CLASS[kind]


@dataclass
class Transaction:
    """Application-level message carried over the NoC as one packet."""

    kind: str
    src: tuple      # (module, port)
    dest: tuple     # (module, port)
    data: bytes = b""
    id: int = 0
    last: bool = False
    address: int = 0
    trace: str = ""

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown transaction kind {self.kind!r}")


class CdcFifo:
    """Bounded FIFO with strict cross-domain visibility timestamps."""

    def __init__(self, depth):
        self.depth = depth
        self._q = deque()
        self.consumer = None
        self.producer = None

    def __len__(self):
        return len(self._q)

    def full(self):
        return len(self._q) >= self.depth

    def push(self, item, now):
        """Push at a producer edge; False (without loss) when full."""
        if len(self._q) >= self.depth:
            return False
        self._q.append((now, item))
        if self.consumer is not None:
            self.consumer.wake()
        return True

    def peek(self, now):
        if self._q and self._q[0][0] < now:
            return self._q[0][1]
        return None

    def pop(self, now):
        """Pop at a consumer edge; only items pushed strictly earlier."""
        if self._q and self._q[0][0] < now:
            item = self._q.popleft()[1]
            if self.producer is not None:
                self.producer.wake()
            return item
        return None


def cdc_push(fifo, item, now):
    return fifo.push(item, now)


def cdc_pop(fifo, now):
    return fifo.pop(now)


def arbitrate_inputs(ready, last_grant, n):
    """Round-robin over interface ids starting after the last grant."""
    for i in range(1, n + 1):
        cand = (last_grant + i) % n
        if cand in ready:
            return cand
    return None


# --- wire encoding ----------------------------------------------------------

_U64 = (1 << 64) - 1


def _i64(u):
    u &= _U64
    return u - (1 << 64) if u >= (1 << 63) else u


def _u64(i):
    return i & _U64


def pack_source(noc_id, router, iface):
    return (noc_id << 12) | (router << 4) | iface


def unpack_source(src16):
    return (src16 >> 12) & 0xF, (src16 >> 4) & 0xFF, src16 & 0xF


def _header_words(tx, src16, trace_id):
    word0 = (len(tx.data) & 0xFFFFFFFF) \
        | (KIND_CODES[tx.kind] << 32) \
        | ((1 if tx.last else 0) << 36) \
        | (((trace_id + 1) & 0x7FF) << 37) \
        | ((src16 & 0xFFFF) << 48)
    return _i64(word0), _i64(tx.address)


def _parse_header(word0, word1):
    w = _u64(word0)
    return {
        "data_len": w & 0xFFFFFFFF,
        "kind": KIND_BY_CODE[(w >> 32) & 0xF],
        "last": bool((w >> 36) & 1),
        "trace_id": ((w >> 37) & 0x7FF) - 1,
        "src16": (w >> 48) & 0xFFFF,
        "address": _u64(word1),
    }


def packetize(tx, *, vc, dest_router, dest_iface, src_router, src16,
              payload_width, max_tx_bytes, trace_id=-1):
    """Split a transaction into flit records.

    The head flit carries only the header; data rides in body flits of
    `payload_width` bits with the final one marked tail.  A transaction
    with no data collapses to a single head_tail flit.
    """
    if len(tx.data) > max_tx_bytes:
        raise OversizedTransaction(
            f"transaction {tx.id} carries {len(tx.data)} bytes "
            f"(limit {max_tx_bytes})")
    n_words = payload_width // 64
    flit_bytes = payload_width // 8
    h0, h1 = _header_words(tx, src16, trace_id)

    data = tx.data
    n_data = (len(data) + flit_bytes - 1) // flit_bytes
    head_kind = HEAD if n_data else HEAD_TAIL
    head = encode_flit(head_kind, vc, dest_router, dest_iface, tx.id,
                       src_router, 0, b"", n_words)
    head[BASE_FIELDS] = h0
    if n_words > 1:
        head[BASE_FIELDS + 1] = h1
    flits = [head]
    for i in range(n_data):
        chunk = data[i * flit_bytes:(i + 1) * flit_bytes]
        kind = TAIL if i == n_data - 1 else BODY
        flits.append(encode_flit(kind, vc, dest_router, dest_iface, tx.id,
                                 src_router, i + 1, chunk, n_words))
    return flits


@dataclass
class _Reassembly:
    header: dict
    chunks: list = field(default_factory=list)
    next_seq: int = 1


class Depacketizer:
    """Per-VC packet reassembly; returns a header+payload dict on tail."""

    def __init__(self, vcs, n_words):
        self.n_words = n_words
        self.pending = [None] * vcs

    def feed(self, rec):
        vc = int(rec[F_VC])
        kind = int(rec[F_KIND])
        state = self.pending[vc]
        if kind in (HEAD, HEAD_TAIL):
            if state is not None:
                raise ProtocolViolation(
                    f"head flit for tx {int(rec[F_TX])} interrupts an open "
                    f"packet on VC {vc}")
            header = _parse_header(int(rec[BASE_FIELDS]),
                                   int(rec[BASE_FIELDS + 1]) if self.n_words > 1 else 0)
            header["tx_id"] = int(rec[F_TX])
            header["dest_iface"] = int(rec[F_DEST_I])
            if kind == HEAD_TAIL:
                header["data"] = b""
                return header
            self.pending[vc] = _Reassembly(header=header)
            return None
        if state is None:
            raise ProtocolViolation(f"{'body' if kind == BODY else 'tail'} "
                                    f"flit without a head on VC {vc}")
        if int(rec[F_SEQ]) != state.next_seq or int(rec[F_TX]) != state.header["tx_id"]:
            raise ProtocolViolation(
                f"flit order broken on VC {vc}: expected seq {state.next_seq} "
                f"of tx {state.header['tx_id']}, got seq {int(rec[F_SEQ])} "
                f"of tx {int(rec[F_TX])}")
        state.next_seq += 1
        state.chunks.append(payload_bytes(rec, self.n_words))
        if kind == TAIL:
            self.pending[vc] = None
            header = state.header
            header["data"] = b"".join(state.chunks)[:header["data_len"]]
            return header
        return None


def depacketize(depacketizer, rec):
    return depacketizer.feed(rec)


# --- adapter component -------------------------------------------------------

class Interface:
    """One module port attached to an adapter slot."""

    def __init__(self, name, tx_depth=2, rx_depth=2):
        self.name = name   # (module, port)
        self.tx = CdcFifo(tx_depth)
        self.rx = CdcFifo(rx_depth)


class Adapter:
    """Bridges up to `adapter_interfaces` module ports onto one router."""

    def __init__(self, sim, noc, router):
        self.sim = sim
        self.noc = noc          # NocInstance
        self.router = router
        self.cfg = sim.arch.adapter
        self.noc_cfg = noc.cfg
        self.interfaces = []
        self.in_rr = self.cfg.interfaces - 1
        self.backlog = deque()            # flit records awaiting injection
        self.backlog_tx = None
        self.depacketizer = Depacketizer(self.noc_cfg.vcs,
                                         self.noc_cfg.payload_width // 64)
        self.obuff = deque()
        # Component plumbing is attached by the engine.
        self.comp_id = -1
        self.domain = None
        self.active = True
        self._wake_time = -1

    def wake(self):
        self.active = True
        self._wake_time = self.sim.global_time

    def add_interface(self, iface):
        self.interfaces.append(iface)
        iface.tx.consumer = self
        iface.rx.producer = self

    def tick(self, now):
        busy = self._steer(now)
        busy = self._eject(now) or busy
        busy = self._inject(now) or busy
        return busy or bool(self.obuff) or self.noc.state.ej_cnt[self.router] > 0 \
            or bool(self.backlog) \
            or any(len(i.tx) for i in self.interfaces)

    # --- ejection direction ------------------------------------------------

    def _steer(self, now):
        """Deliver the oldest reassembled transaction to its interface."""
        if not self.obuff:
            return False
        header = self.obuff[0]
        idx = header["dest_iface"]
        if idx >= len(self.interfaces):
            raise UnknownInterface(
                f"packet for interface {idx} of router {self.router} on "
                f"noc {self.noc.noc_id}, which has {len(self.interfaces)} "
                "bound interfaces")
        iface = self.interfaces[idx]
        tx = self._to_transaction(header, iface.name)
        if iface.rx.push(tx, now):
            self.obuff.popleft()
            self.sim.activity += 1
            return True
        return False

    def _eject(self, now):
        """Drain at most one flit per cycle from the ejection FIFO."""
        state = self.noc.state
        kind = state.ej_peek_kind(self.router, now)
        if kind is None:
            return False
        if kind in (TAIL, HEAD_TAIL) and len(self.obuff) >= self.cfg.obuff_size:
            return False  # output buffer full: hold the packet in the FIFO
        rec = state.ej_pop(self.router, now)
        header = self.depacketizer.feed(rec)
        self.sim.activity += 1
        if header is not None:
            self.sim.telemetry.record(header["tx_id"], DEPACKETIZATION, now)
            self.obuff.append(header)
        return True

    def _to_transaction(self, header, dest_name):
        src = self.sim.interface_name(*unpack_source(header["src16"]))
        return Transaction(
            kind=header["kind"],
            src=src,
            dest=dest_name,
            data=header["data"],
            id=header["tx_id"],
            last=header["last"],
            address=header["address"],
        )

    # --- injection direction -------------------------------------------------

    def _inject(self, now):
        state = self.noc.state
        if self.backlog:
            if state.inj_push(self.router, self.backlog[0], now):
                self.backlog.popleft()
                self.sim.activity += 1
                return True
            return False

        ready = {i for i, iface in enumerate(self.interfaces)
                 if iface.tx.peek(now) is not None}
        grant = arbitrate_inputs(ready, self.in_rr, len(self.interfaces)) \
            if ready else None
        if grant is None:
            return False
        self.in_rr = grant
        tx = self.interfaces[grant].tx.pop(now)
        self.sim.telemetry.record(tx.id, PACKETIZATION, now)
        self.backlog.extend(self._packetize(tx))
        self.sim.activity += 1
        if self.backlog and state.inj_push(self.router, self.backlog[0], now):
            self.backlog.popleft()
        return True

    def _packetize(self, tx):
        table = self.sim.interface_table
        loc = table.get(tx.dest)
        if loc is None:
            raise UnroutableDestination(
                f"transaction {tx.id} addresses unplaced port "
                f"{tx.dest[0]}.{tx.dest[1]}")
        noc_id, dest_router, dest_iface = loc
        if noc_id != self.noc.noc_id:
            raise UnroutableDestination(
                f"transaction {tx.id} crosses from noc {self.noc.noc_id} to "
                f"noc {noc_id}; NoCs are independent")
        src_loc = table[tx.src]
        vc = self.cfg.vc_of(vc_class(tx.kind))
        trace_id = self.sim.telemetry.trace_id(tx.trace)
        return packetize(
            tx, vc=vc, dest_router=dest_router, dest_iface=dest_iface,
            src_router=self.router, src16=pack_source(*src_loc),
            payload_width=self.noc_cfg.payload_width,
            max_tx_bytes=self.cfg.max_tx_bytes, trace_id=trace_id)
