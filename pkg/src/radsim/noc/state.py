"""Flat array state for one NoC instance, shared by both stepping kernels.

Flits are fixed-width int64 records so the compiled kernel can move them
with plain memory copies.  Record layout:

    [0] kind           head=0 body=1 tail=2 head_tail=3
    [1] vc
    [2] dest_router
    [3] dest_interface
    [4] transaction id
    [5] src_router
    [6] eligible cycle (absolute NoC cycle at which the flit may traverse)
    [7] sequence index within its packet
    [8:] payload words (little-endian, payload_width/64 of them)

Head and head_tail flits carry the packet header in their payload words;
data bytes travel only in body/tail flits, so the reassembled payload on
ejection is recoverable bit-for-bit from the wire.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import CreditOverflow
from ..topology import LOCAL, NUM_PORTS, OPPOSITE, routing_table, productive_table
from ..topology import MINIMAL_ADAPTIVE

HEAD, BODY, TAIL, HEAD_TAIL = 0, 1, 2, 3
KIND_NAMES = ("head", "body", "tail", "head_tail")

F_KIND, F_VC, F_DEST_R, F_DEST_I, F_TX, F_SRC_R, F_ELIG, F_SEQ = range(8)
BASE_FIELDS = 8

# scalar counter slots
S_INJECTED, S_EJECTED, S_INFLIGHT, S_ACTIVITY, S_EV_CNT, S_INJ_PENDING, \
    S_TOUCHED_CNT, S_BUG = range(8)

# event stage codes match telemetry ladder indices
EV_INJECTION = 2
EV_EJECTION = 3


@dataclass(frozen=True)
class Flit:
    """Decoded view of a flit record (tests and debugging)."""

    kind: str
    vc: int
    payload: bytes
    dest_router: int = 0
    dest_interface: int = 0
    transaction_id: int = 0
    src_router: int = 0
    seq: int = 0


def payload_pattern(tx_id, seq, n):
    """Deterministic synthetic payload bytes for integrity checking."""
    out = bytearray(n)
    for i in range(n):
        out[i] = (tx_id * 131 + seq * 17 + i) & 0xFF
    return bytes(out)


class NocState:
    """Buffers, credits, arbiter state, and adapter-facing FIFOs of one NoC."""

    def __init__(self, noc_id, cfg, adapter_cfg):
        topo = cfg.topology
        self.noc_id = noc_id
        self.cfg = cfg
        self.topo = topo
        self.R = topo.num_routers
        self.V = cfg.vcs
        self.B = cfg.vc_buffer_size
        self.P = cfg.pipeline_depth
        self.n_words = cfg.payload_width // 64
        self.W = BASE_FIELDS + self.n_words
        self.fifo_depth = adapter_cfg.fifo_size
        self.adaptive = topo.routing == MINIMAL_ADAPTIVE
        self.cycle = 0

        R, V, B, W, D = self.R, self.V, self.B, self.W, self.fifo_depth
        self.buf = np.zeros((R, NUM_PORTS, V, B, W), dtype=np.int64)
        self.buf_head = np.zeros((R, NUM_PORTS, V), dtype=np.int32)
        self.buf_cnt = np.zeros((R, NUM_PORTS, V), dtype=np.int32)
        self.claim_holder = np.full((R, NUM_PORTS, V), -1, dtype=np.int32)
        self.claim_out = np.full((R, NUM_PORTS, V), -1, dtype=np.int32)
        self.credits = np.full((R, NUM_PORTS, V), self.B, dtype=np.int32)
        self.va_rr = np.zeros((R, NUM_PORTS, V), dtype=np.int32)
        self.sa_rr = np.zeros((R, NUM_PORTS), dtype=np.int32)
        self.rcnt = np.zeros(R, dtype=np.int32)

        self.inj_buf = np.zeros((R, D, W), dtype=np.int64)
        self.inj_tw = np.zeros((R, D), dtype=np.int64)
        self.inj_head = np.zeros(R, dtype=np.int32)
        self.inj_cnt = np.zeros(R, dtype=np.int32)
        self.ej_buf = np.zeros((R, D, W), dtype=np.int64)
        self.ej_tw = np.zeros((R, D), dtype=np.int64)
        self.ej_head = np.zeros(R, dtype=np.int32)
        self.ej_cnt = np.zeros(R, dtype=np.int32)

        self.fwd = np.zeros((R, NUM_PORTS), dtype=np.int64)
        self.stall = np.zeros((R, NUM_PORTS), dtype=np.int64)
        self.peak = np.zeros((R, NUM_PORTS, V), dtype=np.int32)
        self.scalars = np.zeros(8, dtype=np.int64)

        self.events = np.zeros((4 * R + 8, 3), dtype=np.int64)
        self.touched = np.zeros(4 * R + 8, dtype=np.int32)

        self.route = routing_table(topo)
        self.prod = productive_table(topo)
        self.neighbor = np.full((R, NUM_PORTS), -1, dtype=np.int32)
        for r in range(R):
            for p in range(NUM_PORTS - 1):
                n = topo.neighbor(r, p)
                if n is not None:
                    self.neighbor[r, p] = n
        self.opposite = np.array(OPPOSITE, dtype=np.int32)

        # commit-phase scratch
        cap = R * NUM_PORTS
        self.mv_words = np.zeros((cap, W), dtype=np.int64)
        self.mv_meta = np.zeros((cap, 3), dtype=np.int32)   # dst router, dst port, vc
        self.cr_meta = np.zeros((cap, 3), dtype=np.int32)   # router, port, vc

    # --- adapter-facing FIFO access ------------------------------------

    def inj_free(self, router):
        return self.fifo_depth - self.inj_cnt[router]

    def inj_push(self, router, rec, tw):
        """Push one flit record into the injection FIFO; False when full."""
        cnt = self.inj_cnt[router]
        if cnt >= self.fifo_depth:
            return False
        slot = (self.inj_head[router] + cnt) % self.fifo_depth
        self.inj_buf[router, slot, :] = rec
        self.inj_tw[router, slot] = tw
        self.inj_cnt[router] = cnt + 1
        self.scalars[S_INJ_PENDING] += 1
        return True

    def ej_pop(self, router, now):
        """Pop the oldest ejected flit visible strictly before `now`."""
        cnt = self.ej_cnt[router]
        if cnt == 0:
            return None
        head = self.ej_head[router]
        if self.ej_tw[router, head] >= now:
            return None
        rec = self.ej_buf[router, head].copy()
        self.ej_head[router] = (head + 1) % self.fifo_depth
        self.ej_cnt[router] = cnt - 1
        return rec

    def ej_pending(self, router, now):
        """True when a visible flit is waiting in the ejection FIFO."""
        cnt = self.ej_cnt[router]
        if cnt == 0:
            return False
        return self.ej_tw[router, self.ej_head[router]] < now

    def ej_peek_kind(self, router, now):
        cnt = self.ej_cnt[router]
        if cnt == 0:
            return None
        head = self.ej_head[router]
        if self.ej_tw[router, head] >= now:
            return None
        return int(self.ej_buf[router, head, F_KIND])

    # --- bookkeeping ----------------------------------------------------

    def drain_events(self):
        n = int(self.scalars[S_EV_CNT])
        if not n:
            return ()
        out = [tuple(int(v) for v in self.events[i]) for i in range(n)]
        self.scalars[S_EV_CNT] = 0
        return out

    def drain_touched(self):
        n = int(self.scalars[S_TOUCHED_CNT])
        if not n:
            return ()
        out = [int(self.touched[i]) for i in range(n)]
        self.scalars[S_TOUCHED_CNT] = 0
        return out

    def check_bug_flag(self):
        if self.scalars[S_BUG]:
            raise CreditOverflow(
                "credit counter or buffer occupancy exceeded its bound "
                f"(code {int(self.scalars[S_BUG])})")

    def flits_in_flight(self):
        return int(self.scalars[S_INFLIGHT])

    def conservation_ok(self):
        """Injected flits = ejected + in-flight (buffer-resident) flits."""
        s = self.scalars
        return int(s[S_INJECTED]) == int(s[S_EJECTED]) + int(s[S_INFLIGHT])

    def has_work(self):
        return bool(self.scalars[S_INFLIGHT] or self.scalars[S_INJ_PENDING])


# --- record coding ----------------------------------------------------------

def encode_flit(kind, vc, dest_router, dest_iface, tx_id, src_router, seq,
                payload, n_words):
    """Build one int64 flit record; payload is at most n_words*8 bytes."""
    rec = np.zeros(BASE_FIELDS + n_words, dtype=np.int64)
    rec[F_KIND] = kind
    rec[F_VC] = vc
    rec[F_DEST_R] = dest_router
    rec[F_DEST_I] = dest_iface
    rec[F_TX] = tx_id
    rec[F_SRC_R] = src_router
    rec[F_SEQ] = seq
    if payload:
        padded = payload.ljust(n_words * 8, b"\0")
        words = np.frombuffer(padded, dtype="<u8").astype(np.uint64)
        rec[BASE_FIELDS:] = words.view(np.int64)
    return rec


def payload_bytes(rec, n_words):
    words = rec[BASE_FIELDS:BASE_FIELDS + n_words].astype(np.int64)
    return words.view(np.uint64).astype("<u8").tobytes()


def decode_flit(rec, n_words):
    return Flit(
        kind=KIND_NAMES[int(rec[F_KIND])],
        vc=int(rec[F_VC]),
        payload=payload_bytes(rec, n_words),
        dest_router=int(rec[F_DEST_R]),
        dest_interface=int(rec[F_DEST_I]),
        transaction_id=int(rec[F_TX]),
        src_router=int(rec[F_SRC_R]),
        seq=int(rec[F_SEQ]),
    )
