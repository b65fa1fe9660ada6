"""Pure-Python NoC stepping kernel (reference semantics).

One call to `step` advances every router of one NoC by a single clock
edge.  The compiled kernel in `_kernel.pyx` implements the identical
algorithm over the same arrays; the two must stay in lockstep — any
change here must be mirrored there (the equivalence test compares them
cycle by cycle).

Per-router pipeline model: a flit written into a buffer during cycle n
becomes part of state at n+1 and may traverse the switch no earlier
than cycle n + pipeline_depth, which yields the canonical
`pipeline_depth` cycles per hop when uncontended.  VC allocation and
switch allocation are round-robin and happen in the traversal cycle.
"""

from ..topology import LOCAL, NUM_PORTS
from .state import (
    BODY, F_DEST_R, F_ELIG, F_KIND, F_SEQ, F_TX, F_VC, HEAD, HEAD_TAIL, TAIL,
    EV_EJECTION, EV_INJECTION,
    S_ACTIVITY, S_BUG, S_EJECTED, S_EV_CNT, S_INFLIGHT, S_INJECTED,
    S_INJ_PENDING, S_TOUCHED_CNT,
)


class KernelPy:
    """Reference kernel bound to one NocState."""

    name = "python"

    def __init__(self, state):
        self.s = state

    def step(self, cycle, now_ps):
        s = self.s
        if not (s.scalars[S_INFLIGHT] or s.scalars[S_INJ_PENDING]):
            return 0

        R, V, B, P, W = s.R, s.V, s.B, s.P, s.W
        buf, head, cnt = s.buf, s.buf_head, s.buf_cnt
        holder, owned = s.claim_holder, s.claim_out
        credits = s.credits
        mv_n = 0
        cr_n = 0
        activity = 0

        for r in range(R):
            if s.rcnt[r] == 0 and s.inj_cnt[r] == 0:
                continue

            # --- VC allocation: eligible head flits claim output VCs ----
            requests = [0] * (NUM_PORTS * V)
            for p in range(NUM_PORTS):
                for v in range(V):
                    if cnt[r, p, v] == 0 or owned[r, p, v] != -1:
                        continue
                    rec = buf[r, p, v, head[r, p, v]]
                    kind = rec[F_KIND]
                    if kind != HEAD and kind != HEAD_TAIL:
                        s.scalars[S_BUG] = 2  # body/tail without a claim
                        continue
                    if rec[F_ELIG] > cycle:
                        continue
                    o = self._route(r, rec, v)
                    if holder[r, o, v] == -1:
                        requests[o * V + v] |= 1 << p
            for o in range(NUM_PORTS):
                for v in range(V):
                    mask = requests[o * V + v]
                    if not mask:
                        continue
                    start = s.va_rr[r, o, v]
                    for i in range(1, NUM_PORTS + 1):
                        p = (start + i) % NUM_PORTS
                        if mask & (1 << p):
                            holder[r, o, v] = p
                            owned[r, p, v] = o
                            s.va_rr[r, o, v] = p
                            break

            # --- switch allocation: one flit per output port -------------
            granted_inputs = 0
            for o in range(NUM_PORTS):
                winner_v = -1
                credit_blocked = False
                start = s.sa_rr[r, o]
                for i in range(1, V + 1):
                    v = (start + i) % V
                    p = holder[r, o, v]
                    if p < 0 or cnt[r, p, v] == 0 or granted_inputs & (1 << p):
                        continue
                    rec = buf[r, p, v, head[r, p, v]]
                    if rec[F_ELIG] > cycle:
                        continue
                    if o == LOCAL:
                        free = s.fifo_depth - s.ej_cnt[r]
                    else:
                        free = credits[r, o, v]
                    if free <= 0:
                        credit_blocked = True
                        continue
                    if winner_v < 0:
                        winner_v = v
                if credit_blocked:
                    s.stall[r, o] += 1
                if winner_v < 0:
                    continue

                v = winner_v
                p = holder[r, o, v]
                h = head[r, p, v]
                rec = buf[r, p, v, h].copy()
                head[r, p, v] = (h + 1) % B
                cnt[r, p, v] -= 1
                s.rcnt[r] -= 1
                granted_inputs |= 1 << p
                s.sa_rr[r, o] = v
                s.fwd[r, o] += 1
                activity += 1
                kind = rec[F_KIND]

                if o == LOCAL:
                    slot = (s.ej_head[r] + s.ej_cnt[r]) % s.fifo_depth
                    s.ej_buf[r, slot, :] = rec
                    s.ej_tw[r, slot] = now_ps
                    s.ej_cnt[r] += 1
                    s.scalars[S_EJECTED] += 1
                    s.scalars[S_INFLIGHT] -= 1
                    t = s.scalars[S_TOUCHED_CNT]
                    s.touched[t] = r
                    s.scalars[S_TOUCHED_CNT] = t + 1
                    if kind == TAIL or kind == HEAD_TAIL:
                        e = s.scalars[S_EV_CNT]
                        s.events[e, 0] = rec[F_TX]
                        s.events[e, 1] = EV_EJECTION
                        s.events[e, 2] = now_ps
                        s.scalars[S_EV_CNT] = e + 1
                else:
                    credits[r, o, v] -= 1
                    rec[F_ELIG] = cycle + P
                    s.mv_words[mv_n, :] = rec
                    s.mv_meta[mv_n, 0] = s.neighbor[r, o]
                    s.mv_meta[mv_n, 1] = s.opposite[o]
                    s.mv_meta[mv_n, 2] = v
                    mv_n += 1

                if kind == TAIL or kind == HEAD_TAIL:
                    holder[r, o, v] = -1
                    owned[r, p, v] = -1
                if p != LOCAL:
                    u = s.neighbor[r, p]
                    s.cr_meta[cr_n, 0] = u
                    s.cr_meta[cr_n, 1] = s.opposite[p]
                    s.cr_meta[cr_n, 2] = v
                    cr_n += 1

            # --- injection: local buffer write from the adapter FIFO -----
            if s.inj_cnt[r] > 0:
                slot = s.inj_head[r]
                if s.inj_tw[r, slot] < now_ps:
                    rec = s.inj_buf[r, slot]
                    v = int(rec[F_VC])
                    if cnt[r, LOCAL, v] < B:
                        tail_slot = (head[r, LOCAL, v] + cnt[r, LOCAL, v]) % B
                        buf[r, LOCAL, v, tail_slot, :] = rec
                        buf[r, LOCAL, v, tail_slot, F_ELIG] = cycle + P
                        cnt[r, LOCAL, v] += 1
                        if cnt[r, LOCAL, v] > s.peak[r, LOCAL, v]:
                            s.peak[r, LOCAL, v] = cnt[r, LOCAL, v]
                        s.rcnt[r] += 1
                        s.inj_head[r] = (slot + 1) % s.fifo_depth
                        s.inj_cnt[r] -= 1
                        s.scalars[S_INJ_PENDING] -= 1
                        s.scalars[S_INJECTED] += 1
                        s.scalars[S_INFLIGHT] += 1
                        activity += 1
                        t = s.scalars[S_TOUCHED_CNT]
                        s.touched[t] = r
                        s.scalars[S_TOUCHED_CNT] = t + 1
                        kind = rec[F_KIND]
                        if kind == HEAD or kind == HEAD_TAIL:
                            e = s.scalars[S_EV_CNT]
                            s.events[e, 0] = rec[F_TX]
                            s.events[e, 1] = EV_INJECTION
                            s.events[e, 2] = now_ps
                            s.scalars[S_EV_CNT] = e + 1

        # --- commit phase: link arrivals and credit returns --------------
        for i in range(mv_n):
            dst = int(s.mv_meta[i, 0])
            p = int(s.mv_meta[i, 1])
            v = int(s.mv_meta[i, 2])
            c = cnt[dst, p, v]
            if c >= B:
                s.scalars[S_BUG] = 1  # arrival into a full buffer
                continue
            slot = (head[dst, p, v] + c) % B
            buf[dst, p, v, slot, :] = s.mv_words[i]
            cnt[dst, p, v] = c + 1
            if c + 1 > s.peak[dst, p, v]:
                s.peak[dst, p, v] = c + 1
            s.rcnt[dst] += 1
        for i in range(cr_n):
            u = int(s.cr_meta[i, 0])
            p = int(s.cr_meta[i, 1])
            v = int(s.cr_meta[i, 2])
            if credits[u, p, v] >= B:
                s.scalars[S_BUG] = 4  # credit overflow
                continue
            credits[u, p, v] += 1

        s.scalars[S_ACTIVITY] += activity
        return activity

    def _route(self, r, rec, v):
        dest = int(rec[F_DEST_R])
        if not self.s.adaptive:
            return int(self.s.route[r, dest])
        a = int(self.s.prod[r, dest, 0])
        b = int(self.s.prod[r, dest, 1])
        if b < 0:
            return a
        # most free credits wins; ties go to the X-dimension port (first)
        if self.s.credits[r, b, v] > self.s.credits[r, a, v]:
            return b
        return a
