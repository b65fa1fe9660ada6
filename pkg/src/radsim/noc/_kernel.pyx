# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled NoC stepping kernel.

Semantics are defined by kernel_py.KernelPy; this is a line-for-line
port to C loops over the same arrays.  The equivalence test steps both
kernels against identical traffic and compares full state, so keep any
change synchronized with the Python reference.
"""

DEF NUM_PORTS = 5
DEF LOCAL = 4
DEF MAX_VCS = 8

DEF F_KIND = 0
DEF F_VC = 1
DEF F_DEST_R = 2
DEF F_ELIG = 6

DEF HEAD = 0
DEF BODY = 1
DEF TAIL = 2
DEF HEAD_TAIL = 3

DEF F_TX = 4

DEF S_INJECTED = 0
DEF S_EJECTED = 1
DEF S_INFLIGHT = 2
DEF S_ACTIVITY = 3
DEF S_EV_CNT = 4
DEF S_INJ_PENDING = 5
DEF S_TOUCHED_CNT = 6
DEF S_BUG = 7

DEF EV_INJECTION = 2
DEF EV_EJECTION = 3


cdef class KernelCy:
    cdef long long[:, :, :, :, ::1] buf
    cdef int[:, :, ::1] head, cnt, holder, owned, credits, va_rr, peak
    cdef int[:, ::1] sa_rr, neighbor, mv_meta, cr_meta
    cdef int[::1] rcnt, inj_head, inj_cnt, ej_head, ej_cnt, opposite, touched
    cdef long long[:, :, ::1] inj_buf, ej_buf
    cdef long long[:, ::1] inj_tw, ej_tw, events, fwd, stall, mv_words
    cdef long long[::1] scalars
    cdef signed char[:, ::1] route
    cdef signed char[:, :, ::1] prod
    cdef int R, V, B, P, W, fifo_depth
    cdef bint adaptive

    name = "cython"

    def __init__(self, state):
        self.buf = state.buf
        self.head = state.buf_head
        self.cnt = state.buf_cnt
        self.holder = state.claim_holder
        self.owned = state.claim_out
        self.credits = state.credits
        self.va_rr = state.va_rr
        self.sa_rr = state.sa_rr
        self.peak = state.peak
        self.rcnt = state.rcnt
        self.inj_buf = state.inj_buf
        self.inj_tw = state.inj_tw
        self.inj_head = state.inj_head
        self.inj_cnt = state.inj_cnt
        self.ej_buf = state.ej_buf
        self.ej_tw = state.ej_tw
        self.ej_head = state.ej_head
        self.ej_cnt = state.ej_cnt
        self.fwd = state.fwd
        self.stall = state.stall
        self.scalars = state.scalars
        self.events = state.events
        self.touched = state.touched
        self.route = state.route
        self.prod = state.prod
        self.neighbor = state.neighbor
        self.opposite = state.opposite
        self.mv_words = state.mv_words
        self.mv_meta = state.mv_meta
        self.cr_meta = state.cr_meta
        self.R = state.R
        self.V = state.V
        self.B = state.B
        self.P = state.P
        self.W = state.W
        self.fifo_depth = state.fifo_depth
        self.adaptive = state.adaptive

    cdef inline int _route_port(self, int r, int dest, int v) noexcept:
        cdef int a, b
        if not self.adaptive:
            return self.route[r, dest]
        a = self.prod[r, dest, 0]
        b = self.prod[r, dest, 1]
        if b < 0:
            return a
        if self.credits[r, b, v] > self.credits[r, a, v]:
            return b
        return a

    def step(self, long long cycle, long long now_ps):
        cdef int R = self.R, V = self.V, B = self.B, P = self.P, W = self.W
        cdef int mv_n = 0, cr_n = 0
        cdef long long activity = 0
        cdef int requests[NUM_PORTS * MAX_VCS]
        cdef int r, p, v, o, i, k, h, mask, start, kind, dest
        cdef int winner_v, credit_blocked, granted_inputs, free, slot
        cdef int tail_slot, u, c
        cdef long long e, t

        if self.scalars[S_INFLIGHT] == 0 and self.scalars[S_INJ_PENDING] == 0:
            return 0

        for r in range(R):
            if self.rcnt[r] == 0 and self.inj_cnt[r] == 0:
                continue

            # --- VC allocation ------------------------------------------
            for i in range(NUM_PORTS * V):
                requests[i] = 0
            for p in range(NUM_PORTS):
                for v in range(V):
                    if self.cnt[r, p, v] == 0 or self.owned[r, p, v] != -1:
                        continue
                    h = self.head[r, p, v]
                    kind = <int> self.buf[r, p, v, h, F_KIND]
                    if kind != HEAD and kind != HEAD_TAIL:
                        self.scalars[S_BUG] = 2
                        continue
                    if self.buf[r, p, v, h, F_ELIG] > cycle:
                        continue
                    dest = <int> self.buf[r, p, v, h, F_DEST_R]
                    o = self._route_port(r, dest, v)
                    if self.holder[r, o, v] == -1:
                        requests[o * V + v] |= 1 << p
            for o in range(NUM_PORTS):
                for v in range(V):
                    mask = requests[o * V + v]
                    if mask == 0:
                        continue
                    start = self.va_rr[r, o, v]
                    for i in range(1, NUM_PORTS + 1):
                        p = (start + i) % NUM_PORTS
                        if mask & (1 << p):
                            self.holder[r, o, v] = p
                            self.owned[r, p, v] = o
                            self.va_rr[r, o, v] = p
                            break

            # --- switch allocation ----------------------------------------
            granted_inputs = 0
            for o in range(NUM_PORTS):
                winner_v = -1
                credit_blocked = 0
                start = self.sa_rr[r, o]
                for i in range(1, V + 1):
                    v = (start + i) % V
                    p = self.holder[r, o, v]
                    if p < 0 or self.cnt[r, p, v] == 0 \
                            or granted_inputs & (1 << p):
                        continue
                    h = self.head[r, p, v]
                    if self.buf[r, p, v, h, F_ELIG] > cycle:
                        continue
                    if o == LOCAL:
                        free = self.fifo_depth - self.ej_cnt[r]
                    else:
                        free = self.credits[r, o, v]
                    if free <= 0:
                        credit_blocked = 1
                        continue
                    if winner_v < 0:
                        winner_v = v
                if credit_blocked:
                    self.stall[r, o] += 1
                if winner_v < 0:
                    continue

                v = winner_v
                p = self.holder[r, o, v]
                h = self.head[r, p, v]
                kind = <int> self.buf[r, p, v, h, F_KIND]
                self.head[r, p, v] = (h + 1) % B
                self.cnt[r, p, v] -= 1
                self.rcnt[r] -= 1
                granted_inputs |= 1 << p
                self.sa_rr[r, o] = v
                self.fwd[r, o] += 1
                activity += 1

                if o == LOCAL:
                    slot = (self.ej_head[r] + self.ej_cnt[r]) % self.fifo_depth
                    for k in range(W):
                        self.ej_buf[r, slot, k] = self.buf[r, p, v, h, k]
                    self.ej_tw[r, slot] = now_ps
                    self.ej_cnt[r] += 1
                    self.scalars[S_EJECTED] += 1
                    self.scalars[S_INFLIGHT] -= 1
                    t = self.scalars[S_TOUCHED_CNT]
                    self.touched[<int> t] = r
                    self.scalars[S_TOUCHED_CNT] = t + 1
                    if kind == TAIL or kind == HEAD_TAIL:
                        e = self.scalars[S_EV_CNT]
                        self.events[<int> e, 0] = self.buf[r, p, v, h, F_TX]
                        self.events[<int> e, 1] = EV_EJECTION
                        self.events[<int> e, 2] = now_ps
                        self.scalars[S_EV_CNT] = e + 1
                else:
                    self.credits[r, o, v] -= 1
                    for k in range(W):
                        self.mv_words[mv_n, k] = self.buf[r, p, v, h, k]
                    self.mv_words[mv_n, F_ELIG] = cycle + P
                    self.mv_meta[mv_n, 0] = self.neighbor[r, o]
                    self.mv_meta[mv_n, 1] = self.opposite[o]
                    self.mv_meta[mv_n, 2] = v
                    mv_n += 1

                if kind == TAIL or kind == HEAD_TAIL:
                    self.holder[r, o, v] = -1
                    self.owned[r, p, v] = -1
                if p != LOCAL:
                    self.cr_meta[cr_n, 0] = self.neighbor[r, p]
                    self.cr_meta[cr_n, 1] = self.opposite[p]
                    self.cr_meta[cr_n, 2] = v
                    cr_n += 1

            # --- injection ------------------------------------------------
            if self.inj_cnt[r] > 0:
                slot = self.inj_head[r]
                if self.inj_tw[r, slot] < now_ps:
                    v = <int> self.inj_buf[r, slot, F_VC]
                    c = self.cnt[r, LOCAL, v]
                    if c < B:
                        tail_slot = (self.head[r, LOCAL, v] + c) % B
                        for k in range(W):
                            self.buf[r, LOCAL, v, tail_slot, k] = \
                                self.inj_buf[r, slot, k]
                        self.buf[r, LOCAL, v, tail_slot, F_ELIG] = cycle + P
                        self.cnt[r, LOCAL, v] = c + 1
                        if c + 1 > self.peak[r, LOCAL, v]:
                            self.peak[r, LOCAL, v] = c + 1
                        self.rcnt[r] += 1
                        self.inj_head[r] = (slot + 1) % self.fifo_depth
                        self.inj_cnt[r] -= 1
                        self.scalars[S_INJ_PENDING] -= 1
                        self.scalars[S_INJECTED] += 1
                        self.scalars[S_INFLIGHT] += 1
                        activity += 1
                        t = self.scalars[S_TOUCHED_CNT]
                        self.touched[<int> t] = r
                        self.scalars[S_TOUCHED_CNT] = t + 1
                        kind = <int> self.buf[r, LOCAL, v, tail_slot, F_KIND]
                        if kind == HEAD or kind == HEAD_TAIL:
                            e = self.scalars[S_EV_CNT]
                            self.events[<int> e, 0] = \
                                self.buf[r, LOCAL, v, tail_slot, F_TX]
                            self.events[<int> e, 1] = EV_INJECTION
                            self.events[<int> e, 2] = now_ps
                            self.scalars[S_EV_CNT] = e + 1

        # --- commit phase ---------------------------------------------------
        cdef int dst
        for i in range(mv_n):
            dst = self.mv_meta[i, 0]
            p = self.mv_meta[i, 1]
            v = self.mv_meta[i, 2]
            c = self.cnt[dst, p, v]
            if c >= B:
                self.scalars[S_BUG] = 1
                continue
            slot = (self.head[dst, p, v] + c) % B
            for k in range(W):
                self.buf[dst, p, v, slot, k] = self.mv_words[i, k]
            self.cnt[dst, p, v] = c + 1
            if c + 1 > self.peak[dst, p, v]:
                self.peak[dst, p, v] = c + 1
            self.rcnt[dst] += 1
        for i in range(cr_n):
            u = self.cr_meta[i, 0]
            p = self.cr_meta[i, 1]
            v = self.cr_meta[i, 2]
            if self.credits[u, p, v] >= B:
                self.scalars[S_BUG] = 4
                continue
            self.credits[u, p, v] += 1

        self.scalars[S_ACTIVITY] += activity
        return activity
