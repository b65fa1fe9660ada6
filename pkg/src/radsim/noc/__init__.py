"""NoC instance wrapper and stepping-kernel selection.

The router pipeline runs in a compiled Cython kernel when available;
set RADSIM_NOC_KERNEL=python (or =cython) to force a choice.  Both
kernels implement identical semantics over the same array state.
"""

import os

from .kernel_py import KernelPy
from .state import NocState


def _select_kernel():
    forced = os.environ.get("RADSIM_NOC_KERNEL", "").lower()
    if forced in ("py", "python"):
        return KernelPy
    try:
        from ._kernel import KernelCy
        return KernelCy
    except ImportError:
        if forced in ("cy", "cython"):
            raise
        return KernelPy


KERNEL_CLASS = _select_kernel()


def kernel_name():
    return KERNEL_CLASS.name


class NocInstance:
    """One packet-switched NoC bound to a simulation clock domain."""

    def __init__(self, sim, noc_id, cfg, adapter_cfg, kernel_class=None):
        self.sim = sim
        self.noc_id = noc_id
        self.cfg = cfg
        self.state = NocState(noc_id, cfg, adapter_cfg)
        self.kernel = (kernel_class or KERNEL_CLASS)(self.state)
        self.adapters = []  # index = router id, filled by the engine
        self.cycle = 0
        self.comp_id = -1
        self.domain = None
        self.active = True
        self._wake_time = -1

    def wake(self):
        self.active = True

    def tick(self, now):
        state = self.state
        if state.has_work():
            moved = self.kernel.step(self.cycle, now)
            if moved:
                self.sim.activity += moved
                state.check_bug_flag()
                for tx_id, stage, t in state.drain_events():
                    self.sim.telemetry.record(tx_id, stage, t)
                for router in state.drain_touched():
                    self.adapters[router].wake()
        self.cycle += 1
        return True
