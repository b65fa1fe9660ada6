"""Cycle-level simulator for reconfigurable acceleration devices.

Models an FPGA fabric region plus hard accelerator blocks communicating
over packet-switched NoCs with virtual-channel routers, credit-based
flow control, and latency-insensitive adapters, driven by application
workloads (an NPU overlay, latency probes, random traffic).
"""

__version__ = "0.1.0"

from .config import (  # noqa: F401
    AreaComposition,
    PlacementMap,
    RadArchitecture,
    estimate_asic_area,
    parse_architecture,
    parse_placement,
    validate,
)
from .engine import (  # noqa: F401
    Simulation,
    StopCondition,
    advance_tick,
    build_simulation,
    run_until,
)
