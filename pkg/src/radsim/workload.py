"""Workload specifications (.wkld files) and the NPU instruction model.

Three workload kinds:

* `latency_probe` — one source module sends MM write requests to every
  other placed interface (first interface of each router, then the
  second, and so on), a configurable number per destination, one at a
  time; destinations respond so the source can pace itself.
* `random_uniform` — every placed interface sources fixed-length stream
  packets to uniform-random peers at a configured rate.
* `npu_trace` — a chained-block NPU overlay (matrix-vector unit, vector
  register file, two elementwise units, loader) driven by per-thread
  VLIW instruction lists; `layer` lines expand to instructions via the
  catalog below.

Layer catalog (per `layer <name> <size>` line):

* gemv N [repeat=R]    R independent N x N matrix-vector products.
* mlp N [layers=K]     K chained N x N products with relu between, each
                       layer dependent on the previous writeback.
* rnn H [steps=S]      per step: W.x product, then U.h product fused
                       with add+tanh, written back for the next step.
* gru H [steps=S]      per step: 6 H x H products (update/reset gates
                       and candidate) plus elementwise combines.
* lstm H [steps=S]     per step: 8 H x H products (4 gates x input and
                       recurrent paths) plus 3 elementwise instructions
                       for the cell/hidden updates.

An op is one arithmetic operation: a multiply-accumulate counts as 2,
elementwise vector instructions count vector-length ops per active
stage.
"""

import math
import re
from dataclasses import dataclass, field, replace

from .errors import MalformedValue, OversizedWorkload, UnknownKey

MFU_OPS = ("bypass", "relu", "sigmoid", "tanh", "add", "sub", "mult")
LD_DESTS = ("out", "wb_mvu", "wb_evrf")

LATENCY_PROBE = "latency_probe"
RANDOM_UNIFORM = "random_uniform"
NPU_TRACE = "npu_trace"


@dataclass(frozen=True)
class NpuConfig:
    count: int = 1
    cores: int = 2
    tiles: int = 7
    dpe_sets: int = 1
    dpes_per_set: int = 40
    lanes: int = 40
    threads: int = 1
    rf_depth: int = 512
    element_bytes: int = 4
    tx_data_bytes: int = 128
    issue_window: int = 2
    mvu_fill: int = 8
    evrf_latency: int = 3
    mfu_latency: int = 4
    ld_latency: int = 3

    @property
    def dpes(self):
        return self.dpe_sets * self.dpes_per_set

    def peak_macs_per_cycle(self):
        return self.cores * self.tiles * self.dpes * self.lanes

    def peak_tops(self, mvu_freq_mhz):
        """Upper throughput bound: 2 ops/MAC at the MVU clock."""
        return 2 * self.peak_macs_per_cycle() * mvu_freq_mhz * 1e6 / 1e12


@dataclass(frozen=True)
class NpuInstruction:
    thread: int = 0
    seq: int = 0
    mvu_m: int = 0          # 0 rows means the MVU stage is skipped
    mvu_n: int = 0
    evrf_source: bool = False
    mfu0: str = "bypass"
    mfu1: str = "bypass"
    ld_dest: str = "out"
    dep: bool = False
    vec_len: int = 0        # elements flowing through the chain

    def ops(self):
        total = 2 * self.mvu_m * self.mvu_n
        for op in (self.mfu0, self.mfu1):
            if op != "bypass":
                total += self.vec_len
        return total


def mvu_cycles(instr, cfg):
    """Matrix-vector timing reference model for one MVU slice.

    ceil(M / (dpe_sets*dpes_per_set)) * ceil(N / (tiles*lanes)) plus the
    configured pipeline fill; `instr.mvu_m` is the row count handled by
    the executing slice.
    """
    m, n = instr.mvu_m, instr.mvu_n
    if m < 1 or n < 1:
        raise ValueError("mvu_cycles needs an instruction with an active MVU stage")
    if n > cfg.rf_depth * cfg.lanes:
        raise OversizedWorkload(
            f"matrix width {n} exceeds tile storage "
            f"({cfg.rf_depth} x {cfg.lanes} lanes)")
    return (math.ceil(m / cfg.dpes) * math.ceil(n / (cfg.tiles * cfg.lanes))
            + cfg.mvu_fill)


# --- layer catalog ----------------------------------------------------------

def _gemv(n, repeat=1):
    return [NpuInstruction(mvu_m=n, mvu_n=n, vec_len=n) for _ in range(repeat)]


def _mlp(n, layers=3):
    out = []
    for i in range(layers):
        last = i == layers - 1
        out.append(NpuInstruction(
            mvu_m=n, mvu_n=n, vec_len=n, mfu0="relu",
            ld_dest="out" if last else "wb_mvu", dep=i > 0))
    return out


def _rnn(h, steps=2):
    out = []
    for t in range(steps):
        out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                  ld_dest="wb_evrf"))
        out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h, mfu0="add",
                                  mfu1="tanh", ld_dest="wb_mvu", dep=t > 0))
    return out


def _gru(h, steps=2):
    out = []
    for t in range(steps):
        for gate in range(2):  # update and reset gates: W.x then U.h
            out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                      ld_dest="wb_evrf"))
            out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                      mfu0="add", mfu1="sigmoid",
                                      ld_dest="wb_evrf", dep=t > 0))
        out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                  ld_dest="wb_evrf"))
        out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h, mfu0="mult",
                                  mfu1="add", ld_dest="wb_evrf", dep=True))
        out.append(NpuInstruction(evrf_source=True, vec_len=h, mfu0="tanh",
                                  mfu1="mult", ld_dest="wb_mvu", dep=True))
    return out


def _lstm(h, steps=2):
    out = []
    acts = ("sigmoid", "sigmoid", "sigmoid", "tanh")  # i, f, o, g gates
    for t in range(steps):
        for act in acts:
            out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                      ld_dest="wb_evrf"))
            out.append(NpuInstruction(mvu_m=h, mvu_n=h, vec_len=h,
                                      mfu0="add", mfu1=act,
                                      ld_dest="wb_evrf", dep=t > 0))
        # c' = f o c + i o g, then h = o o tanh(c')
        out.append(NpuInstruction(evrf_source=True, vec_len=h, mfu0="mult",
                                  ld_dest="wb_evrf", dep=True))
        out.append(NpuInstruction(evrf_source=True, vec_len=h, mfu0="mult",
                                  mfu1="add", ld_dest="wb_evrf", dep=True))
        out.append(NpuInstruction(evrf_source=True, vec_len=h, mfu0="tanh",
                                  mfu1="mult", ld_dest="wb_mvu", dep=True))
    return out


_LAYERS = {"gemv": _gemv, "mlp": _mlp, "rnn": _rnn, "gru": _gru, "lstm": _lstm}

CATALOG_SIZES = (512, 1024, 1536)


def catalog():
    """Named default workloads used by the device comparison studies."""
    entries = {}
    for size in CATALOG_SIZES:
        entries[f"gemv{size}"] = [("gemv", size, {})]
        entries[f"rnn{size}"] = [("rnn", size, {"steps": 2})]
        entries[f"gru{size}"] = [("gru", size, {"steps": 2})]
        entries[f"lstm{size}"] = [("lstm", size, {"steps": 2})]
    entries["mlp1024"] = [("mlp", 1024, {"layers": 3})]
    return entries


def expand_layer(name, size, **params):
    if name not in _LAYERS:
        raise MalformedValue(f"unknown layer kind {name!r}")
    return _LAYERS[name](size, **params)


# --- workload specs ---------------------------------------------------------

@dataclass(frozen=True)
class ProbeSpec:
    kind: str = LATENCY_PROBE
    source: tuple = ("probe_src", "p0")
    count_per_dest: int = 2
    data_bytes: int = 8
    one_at_a_time: bool = True
    trace: str = "probe"
    responders: str = "echo"  # echo | stalled


@dataclass(frozen=True)
class UniformSpec:
    kind: str = RANDOM_UNIFORM
    rate: float = 0.1
    data_bytes: int = 32
    duration_cycles: int = 10_000
    total_packets: int = 0  # 0 means bounded by duration only


@dataclass(frozen=True)
class NpuTraceSpec:
    kind: str = NPU_TRACE
    cfg: NpuConfig = NpuConfig()
    threads: tuple = ()  # tuple of instruction tuples, one per thread


def workload_ops(spec):
    """Total arithmetic ops a workload performs (all NPUs, all threads)."""
    if spec.kind != NPU_TRACE:
        return 0
    per_npu = sum(instr.ops() for thread in spec.threads for instr in thread)
    return spec.cfg.count * per_npu


def generate_latency_probe(spec, interface_table):
    """Deterministic destination schedule for the probe source.

    Sweeps interface index 0 of every router in router-id order, then
    index 1, and so on; the source interface itself is skipped.  Each
    destination appears `count_per_dest` consecutive times.
    """
    by_loc = {loc: mp for mp, loc in interface_table.items()}
    if spec.source not in interface_table:
        raise MalformedValue(f"probe source {spec.source} is not placed")
    src_loc = interface_table[spec.source]
    noc_id = src_loc[0]
    max_iface = max(loc[2] for loc in by_loc if loc[0] == noc_id) + 1
    max_router = max(loc[1] for loc in by_loc if loc[0] == noc_id) + 1
    schedule = []
    for iface in range(max_iface):
        for router in range(max_router):
            mp = by_loc.get((noc_id, router, iface))
            if mp is None or mp == spec.source:
                continue
            schedule.extend([mp] * spec.count_per_dest)
    return schedule


# --- parsing ----------------------------------------------------------------

def _iter_lines(text):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line


_NPU_INT_KEYS = {
    "count", "cores", "tiles", "dpe_sets", "dpes_per_set", "lanes", "threads",
    "rf_depth", "element_bytes", "tx_data_bytes", "issue_window", "mvu_fill",
    "evrf_latency", "mfu_latency", "ld_latency",
}


def parse_workload(text):
    kind = None
    section = ""
    kv = {}
    thread_lines = {}
    for line_no, line in _iter_lines(text):
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("probe", "uniform", "npu") \
                    and not re.fullmatch(r"thread\.(\*|\d+)", section):
                raise UnknownKey(f"unknown workload section [{section}]",
                                 line_no, line)
            if section.startswith("thread."):
                thread_lines.setdefault(section[7:], [])
            continue
        if section.startswith("thread."):
            thread_lines.setdefault(section[7:], []).append((line_no, line))
            continue
        if "=" not in line:
            raise MalformedValue("expected key = value", line_no, line)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if section == "" and key == "kind":
            kind = value
            continue
        kv[(section, key)] = (value, line_no, line)

    if kind == LATENCY_PROBE:
        return _parse_probe(kv)
    if kind == RANDOM_UNIFORM:
        return _parse_uniform(kv)
    if kind == NPU_TRACE:
        return _parse_npu(kv, thread_lines)
    raise MalformedValue(f"workload kind must be one of "
                         f"{(LATENCY_PROBE, RANDOM_UNIFORM, NPU_TRACE)}, "
                         f"got {kind!r}")


def _take(kv, section, key, default, conv, allowed=None):
    entry = kv.pop((section, key), None)
    if entry is None:
        return default
    value, line_no, line = entry
    try:
        out = conv(value)
    except ValueError:
        raise MalformedValue(f"bad value for {key}", line_no, line)
    if allowed is not None and out not in allowed:
        raise MalformedValue(f"{key} must be one of {allowed}", line_no, line)
    return out


def _check_drained(kv):
    for (section, key), (_v, line_no, line) in kv.items():
        raise UnknownKey(f"unknown key {key!r} in section [{section}]",
                         line_no, line)


def _parse_bool(value):
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ValueError(value)


def _parse_port(value):
    module, _, port = value.partition(".")
    if not module or not port:
        raise ValueError(value)
    return (module, port)


def _parse_probe(kv):
    spec = ProbeSpec(
        source=_take(kv, "probe", "source", ("probe_src", "p0"), _parse_port),
        count_per_dest=_take(kv, "probe", "count_per_dest", 2, int),
        data_bytes=_take(kv, "probe", "data_bytes", 8, int),
        one_at_a_time=_take(kv, "probe", "one_at_a_time", True, _parse_bool),
        trace=_take(kv, "probe", "trace", "probe", str),
        responders=_take(kv, "probe", "responders", "echo", str,
                         allowed=("echo", "stalled")),
    )
    _check_drained(kv)
    return spec


def _parse_uniform(kv):
    spec = UniformSpec(
        rate=_take(kv, "uniform", "injection_rate", 0.1, float),
        data_bytes=_take(kv, "uniform", "data_bytes", 32, int),
        duration_cycles=_take(kv, "uniform", "duration_cycles", 10_000, int),
        total_packets=_take(kv, "uniform", "total_packets", 0, int),
    )
    _check_drained(kv)
    if not 0 < spec.rate <= 1:
        raise MalformedValue(f"injection_rate must be in (0, 1], got {spec.rate}")
    return spec


def _parse_npu(kv, thread_lines):
    fields = {}
    for key in _NPU_INT_KEYS:
        entry = kv.pop(("npu", key), None)
        if entry is not None:
            value, line_no, line = entry
            try:
                fields[key] = int(value)
            except ValueError:
                raise MalformedValue(f"bad value for {key}", line_no, line)
            if fields[key] < 1:
                raise MalformedValue(f"{key} must be >= 1", line_no, line)
    _check_drained(kv)
    cfg = NpuConfig(**fields)

    if "*" in thread_lines and len(thread_lines) > 1:
        raise MalformedValue("[thread.*] cannot be mixed with numbered threads")
    if "*" in thread_lines:
        per_thread = {t: thread_lines["*"] for t in range(cfg.threads)}
    else:
        per_thread = {int(k): v for k, v in thread_lines.items()}
        expected = set(range(cfg.threads))
        if set(per_thread) != expected:
            raise MalformedValue(
                f"threads = {cfg.threads} needs sections thread.0 .. "
                f"thread.{cfg.threads - 1} (or a single [thread.*])")

    threads = []
    for t in range(cfg.threads):
        instrs = []
        for line_no, line in per_thread[t]:
            instrs.extend(_parse_trace_line(line, line_no, cfg))
        threads.append(tuple(
            replace(instr, thread=t, seq=i) for i, instr in enumerate(instrs)))
    spec = NpuTraceSpec(cfg=cfg, threads=tuple(threads))
    for thread in spec.threads:
        for instr in thread:
            if instr.mvu_n > cfg.rf_depth * cfg.lanes:
                raise OversizedWorkload(
                    f"instruction {instr.thread}.{instr.seq}: width {instr.mvu_n} "
                    f"exceeds tile storage ({cfg.rf_depth} x {cfg.lanes})")
    return spec


def _parse_kwargs(parts, line_no, line):
    out = {}
    for part in parts:
        if "=" not in part:
            raise MalformedValue(f"expected key=value, got {part!r}", line_no, line)
        key, _, value = part.partition("=")
        try:
            out[key] = int(value)
        except ValueError:
            raise MalformedValue(f"bad value in {part!r}", line_no, line)
    return out


def _parse_trace_line(line, line_no, cfg):
    parts = line.split()
    if parts[0] == "layer":
        if len(parts) < 3:
            raise MalformedValue("layer lines need: layer <kind> <size> [k=v...]",
                                 line_no, line)
        name, size = parts[1], int(parts[2])
        kwargs = _parse_kwargs(parts[3:], line_no, line)
        repeat = kwargs.pop("repeat", 1)
        out = []
        for _ in range(repeat):
            out.extend(expand_layer(name, size, **kwargs))
        return out
    if parts[0] == "instr":
        fields = {"vec_len": 0}
        for part in parts[1:]:
            if part == "dep":
                fields["dep"] = True
                continue
            key, _, value = part.partition("=")
            if key == "mvu":
                if value == "skip":
                    fields["evrf_source"] = True
                else:
                    m, _, n = value.partition("x")
                    fields["mvu_m"], fields["mvu_n"] = int(m), int(n)
                    fields["vec_len"] = int(m)
            elif key == "vec":
                fields["vec_len"] = int(value)
            elif key in ("mfu0", "mfu1"):
                if value not in MFU_OPS:
                    raise MalformedValue(f"{key} must be one of {MFU_OPS}",
                                         line_no, line)
                fields[key] = value
            elif key == "ld":
                if value not in LD_DESTS:
                    raise MalformedValue(f"ld must be one of {LD_DESTS}",
                                         line_no, line)
                fields["ld_dest"] = value
            else:
                raise MalformedValue(f"unknown instruction field {key!r}",
                                     line_no, line)
        if fields.get("mvu_m", 0) == 0:
            fields["evrf_source"] = True
        if fields["vec_len"] == 0:
            raise MalformedValue("instruction needs mvu=MxN or vec=K",
                                 line_no, line)
        return [NpuInstruction(**fields)]
    raise MalformedValue("trace lines start with 'layer' or 'instr'",
                         line_no, line)


def serialize_workload(spec):
    if spec.kind == LATENCY_PROBE:
        return "\n".join([
            "kind = latency_probe", "[probe]",
            f"source = {spec.source[0]}.{spec.source[1]}",
            f"count_per_dest = {spec.count_per_dest}",
            f"data_bytes = {spec.data_bytes}",
            f"one_at_a_time = {str(spec.one_at_a_time).lower()}",
            f"trace = {spec.trace}",
            f"responders = {spec.responders}",
        ]) + "\n"
    raise NotImplementedError(f"no serializer for {spec.kind}")
