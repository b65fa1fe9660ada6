"""Device description files: architecture (.radarch), placement (.place).

The architecture grammar is flat `key = value` lines grouped by
`[section]` headers; `#` starts a comment.  Sections: optional global
keys before any header, `[noc.<i>]`, `[adapter]`, `[module.<name>]`,
`[sectors]` / `[sectors.<i>]` (one row of F/A characters per line,
F = fabric sector, A = hard-block sector), and `[telemetry]`.

Placement files are one entry per line: `module.port noc_id router_id`.
Interface indices on a router follow file order.
"""

from dataclasses import dataclass, field, replace

from .errors import (
    DuplicatePort,
    MalformedValue,
    MissingRequiredKey,
    OversubscribedRouter,
    RouterOutOfRange,
    UnknownKey,
)
from .topology import DIMENSION_ORDER, MESH, MINIMAL_ADAPTIVE, TORUS, NocTopology

# Encoding limits (flit header packs source/destination into 16 bits)
MAX_ROUTERS = 256
MAX_INTERFACES = 16
MAX_NOCS = 16
MAX_VCS = 8

VC_CLASSES = ("stream", "mm_req", "mm_resp")
ARBITERS = ("round_robin",)

FPGA_SECTOR = "F"
ASIC_SECTOR = "A"


@dataclass(frozen=True)
class NocConfig:
    payload_width: int = 128
    freq_mhz: int = 0
    topology: NocTopology = NocTopology()
    vcs: int = 3
    vc_buffer_size: int = 8
    pipeline_depth: int = 4


@dataclass(frozen=True)
class AdapterConfig:
    interfaces: int = 2
    fifo_size: int = 16
    obuff_size: int = 2
    in_arbiter: str = "round_robin"
    out_arbiter: str = "round_robin"
    vc_mapping: tuple = (("stream", 0), ("mm_req", 1), ("mm_resp", 2))
    freq_mhz: int = 0
    max_tx_bytes: int = 8192

    def vc_of(self, vc_class):
        return dict(self.vc_mapping)[vc_class]


@dataclass(frozen=True)
class ModuleConfig:
    freq_mhz: int
    kind: str = "soft"  # soft -> fpga sector, hard -> asic sector


@dataclass(frozen=True)
class TelemetryConfig:
    num_traces: int = 0
    trace_names: tuple = ()


@dataclass(frozen=True)
class RadArchitecture:
    num_nocs: int = 1
    nocs: tuple = ()
    adapter: AdapterConfig = AdapterConfig()
    modules: dict = field(default_factory=dict)
    sectors: dict = field(default_factory=dict)  # noc id -> tuple of row strings
    telemetry: TelemetryConfig = TelemetryConfig()

    def sector_kind(self, noc_id, router):
        """'F' or 'A' for the sector holding `router`; defaults to fabric."""
        rows = self.sectors.get(noc_id)
        if rows is None:
            return FPGA_SECTOR
        topo = self.nocs[noc_id].topology
        x, y = router % topo.x, router // topo.x
        return rows[y][x]


@dataclass(frozen=True)
class PlacementMap:
    """Assignment of (module, port) pairs to (noc, router) positions."""

    entries: dict  # (module, port) -> (noc_id, router_id), insertion ordered

    def interfaces_of_router(self, noc_id, router):
        return [mp for mp, loc in self.entries.items() if loc == (noc_id, router)]

    def interface_table(self):
        """(module, port) -> (noc, router, interface index), file order."""
        counters = {}
        table = {}
        for mp, (noc_id, router) in self.entries.items():
            idx = counters.get((noc_id, router), 0)
            counters[(noc_id, router)] = idx + 1
            table[mp] = (noc_id, router, idx)
        return table


# --- architecture parsing ---------------------------------------------------

_REQUIRED_NOC = ("noc_freq", "noc_dim")
_NOC_KEYS = {
    "noc_payload_width", "noc_freq", "noc_topology", "noc_dim",
    "noc_routing_func", "noc_vcs", "noc_vc_buffer_size", "noc_pipeline_depth",
}
_ADAPTER_KEYS = {
    "adapter_interfaces", "adapter_fifo_size", "adapter_obuff_size",
    "adapter_in_arbiter", "adapter_out_arbiter", "adapter_vc_mapping",
    "adapter_freq", "adapter_max_tx_bytes",
}
_MODULE_KEYS = {"module_freq", "module_kind"}
_TELEMETRY_KEYS = {"num_traces", "trace_names"}
_GLOBAL_KEYS = {"num_nocs"}

_ROUTING_ALIASES = {
    "dimension_order": DIMENSION_ORDER,
    "xy": DIMENSION_ORDER,
    "minimal_adaptive": MINIMAL_ADAPTIVE,
    "min_hops": MINIMAL_ADAPTIVE,
}


def _positive_int(raw, key, line_no, line):
    try:
        value = int(raw)
    except ValueError:
        raise MalformedValue(f"{key} expects an integer, got {raw!r}", line_no, line)
    if value <= 0:
        raise MalformedValue(f"{key} must be positive, got {value}", line_no, line)
    return value


def _nonneg_int(raw, key, line_no, line):
    try:
        value = int(raw)
    except ValueError:
        raise MalformedValue(f"{key} expects an integer, got {raw!r}", line_no, line)
    if value < 0:
        raise MalformedValue(f"{key} must be >= 0, got {value}", line_no, line)
    return value


def _parse_dim(raw, line_no, line):
    parts = raw.lower().split("x")
    if len(parts) != 2:
        raise MalformedValue(f"noc_dim expects XxY, got {raw!r}", line_no, line)
    x = _positive_int(parts[0], "noc_dim", line_no, line)
    y = _positive_int(parts[1], "noc_dim", line_no, line)
    return x, y


def _parse_vc_mapping(raw, line_no, line):
    mapping = {}
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise MalformedValue(f"vc mapping entry {item!r} expects class:vc", line_no, line)
        cls, _, vc = item.partition(":")
        cls = cls.strip()
        if cls not in VC_CLASSES:
            raise MalformedValue(
                f"unknown transaction class {cls!r} (expected one of {VC_CLASSES})",
                line_no, line)
        mapping[cls] = _nonneg_int(vc.strip(), "adapter_vc_mapping", line_no, line)
    for cls in VC_CLASSES:
        if cls not in mapping:
            raise MalformedValue(f"vc mapping is missing class {cls!r}", line_no, line)
    return tuple((cls, mapping[cls]) for cls in VC_CLASSES)


def _iter_lines(text):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line


def parse_architecture(text):
    """Parse an architecture description; unknown keys are rejected."""
    section = ""
    global_kv = {}
    noc_kv = {}       # noc id -> {key: (value, line_no, line)}
    adapter_kv = {}
    module_kv = {}    # name -> {key: ...}
    telemetry_kv = {}
    sector_rows = {}  # noc id -> [rows]

    for line_no, line in _iter_lines(text):
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section == "adapter" or section == "telemetry" or section == "sectors":
                pass
            elif section.startswith("noc."):
                try:
                    int(section[4:])
                except ValueError:
                    raise MalformedValue(f"bad noc section {section!r}", line_no, line)
            elif section.startswith("module.") and len(section) > 7:
                pass
            elif section.startswith("sectors."):
                try:
                    int(section[8:])
                except ValueError:
                    raise MalformedValue(f"bad sectors section {section!r}", line_no, line)
            else:
                raise UnknownKey(f"unknown section [{section}]", line_no, line)
            continue

        if section == "sectors" or section.startswith("sectors."):
            row = line.upper()
            if any(c not in (FPGA_SECTOR, ASIC_SECTOR) for c in row):
                raise MalformedValue("sector rows may contain only F or A", line_no, line)
            noc_id = 0 if section == "sectors" else int(section[8:])
            sector_rows.setdefault(noc_id, []).append(row)
            continue

        if "=" not in line:
            raise MalformedValue("expected key = value", line_no, line)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        entry = (value, line_no, line)

        if section == "":
            if key not in _GLOBAL_KEYS:
                raise UnknownKey(f"unknown global key {key!r}", line_no, line)
            global_kv[key] = entry
        elif section.startswith("noc."):
            if key not in _NOC_KEYS:
                raise UnknownKey(f"unknown NoC key {key!r}", line_no, line)
            noc_kv.setdefault(int(section[4:]), {})[key] = entry
        elif section == "adapter":
            if key not in _ADAPTER_KEYS:
                raise UnknownKey(f"unknown adapter key {key!r}", line_no, line)
            adapter_kv[key] = entry
        elif section.startswith("module."):
            if key not in _MODULE_KEYS:
                raise UnknownKey(f"unknown module key {key!r}", line_no, line)
            module_kv.setdefault(section[7:], {})[key] = entry
        elif section == "telemetry":
            if key not in _TELEMETRY_KEYS:
                raise UnknownKey(f"unknown telemetry key {key!r}", line_no, line)
            telemetry_kv[key] = entry
        else:
            raise UnknownKey(f"key {key!r} outside any known section", line_no, line)

    return _assemble(global_kv, noc_kv, adapter_kv, module_kv, telemetry_kv, sector_rows)


def _assemble(global_kv, noc_kv, adapter_kv, module_kv, telemetry_kv, sector_rows):
    num_nocs = 1
    if "num_nocs" in global_kv:
        num_nocs = _positive_int(global_kv["num_nocs"][0], "num_nocs",
                                 global_kv["num_nocs"][1], global_kv["num_nocs"][2])
    if num_nocs > MAX_NOCS:
        raise MalformedValue(f"num_nocs {num_nocs} exceeds limit {MAX_NOCS}")

    for noc_id in noc_kv:
        if not 0 <= noc_id < num_nocs:
            raise MalformedValue(f"section [noc.{noc_id}] but num_nocs = {num_nocs}")

    nocs = []
    for noc_id in range(num_nocs):
        kv = noc_kv.get(noc_id, {})
        for req in _REQUIRED_NOC:
            if req not in kv:
                raise MissingRequiredKey(f"[noc.{noc_id}] is missing {req}")

        def get(key, parse, default=None):
            if key not in kv:
                return default
            value, line_no, line = kv[key]
            return parse(value, key, line_no, line)

        width = get("noc_payload_width", _positive_int, 128)
        if width < 128 or width % 64:
            value, line_no, line = kv["noc_payload_width"]
            raise MalformedValue(
                "noc_payload_width must be a multiple of 64 and >= 128", line_no, line)
        freq = get("noc_freq", _positive_int)
        dim_raw, dim_ln, dim_line = kv["noc_dim"]
        x, y = _parse_dim(dim_raw, dim_ln, dim_line)
        if x * y > MAX_ROUTERS:
            raise MalformedValue(f"{x}x{y} exceeds {MAX_ROUTERS} routers", dim_ln, dim_line)

        kind = MESH
        if "noc_topology" in kv:
            value, line_no, line = kv["noc_topology"]
            if value not in (MESH, TORUS):
                raise MalformedValue(f"noc_topology must be mesh or torus, got {value!r}",
                                     line_no, line)
            kind = value
        routing = DIMENSION_ORDER
        if "noc_routing_func" in kv:
            value, line_no, line = kv["noc_routing_func"]
            if value not in _ROUTING_ALIASES:
                raise MalformedValue(
                    f"noc_routing_func must be one of {sorted(_ROUTING_ALIASES)}",
                    line_no, line)
            routing = _ROUTING_ALIASES[value]

        vcs = get("noc_vcs", _positive_int, 3)
        if vcs > MAX_VCS:
            value, line_no, line = kv["noc_vcs"]
            raise MalformedValue(f"noc_vcs {vcs} exceeds limit {MAX_VCS}", line_no, line)
        nocs.append(NocConfig(
            payload_width=width,
            freq_mhz=freq,
            topology=NocTopology(kind=kind, x=x, y=y, routing=routing),
            vcs=vcs,
            vc_buffer_size=get("noc_vc_buffer_size", _positive_int, 8),
            pipeline_depth=get("noc_pipeline_depth", _positive_int, 4),
        ))

    adapter = AdapterConfig()
    if adapter_kv:
        def aget(key, parse, default):
            if key not in adapter_kv:
                return default
            value, line_no, line = adapter_kv[key]
            return parse(value, key, line_no, line)

        def arbiter(value, key, line_no, line):
            if value not in ARBITERS:
                raise MalformedValue(f"{key} must be one of {ARBITERS}", line_no, line)
            return value

        mapping = AdapterConfig().vc_mapping
        if "adapter_vc_mapping" in adapter_kv:
            value, line_no, line = adapter_kv["adapter_vc_mapping"]
            mapping = _parse_vc_mapping(value, line_no, line)
        adapter = AdapterConfig(
            interfaces=aget("adapter_interfaces", _positive_int, 2),
            fifo_size=aget("adapter_fifo_size", _positive_int, 16),
            obuff_size=aget("adapter_obuff_size", _positive_int, 2),
            in_arbiter=aget("adapter_in_arbiter", arbiter, "round_robin"),
            out_arbiter=aget("adapter_out_arbiter", arbiter, "round_robin"),
            vc_mapping=mapping,
            freq_mhz=aget("adapter_freq", _positive_int, 0),
            max_tx_bytes=aget("adapter_max_tx_bytes", _positive_int, 8192),
        )
    if adapter.interfaces > MAX_INTERFACES:
        raise MalformedValue(f"adapter_interfaces exceeds limit {MAX_INTERFACES}")
    if adapter.freq_mhz <= 0:
        raise MissingRequiredKey("[adapter] is missing adapter_freq")

    modules = {}
    for name, kv in module_kv.items():
        if "module_freq" not in kv:
            raise MissingRequiredKey(f"[module.{name}] is missing module_freq")
        value, line_no, line = kv["module_freq"]
        freq = _positive_int(value, "module_freq", line_no, line)
        kind = "soft"
        if "module_kind" in kv:
            value, line_no, line = kv["module_kind"]
            if value not in ("soft", "hard"):
                raise MalformedValue("module_kind must be soft or hard", line_no, line)
            kind = value
        modules[name] = ModuleConfig(freq_mhz=freq, kind=kind)

    telemetry = TelemetryConfig()
    if telemetry_kv:
        num = 0
        if "num_traces" in telemetry_kv:
            value, line_no, line = telemetry_kv["num_traces"]
            num = _nonneg_int(value, "num_traces", line_no, line)
        names = ()
        if "trace_names" in telemetry_kv:
            value, _, _ = telemetry_kv["trace_names"]
            names = tuple(n.strip() for n in value.split(",") if n.strip())
        telemetry = TelemetryConfig(num_traces=num, trace_names=names)

    sectors = {noc_id: tuple(rows) for noc_id, rows in sector_rows.items()}
    return RadArchitecture(
        num_nocs=num_nocs,
        nocs=tuple(nocs),
        adapter=adapter,
        modules=modules,
        sectors=sectors,
        telemetry=telemetry,
    )


def serialize_architecture(arch):
    """Emit text that parses back to an equal RadArchitecture."""
    out = [f"num_nocs = {arch.num_nocs}"]
    for i, noc in enumerate(arch.nocs):
        topo = noc.topology
        out += [
            f"[noc.{i}]",
            f"noc_payload_width = {noc.payload_width}",
            f"noc_freq = {noc.freq_mhz}",
            f"noc_topology = {topo.kind}",
            f"noc_dim = {topo.x}x{topo.y}",
            f"noc_routing_func = {topo.routing}",
            f"noc_vcs = {noc.vcs}",
            f"noc_vc_buffer_size = {noc.vc_buffer_size}",
            f"noc_pipeline_depth = {noc.pipeline_depth}",
        ]
    a = arch.adapter
    mapping = ",".join(f"{cls}:{vc}" for cls, vc in a.vc_mapping)
    out += [
        "[adapter]",
        f"adapter_interfaces = {a.interfaces}",
        f"adapter_fifo_size = {a.fifo_size}",
        f"adapter_obuff_size = {a.obuff_size}",
        f"adapter_in_arbiter = {a.in_arbiter}",
        f"adapter_out_arbiter = {a.out_arbiter}",
        f"adapter_vc_mapping = {mapping}",
        f"adapter_freq = {a.freq_mhz}",
        f"adapter_max_tx_bytes = {a.max_tx_bytes}",
    ]
    for name, mod in arch.modules.items():
        out += [
            f"[module.{name}]",
            f"module_freq = {mod.freq_mhz}",
            f"module_kind = {mod.kind}",
        ]
    for noc_id, rows in arch.sectors.items():
        out.append(f"[sectors.{noc_id}]")
        out.extend(rows)
    t = arch.telemetry
    out += ["[telemetry]", f"num_traces = {t.num_traces}"]
    if t.trace_names:
        out.append(f"trace_names = {','.join(t.trace_names)}")
    return "\n".join(out) + "\n"


# --- placement --------------------------------------------------------------

def parse_placement(text, arch):
    """Parse `module.port noc_id router_id` lines into a PlacementMap."""
    entries = {}
    per_router = {}
    for line_no, line in _iter_lines(text):
        parts = line.split()
        if len(parts) != 3 or "." not in parts[0]:
            raise MalformedValue("expected 'module.port noc_id router_id'", line_no, line)
        module, _, port = parts[0].partition(".")
        noc_id = _nonneg_int(parts[1], "noc_id", line_no, line)
        router = _nonneg_int(parts[2], "router_id", line_no, line)
        if noc_id >= arch.num_nocs:
            raise RouterOutOfRange(f"noc {noc_id} does not exist", line_no, line)
        limit = arch.nocs[noc_id].topology.num_routers
        if router >= limit:
            raise RouterOutOfRange(
                f"router {router} outside 0..{limit - 1} on noc {noc_id}", line_no, line)
        key = (module, port)
        if key in entries:
            raise DuplicatePort(f"{module}.{port} placed twice", line_no, line)
        entries[key] = (noc_id, router)
        count = per_router.get((noc_id, router), 0) + 1
        if count > arch.adapter.interfaces:
            raise OversubscribedRouter(
                f"router {router} on noc {noc_id} exceeds "
                f"{arch.adapter.interfaces} interfaces", line_no, line)
        per_router[(noc_id, router)] = count
    return PlacementMap(entries=entries)


def serialize_placement(placement):
    lines = [f"{m}.{p} {noc_id} {router}"
             for (m, p), (noc_id, router) in placement.entries.items()]
    return "\n".join(lines) + "\n"


# --- cross validation -------------------------------------------------------

def validate(arch, placement):
    """Cross-check an architecture and placement; empty list means simulatable."""
    diags = []
    for noc_id, rows in arch.sectors.items():
        if noc_id >= arch.num_nocs:
            diags.append(f"sectors given for nonexistent noc {noc_id}")
            continue
        topo = arch.nocs[noc_id].topology
        if len(rows) != topo.y or any(len(r) != topo.x for r in rows):
            diags.append(
                f"noc {noc_id}: sector grid is not {topo.x}x{topo.y} "
                f"(got {[len(r) for r in rows]} columns over {len(rows)} rows)")

    for noc_id, noc in enumerate(arch.nocs):
        for cls, vc in arch.adapter.vc_mapping:
            if vc >= noc.vcs:
                diags.append(
                    f"vc mapping sends {cls} to VC {vc} but noc {noc_id} has "
                    f"only {noc.vcs} VCs (0-indexed)")

    t = arch.telemetry
    if len(t.trace_names) != t.num_traces:
        diags.append(
            f"num_traces = {t.num_traces} but {len(t.trace_names)} trace_names given")

    placed_modules = {m for (m, _p) in placement.entries.keys()}
    for name in arch.modules:
        if name not in placed_modules:
            diags.append(f"module {name} declared but has no placed ports")
    for (module, port), (noc_id, router) in placement.entries.items():
        cfg = arch.modules.get(module)
        if cfg is None:
            diags.append(f"{module}.{port} placed but module {module} not declared")
            continue
        sector = arch.sector_kind(noc_id, router)
        if cfg.kind == "hard" and sector != ASIC_SECTOR:
            diags.append(
                f"hard module {module} placed on fpga sector (noc {noc_id} router {router})")
        if cfg.kind == "soft" and sector != FPGA_SECTOR:
            diags.append(
                f"soft module {module} placed on asic sector (noc {noc_id} router {router})")
    return diags


# --- FPGA-to-ASIC area estimation -------------------------------------------

@dataclass(frozen=True)
class AreaComposition:
    """Area mix of a circuit on FPGA and per-class FPGA-to-ASIC shrink ratios."""

    fractions: dict   # resource class -> fraction of FPGA area
    scaling: dict     # resource class -> FPGA/ASIC area ratio (>= 1)
    fpga_sectors: float

    def __post_init__(self):
        total = sum(self.fractions.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"area fractions sum to {total}, expected 1")
        for cls, ratio in self.scaling.items():
            if ratio < 1:
                raise ValueError(f"scaling ratio for {cls} must be >= 1, got {ratio}")
        missing = set(self.fractions) - set(self.scaling)
        if missing:
            raise ValueError(f"no scaling ratio for {sorted(missing)}")


def estimate_asic_area(composition):
    """Equivalent-sector ASIC footprint via composition-weighted shrink."""
    shrunk = sum(frac / composition.scaling[cls]
                 for cls, frac in composition.fractions.items())
    return composition.fpga_sectors * shrunk


def apply_override(arch, key, value):
    """Apply one `key=value` override onto a parsed architecture.

    Accepted keys: bare Table-style names (`noc_vc_buffer_size`, applied to
    every NoC; `adapter_fifo_size`; `num_traces`), section-qualified NoC keys
    (`noc.1.noc_freq`), and module keys (`module.<name>.module_freq`).
    """
    if key.startswith("noc.") and key.count(".") >= 2:
        _, noc_id, noc_key = key.split(".", 2)
        return _override_noc(arch, int(noc_id), noc_key, value)
    if key.startswith("module.") and key.count(".") >= 2:
        _, name, mod_key = key.split(".", 2)
        if name not in arch.modules:
            raise UnknownKey(f"override for unknown module {name!r}")
        if mod_key == "module_freq":
            mod = replace(arch.modules[name], freq_mhz=_positive_int(value, key, None, None))
        elif mod_key == "module_kind":
            if value not in ("soft", "hard"):
                raise MalformedValue("module_kind must be soft or hard")
            mod = replace(arch.modules[name], kind=value)
        else:
            raise UnknownKey(f"unknown module override key {mod_key!r}")
        modules = dict(arch.modules)
        modules[name] = mod
        return replace(arch, modules=modules)
    if key in _NOC_KEYS:
        out = arch
        for noc_id in range(arch.num_nocs):
            out = _override_noc(out, noc_id, key, value)
        return out
    if key in _ADAPTER_KEYS:
        text_key = key[len("adapter_"):]
        if key == "adapter_vc_mapping":
            mapping = _parse_vc_mapping(value, None, None)
            adapter = replace(arch.adapter, vc_mapping=mapping)
        elif key in ("adapter_in_arbiter", "adapter_out_arbiter"):
            if value not in ARBITERS:
                raise MalformedValue(f"{key} must be one of {ARBITERS}")
            adapter = replace(arch.adapter, **{
                "in_arbiter" if key.endswith("in_arbiter") else "out_arbiter": value})
        else:
            attr = {"adapter_interfaces": "interfaces", "adapter_fifo_size": "fifo_size",
                    "adapter_obuff_size": "obuff_size", "adapter_freq": "freq_mhz",
                    "adapter_max_tx_bytes": "max_tx_bytes"}[key]
            adapter = replace(arch.adapter, **{attr: _positive_int(value, key, None, None)})
        return replace(arch, adapter=adapter)
    if key in _TELEMETRY_KEYS:
        if key == "num_traces":
            tel = replace(arch.telemetry, num_traces=_nonneg_int(value, key, None, None))
        else:
            names = tuple(n.strip() for n in value.split(",") if n.strip())
            tel = replace(arch.telemetry, trace_names=names)
        return replace(arch, telemetry=tel)
    raise UnknownKey(f"override references unknown key {key!r}")


def _override_noc(arch, noc_id, key, value):
    if not 0 <= noc_id < arch.num_nocs:
        raise UnknownKey(f"override for nonexistent noc {noc_id}")
    if key not in _NOC_KEYS:
        raise UnknownKey(f"unknown NoC override key {key!r}")
    noc = arch.nocs[noc_id]
    if key == "noc_dim":
        x, y = _parse_dim(value, None, None)
        noc = replace(noc, topology=replace(noc.topology, x=x, y=y))
    elif key == "noc_topology":
        if value not in (MESH, TORUS):
            raise MalformedValue("noc_topology must be mesh or torus")
        noc = replace(noc, topology=replace(noc.topology, kind=value))
    elif key == "noc_routing_func":
        if value not in _ROUTING_ALIASES:
            raise MalformedValue(f"noc_routing_func must be one of {sorted(_ROUTING_ALIASES)}")
        noc = replace(noc, topology=replace(noc.topology, routing=_ROUTING_ALIASES[value]))
    else:
        attr = {"noc_payload_width": "payload_width", "noc_freq": "freq_mhz",
                "noc_vcs": "vcs", "noc_vc_buffer_size": "vc_buffer_size",
                "noc_pipeline_depth": "pipeline_depth"}[key]
        noc = replace(noc, **{attr: _positive_int(value, key, None, None)})
    nocs = list(arch.nocs)
    nocs[noc_id] = noc
    return replace(arch, nocs=tuple(nocs))
