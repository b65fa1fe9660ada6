"""Ready-made scenario generators: architecture, placement, workload text.

These build the file triplets used by the examples in the README and by
the test suite:

* `probe_scenario()` — 4x4 mesh, two modules per router, module/adapter/
  NoC clocks at 200/800/1000 MHz; one module sends two MM transactions
  to every other module, one at a time (62 probes total).
* `npu_scenario(style, ...)` — NPU mapped onto a device:
  - `baseline`: 8x5 all-fabric mesh, soft MVU at the fabric clock.
  - `rad2`: 10x5 mesh, 8x5 fabric + 2x5 hard-block sectors, MVU slices
    hardened at 600 MHz, 4 interleaved threads.
  - `rad3`: 8x10 mesh, 8x5 fabric + 8x5 hard-block sectors, 4 NPU
    instances with hardened MVUs.

Run as a script to materialize the files: python -m radsim.scenarios OUTDIR
"""

import math

from .npu import block_name
from .workload import NpuConfig

PROBE_X = PROBE_Y = 4
PROBE_MODULES_PER_ROUTER = 2


def probe_scenario(data_bytes=8, vcs=3, stalled=False):
    """Unloaded-latency probe files: (arch text, placement text, workload text)."""
    arch = [
        "num_nocs = 1",
        "[noc.0]",
        "noc_payload_width = 128",
        "noc_freq = 1000",
        "noc_topology = mesh",
        f"noc_dim = {PROBE_X}x{PROBE_Y}",
        "noc_routing_func = dimension_order",
        f"noc_vcs = {vcs}",
        "noc_vc_buffer_size = 8",
        "noc_pipeline_depth = 4",
        "[adapter]",
        "adapter_interfaces = 2",
        "adapter_fifo_size = 16",
        "adapter_obuff_size = 2",
        "adapter_freq = 800",
        "[telemetry]",
        "num_traces = 1",
        "trace_names = probe",
    ]
    place = []
    names = []
    for r in range(PROBE_X * PROBE_Y):
        for i in range(PROBE_MODULES_PER_ROUTER):
            name = "probe_src" if (r == 0 and i == 0) else f"mod_r{r}_{i}"
            names.append(name)
            place.append(f"{name}.p0 0 {r}")
    for name in names:
        arch += [f"[module.{name}]", "module_freq = 200"]
    wkld = [
        "kind = latency_probe",
        "[probe]",
        "source = probe_src.p0",
        "count_per_dest = 2",
        f"data_bytes = {data_bytes}",
        "one_at_a_time = true",
        "trace = probe",
    ]
    if stalled:
        wkld.append("responders = stalled")
    return "\n".join(arch) + "\n", "\n".join(place) + "\n", "\n".join(wkld) + "\n"


# --- NPU-on-device scenarios --------------------------------------------------

NPU_STYLES = ("baseline", "rad2", "rad3")


def _style_params(style):
    if style == "baseline":
        return dict(x=8, y=5, asic_rows=0, count=1, threads=1, hard=False)
    if style == "rad2":
        return dict(x=10, y=5, asic_cols=2, count=1, threads=4, hard=True)
    if style == "rad3":
        return dict(x=8, y=10, asic_rows=5, count=4, threads=1, hard=True)
    raise ValueError(f"unknown NPU scenario style {style!r}")


def _sector_rows(x, y, asic_rows=0, asic_cols=0):
    rows = []
    for yy in range(y):
        if asic_rows and yy >= y - asic_rows:
            rows.append("A" * x)
        elif asic_cols:
            rows.append("F" * (x - asic_cols) + "A" * asic_cols)
        else:
            rows.append("F" * x)
    return rows


def _npu_placements(style, cfg, x, y):
    """Per-NPU block coordinates; returns {module name: router id}."""
    place = {}

    def rid(cx, cy):
        return cy * x + cx

    if style in ("baseline", "rad2"):
        # one chain row per core; the vector chain marches west of the MVU
        mvu_col = x - 2 if style == "rad2" else x - 1
        rows = (1, 3, 0, 4, 2)
        place[block_name(0, "dispatcher")] = rid(mvu_col - 4, 2)
        for c in range(cfg.cores):
            cy = rows[c]
            place[block_name(0, "mvu", c)] = rid(mvu_col, cy)
            place[block_name(0, "evrf", c)] = rid(mvu_col - 2, cy)
            place[block_name(0, "mfu0_", c)] = rid(mvu_col - 3, cy)
            place[block_name(0, "mfu1_", c)] = rid(mvu_col - 4, cy)
            place[block_name(0, "ld", c)] = rid(mvu_col - 5, cy)
    else:  # rad3: 4 NPUs, one two-column slice each; hard rows at the south
        for i in range(cfg.count):
            cx = 2 * i
            place[block_name(i, "dispatcher")] = rid(cx, 0)
            for c in range(cfg.cores):
                col = cx + (c % 2)
                place[block_name(i, "mvu", c)] = rid(col, 5)
                place[block_name(i, "evrf", c)] = rid(col, 4)
                place[block_name(i, "mfu0_", c)] = rid(col, 3)
                place[block_name(i, "mfu1_", c)] = rid(col, 2)
                place[block_name(i, "ld", c)] = rid(col, 1)
    return place


def npu_scenario(style, workload_lines=("layer gemv 1024 repeat=24",),
                 cores=2, vc_buffer_size=8, noc_freq=1500, fabric_mhz=300,
                 hard_mhz=600, vcs=3, tx_data_bytes=128):
    """NPU-on-device files for one style: (arch, placement, workload) text."""
    p = _style_params(style)
    cfg = NpuConfig(count=p["count"], cores=cores, threads=p["threads"],
                    tx_data_bytes=tx_data_bytes)
    x, y = p["x"], p["y"]
    mvu_mhz = hard_mhz if p["hard"] else fabric_mhz

    arch = [
        "num_nocs = 1",
        "[noc.0]",
        "noc_payload_width = 128",
        f"noc_freq = {noc_freq}",
        "noc_topology = mesh",
        f"noc_dim = {x}x{y}",
        "noc_routing_func = dimension_order",
        f"noc_vcs = {vcs}",
        f"noc_vc_buffer_size = {vc_buffer_size}",
        "noc_pipeline_depth = 4",
        "[adapter]",
        "adapter_interfaces = 2",
        "adapter_fifo_size = 16",
        "adapter_obuff_size = 2",
        f"adapter_freq = {4 * fabric_mhz}",
        "[sectors]",
    ]
    arch += _sector_rows(x, y, asic_rows=p.get("asic_rows", 0),
                         asic_cols=p.get("asic_cols", 0))

    placements = _npu_placements(style, cfg, x, y)
    place_lines = []
    for name, router in placements.items():
        hard = p["hard"] and "_mvu" in name
        freq = mvu_mhz if "_mvu" in name else fabric_mhz
        arch += [f"[module.{name}]", f"module_freq = {freq}",
                 f"module_kind = {'hard' if hard else 'soft'}"]
        place_lines.append(f"{name}.p0 0 {router}")

    wkld = [
        "kind = npu_trace",
        "[npu]",
        f"count = {cfg.count}",
        f"cores = {cfg.cores}",
        f"tiles = {cfg.tiles}",
        f"dpe_sets = {cfg.dpe_sets}",
        f"dpes_per_set = {cfg.dpes_per_set}",
        f"lanes = {cfg.lanes}",
        f"threads = {cfg.threads}",
        f"rf_depth = {cfg.rf_depth}",
        f"element_bytes = {cfg.element_bytes}",
        f"tx_data_bytes = {cfg.tx_data_bytes}",
        "[thread.*]",
    ]
    wkld += list(workload_lines)
    return ("\n".join(arch) + "\n", "\n".join(place_lines) + "\n",
            "\n".join(wkld) + "\n")


def write_scenario(out_dir, stem, texts):
    import os

    os.makedirs(out_dir, exist_ok=True)
    arch, place, wkld = texts
    paths = {}
    for suffix, text in (("radarch", arch), ("place", place), ("wkld", wkld)):
        path = os.path.join(out_dir, f"{stem}.{suffix}")
        with open(path, "w") as fh:
            fh.write(text)
        paths[suffix] = path
    return paths


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description="materialize example scenarios")
    parser.add_argument("out_dir")
    args = parser.parse_args(argv)
    write_scenario(args.out_dir, "probe", probe_scenario())
    for style in NPU_STYLES:
        write_scenario(args.out_dir, f"npu_{style}", npu_scenario(style))
    print(f"wrote scenarios to {args.out_dir}")


if __name__ == "__main__":
    main()
