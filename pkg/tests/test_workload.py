import math

import pytest

from oracles import lstm_layer_ops, mac_schedule_cycles
from radsim.errors import MalformedValue, OversizedWorkload, UnknownKey
from radsim.scenarios import probe_scenario
from radsim.workload import (
    CATALOG_SIZES, NpuConfig, NpuInstruction, catalog, expand_layer,
    generate_latency_probe, mvu_cycles, parse_workload, workload_ops,
)
from radsim import config


def _cfg(**kw):
    return NpuConfig(**kw)


def test_mvu_cycles_single_mac():
    cfg = _cfg(cores=1, tiles=1, dpe_sets=1, dpes_per_set=1, lanes=1, mvu_fill=0)
    instr = NpuInstruction(mvu_m=1, mvu_n=1, vec_len=1)
    assert mvu_cycles(instr, cfg) == 1


def test_mvu_cycles_reference_case():
    # 1 core, 7 tiles, 40 DPEs, 40 lanes on a 1024x1024 product
    cfg = _cfg(cores=1, tiles=7, dpe_sets=1, dpes_per_set=40, lanes=40,
               mvu_fill=0)
    instr = NpuInstruction(mvu_m=1024, mvu_n=1024, vec_len=1024)
    assert mvu_cycles(instr, cfg) == 26 * 4 == 104
    assert mvu_cycles(instr, cfg) == mac_schedule_cycles(1024, 1024, 7, 40, 40)


@pytest.mark.parametrize("m,n", [(37, 111), (512, 512), (1000, 1500), (1, 280)])
def test_mvu_cycles_matches_lane_occupancy_oracle(m, n):
    cfg = _cfg(cores=1, tiles=7, dpe_sets=1, dpes_per_set=40, lanes=40,
               mvu_fill=0)
    instr = NpuInstruction(mvu_m=m, mvu_n=n, vec_len=m)
    assert mvu_cycles(instr, cfg) == mac_schedule_cycles(n=n, m=m, tiles=7,
                                                         dpes=40, lanes=40)


def test_mvu_cycles_fill_added():
    cfg = _cfg(cores=1, tiles=7, dpe_sets=1, dpes_per_set=40, lanes=40,
               mvu_fill=8)
    instr = NpuInstruction(mvu_m=1024, mvu_n=1024, vec_len=1024)
    assert mvu_cycles(instr, cfg) == 104 + 8


def test_doubling_tiles_halves_column_factor():
    instr = NpuInstruction(mvu_m=4000, mvu_n=11200, vec_len=4000)
    base = mvu_cycles(instr, _cfg(tiles=7, dpe_sets=1, dpes_per_set=40,
                                  lanes=40, mvu_fill=0, rf_depth=512))
    double = mvu_cycles(instr, _cfg(tiles=14, dpe_sets=1, dpes_per_set=40,
                                    lanes=40, mvu_fill=0, rf_depth=512))
    assert double * 2 == base


def test_mvu_oversized_workload():
    cfg = _cfg(rf_depth=4, lanes=2)
    instr = NpuInstruction(mvu_m=4, mvu_n=9, vec_len=4)
    with pytest.raises(OversizedWorkload):
        mvu_cycles(instr, cfg)


def test_peak_bound_arithmetic():
    cfg = _cfg(cores=2, tiles=7, dpe_sets=1, dpes_per_set=40, lanes=40)
    assert cfg.peak_macs_per_cycle() == 2 * 7 * 40 * 40
    assert cfg.peak_tops(300) == pytest.approx(13.44)
    assert cfg.peak_tops(600) == pytest.approx(26.88)


# --- ops accounting -----------------------------------------------------------

def test_gemv_ops():
    spec = parse_workload("""
kind = npu_trace
[npu]
threads = 1
[thread.0]
layer gemv 1024
""")
    assert workload_ops(spec) == 2 * 1024 * 1024


def test_empty_trace_zero_ops():
    spec = parse_workload("""
kind = npu_trace
[npu]
threads = 1
[thread.0]
""")
    assert workload_ops(spec) == 0


@pytest.mark.parametrize("h", [64, 512, 1024])
def test_lstm_expansion_matches_cell_oracle(h):
    spec = parse_workload(f"""
kind = npu_trace
[npu]
threads = 1
rf_depth = 1536
[thread.0]
layer lstm {h} steps=3
""")
    assert workload_ops(spec) == lstm_layer_ops(h, steps=3)


def test_ops_scale_with_threads_and_count():
    base = parse_workload("""
kind = npu_trace
[npu]
threads = 1
[thread.*]
layer gemv 512
""")
    quad = parse_workload("""
kind = npu_trace
[npu]
count = 2
threads = 2
[thread.*]
layer gemv 512
""")
    assert workload_ops(quad) == 4 * workload_ops(base)


def test_layer_catalog_contents():
    entries = catalog()
    for size in CATALOG_SIZES:
        for family in ("gemv", "rnn", "gru", "lstm"):
            assert f"{family}{size}" in entries
    assert "mlp1024" in entries


def test_mlp_expansion_chains_dependencies():
    instrs = expand_layer("mlp", 256, layers=3)
    assert len(instrs) == 3
    assert [i.dep for i in instrs] == [False, True, True]
    assert instrs[0].ld_dest == "wb_mvu"
    assert instrs[-1].ld_dest == "out"


def test_instruction_seq_numbers_assigned():
    spec = parse_workload("""
kind = npu_trace
[npu]
threads = 2
[thread.*]
layer gemv 512 repeat=3
""")
    assert len(spec.threads) == 2
    for t, thread in enumerate(spec.threads):
        assert [i.seq for i in thread] == [0, 1, 2]
        assert all(i.thread == t for i in thread)


def test_oversized_instruction_rejected_at_parse():
    with pytest.raises(OversizedWorkload):
        parse_workload("""
kind = npu_trace
[npu]
threads = 1
rf_depth = 4
lanes = 2
[thread.0]
instr mvu=4x9
""")


def test_thread_sections_must_match_count():
    with pytest.raises(MalformedValue):
        parse_workload("""
kind = npu_trace
[npu]
threads = 2
[thread.0]
layer gemv 512
""")


def test_unknown_workload_key_rejected():
    with pytest.raises(UnknownKey):
        parse_workload("kind = latency_probe\n[probe]\nbogus = 1\n")


def test_explicit_instruction_grammar():
    spec = parse_workload("""
kind = npu_trace
[npu]
threads = 1
[thread.0]
instr mvu=512x256 mfu0=relu mfu1=tanh ld=wb_evrf dep
instr mvu=skip vec=128 mfu0=mult
""")
    a, b = spec.threads[0]
    assert (a.mvu_m, a.mvu_n, a.vec_len) == (512, 256, 512)
    assert a.mfu0 == "relu" and a.mfu1 == "tanh"
    assert a.ld_dest == "wb_evrf" and a.dep
    assert b.evrf_source and b.vec_len == 128
    assert a.ops() == 2 * 512 * 256 + 512 + 512
    assert b.ops() == 128


# --- latency probe schedule ---------------------------------------------------

def _probe_table():
    arch_t, place_t, wkld_t = probe_scenario()
    arch = config.parse_architecture(arch_t)
    placement = config.parse_placement(place_t, arch)
    return parse_workload(wkld_t), placement.interface_table()


def test_probe_schedule_has_62_transactions():
    spec, table = _probe_table()
    schedule = generate_latency_probe(spec, table)
    assert len(schedule) == 62
    assert ("probe_src", "p0") not in schedule


def test_probe_schedule_orders_first_interfaces_then_second():
    spec, table = _probe_table()
    schedule = generate_latency_probe(spec, table)
    # first 30 destinations (15 routers x 2) are interface 0 of routers 1..15
    first_leg = schedule[:30]
    assert all(table[d][2] == 0 for d in first_leg)
    routers = [table[d][1] for d in first_leg[::2]]
    assert routers == list(range(1, 16))
    second_leg = schedule[30:]
    assert all(table[d][2] == 1 for d in second_leg)
    assert [table[d][1] for d in second_leg[::2]] == list(range(16))


def test_probe_schedule_deterministic():
    spec, table = _probe_table()
    assert generate_latency_probe(spec, table) == \
        generate_latency_probe(spec, table)


def test_probe_single_destination():
    spec, table = _probe_table()
    small = {("probe_src", "p0"): table[("probe_src", "p0")],
             ("mod_r1_0", "p0"): table[("mod_r1_0", "p0")]}
    schedule = generate_latency_probe(spec, small)
    assert schedule == [("mod_r1_0", "p0")] * 2
