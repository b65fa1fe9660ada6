import math

import pytest
from hypothesis import given, strategies as st

from radsim import config
from radsim.errors import (
    DuplicatePort, MalformedValue, MissingRequiredKey, OversubscribedRouter,
    RouterOutOfRange, UnknownKey,
)

MINIMAL = """
[noc.0]
noc_freq = 1000
noc_dim = 4x4
[adapter]
adapter_freq = 800
"""


def test_defaults_applied():
    arch = config.parse_architecture(MINIMAL)
    noc = arch.nocs[0]
    assert noc.payload_width == 128
    assert noc.vcs == 3
    assert noc.vc_buffer_size == 8
    assert noc.pipeline_depth == 4
    assert noc.topology.kind == "mesh"
    assert arch.adapter.interfaces == 2
    assert arch.adapter.fifo_size == 16
    assert arch.adapter.obuff_size == 2
    assert arch.adapter.vc_of("stream") == 0
    assert arch.adapter.vc_of("mm_req") == 1
    assert arch.adapter.vc_of("mm_resp") == 2
    assert arch.telemetry.num_traces == 0


def test_parse_vc_keys():
    arch = config.parse_architecture(MINIMAL + "\n".join([
        "[noc.0]", "noc_vcs = 3", "noc_vc_buffer_size = 8"]))
    assert arch.nocs[0].vcs == 3
    assert arch.nocs[0].vc_buffer_size == 8


def test_parse_ten_by_five_mesh():
    text = MINIMAL.replace("noc_dim = 4x4", "noc_dim = 10x5")
    arch = config.parse_architecture(text)
    assert arch.nocs[0].topology.num_routers == 50


def test_zero_vcs_rejected():
    with pytest.raises(MalformedValue):
        config.parse_architecture(MINIMAL + "[noc.0]\nnoc_vcs = 0")


def test_unknown_key_rejected_with_line():
    text = MINIMAL + "[noc.0]\nnoc_bogus = 1"
    with pytest.raises(UnknownKey) as err:
        config.parse_architecture(text)
    assert "noc_bogus" in str(err.value)
    assert "line" in str(err.value)


def test_missing_required_key():
    with pytest.raises(MissingRequiredKey):
        config.parse_architecture("[noc.0]\nnoc_dim = 2x2\n[adapter]\nadapter_freq = 800")
    with pytest.raises(MissingRequiredKey):
        config.parse_architecture("[noc.0]\nnoc_freq = 1000\nnoc_dim = 2x2")


def test_malformed_frequency():
    with pytest.raises(MalformedValue):
        config.parse_architecture(MINIMAL.replace("noc_freq = 1000",
                                                  "noc_freq = fast"))


def test_comments_and_blank_lines():
    text = "# device\n\n" + MINIMAL + "# trailing\n"
    arch = config.parse_architecture(text)
    assert arch.nocs[0].freq_mhz == 1000


def test_serialize_round_trip():
    text = MINIMAL + "\n".join([
        "[module.alpha]", "module_freq = 300",
        "[module.beta]", "module_freq = 600", "module_kind = hard",
        "[sectors]", "FFFA", "FFFA", "FFFA", "FFFA",
        "[telemetry]", "num_traces = 2", "trace_names = probe,debug",
    ])
    arch = config.parse_architecture(text)
    again = config.parse_architecture(config.serialize_architecture(arch))
    assert again == arch


def test_placement_grammar():
    arch = config.parse_architecture(MINIMAL + "[module.mvu0]\nmodule_freq = 300")
    placement = config.parse_placement("mvu0.in 0 12\n", arch)
    assert placement.entries[("mvu0", "in")] == (0, 12)


def test_placement_duplicate_rejected():
    arch = config.parse_architecture(MINIMAL)
    with pytest.raises(DuplicatePort):
        config.parse_placement("a.p 0 1\na.p 0 2\n", arch)


def test_placement_router_out_of_range():
    text = MINIMAL.replace("noc_dim = 4x4", "noc_dim = 10x5")
    arch = config.parse_architecture(text)
    with pytest.raises(RouterOutOfRange):
        config.parse_placement("a.p 0 50\n", arch)


def test_placement_oversubscription():
    arch = config.parse_architecture(MINIMAL)  # 2 interfaces per adapter
    config.parse_placement("a.p 0 5\nb.p 0 5\n", arch)
    with pytest.raises(OversubscribedRouter):
        config.parse_placement("a.p 0 5\nb.p 0 5\nc.p 0 5\n", arch)


def test_interface_indices_follow_file_order():
    arch = config.parse_architecture(MINIMAL)
    placement = config.parse_placement("b.p 0 5\na.p 0 5\nc.p 0 6\n", arch)
    table = placement.interface_table()
    assert table[("b", "p")] == (0, 5, 0)
    assert table[("a", "p")] == (0, 5, 1)
    assert table[("c", "p")] == (0, 6, 0)


def _rad2_style_texts():
    arch_text = """
[noc.0]
noc_freq = 1500
noc_dim = 10x5
[adapter]
adapter_freq = 1200
[module.soft_a]
module_freq = 300
[module.hard_b]
module_freq = 600
module_kind = hard
[sectors]
FFFFFFFFAA
FFFFFFFFAA
FFFFFFFFAA
FFFFFFFFAA
FFFFFFFFAA
"""
    return arch_text


def test_validate_clean_rad2_style():
    arch = config.parse_architecture(_rad2_style_texts())
    placement = config.parse_placement("soft_a.p 0 0\nhard_b.p 0 8\n", arch)
    assert config.validate(arch, placement) == []


def test_validate_hard_module_on_fpga_sector():
    arch = config.parse_architecture(_rad2_style_texts())
    placement = config.parse_placement("soft_a.p 0 0\nhard_b.p 0 0\n", arch)
    diags = config.validate(arch, placement)
    assert any("hard module" in d for d in diags)


def test_validate_vc_mapping_out_of_range():
    text = MINIMAL + "[adapter]\nadapter_vc_mapping = stream:0,mm_req:1,mm_resp:3\n"
    arch = config.parse_architecture(text)
    placement = config.parse_placement("", arch)
    diags = config.validate(arch, placement)
    assert any("VC 3" in d for d in diags)


def test_validate_empty_placement_with_modules_is_nonempty():
    arch = config.parse_architecture(MINIMAL + "[module.m]\nmodule_freq = 100")
    placement = config.parse_placement("", arch)
    assert config.validate(arch, placement) != []


def test_sector_grid_dimension_mismatch_diagnosed():
    text = MINIMAL + "[sectors]\nFFF\nFFF\n"
    arch = config.parse_architecture(text)
    placement = config.parse_placement("", arch)
    assert any("sector grid" in d for d in config.validate(arch, placement))


def test_override_applies_to_all_nocs():
    arch = config.parse_architecture(MINIMAL)
    arch = config.apply_override(arch, "noc_vc_buffer_size", "16")
    assert arch.nocs[0].vc_buffer_size == 16
    with pytest.raises(UnknownKey):
        config.apply_override(arch, "nonsense_key", "1")


# --- area estimation --------------------------------------------------------

def test_area_estimate_matches_hand_arithmetic():
    comp = config.AreaComposition(
        fractions={"BRAM": 0.68, "ALM": 0.21, "TB": 0.11},
        scaling={"BRAM": 3.0, "ALM": 26.0, "TB": 1.35},
        fpga_sectors=2.8,
    )
    expected = 2.8 * (0.68 / 3.0 + 0.21 / 26.0 + 0.11 / 1.35)
    area = config.estimate_asic_area(comp)
    assert math.isclose(area, expected, rel_tol=0, abs_tol=1e-12)
    assert abs(area - 0.8854) < 1e-4


def test_area_single_class_identity():
    comp = config.AreaComposition(fractions={"ALM": 1.0}, scaling={"ALM": 1.0},
                                  fpga_sectors=3.5)
    assert config.estimate_asic_area(comp) == pytest.approx(3.5)


def test_area_huge_ratios_tend_to_zero():
    comp = config.AreaComposition(
        fractions={"a": 0.5, "b": 0.5}, scaling={"a": 1e9, "b": 1e9},
        fpga_sectors=2.8)
    assert config.estimate_asic_area(comp) < 1e-8


def test_area_fraction_sum_enforced():
    with pytest.raises(ValueError):
        config.AreaComposition(fractions={"a": 0.5}, scaling={"a": 2.0},
                               fpga_sectors=1.0)
    with pytest.raises(ValueError):
        config.AreaComposition(fractions={"a": 1.0}, scaling={"a": 0.5},
                               fpga_sectors=1.0)


@given(sectors=st.floats(0.1, 100), scale=st.floats(1.0, 1000),
       ratios=st.tuples(st.floats(1, 100), st.floats(1, 100)))
def test_area_linear_in_sectors_and_monotone_in_ratios(sectors, scale, ratios):
    fractions = {"a": 0.25, "b": 0.75}
    base = config.AreaComposition(
        fractions=fractions, scaling={"a": ratios[0], "b": ratios[1]},
        fpga_sectors=sectors)
    double = config.AreaComposition(
        fractions=fractions, scaling={"a": ratios[0], "b": ratios[1]},
        fpga_sectors=2 * sectors)
    assert config.estimate_asic_area(double) == pytest.approx(
        2 * config.estimate_asic_area(base))
    worse = config.AreaComposition(
        fractions=fractions,
        scaling={"a": ratios[0] * scale, "b": ratios[1]},
        fpga_sectors=sectors)
    assert config.estimate_asic_area(worse) <= config.estimate_asic_area(base) + 1e-12
