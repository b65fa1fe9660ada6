import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

from radsim import config
from radsim.drivers import build_workload
from radsim.engine import StopCondition, build_simulation
from radsim.workload import parse_workload


def build_from_texts(arch_text, place_text, wkld_text, seed=0, **kwargs):
    arch = config.parse_architecture(arch_text)
    placement = config.parse_placement(place_text, arch)
    spec = parse_workload(wkld_text)
    workload = build_workload(spec)
    sim = build_simulation(arch, placement, workload, seed=seed, **kwargs)
    return sim, workload


def run_texts(arch_text, place_text, wkld_text, seed=0, stop=None, **kwargs):
    sim, workload = build_from_texts(arch_text, place_text, wkld_text,
                                     seed=seed, **kwargs)
    result = sim.run_until(stop or StopCondition.all_received())
    return sim, workload, result


@pytest.fixture
def tmp_out(tmp_path):
    return str(tmp_path / "out")
