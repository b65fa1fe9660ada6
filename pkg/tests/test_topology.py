import pytest

from oracles import bfs_hops
from radsim.errors import InvalidRouter
from radsim.topology import (
    EAST, LOCAL, NORTH, SOUTH, WEST, NocTopology, min_hops,
    minimal_adaptive_next_hop, next_hop_dimension_order, productive_ports,
)


def test_dimension_order_x_first():
    topo = NocTopology(kind="mesh", x=4, y=4)
    assert next_hop_dimension_order(0, 15, topo) == EAST


def test_dimension_order_identity_is_local():
    topo = NocTopology(kind="mesh", x=4, y=4)
    r = topo.router_id(2, 1)
    assert next_hop_dimension_order(r, r, topo) == LOCAL


def test_dimension_order_torus_wraps_short_way():
    topo = NocTopology(kind="torus", x=4, y=4)
    # (0,0) -> (3,0): one westward wrap hop beats three eastward hops
    assert next_hop_dimension_order(0, 3, topo) == WEST
    assert bfs_hops("torus", 4, 4, 0, 3) == 1


def test_dimension_order_torus_tie_goes_positive():
    topo = NocTopology(kind="torus", x=4, y=4)
    # offset of exactly half the ring: both ways are 2 hops
    assert next_hop_dimension_order(0, 2, topo) == EAST


def test_dimension_order_y_direction():
    topo = NocTopology(kind="mesh", x=4, y=4)
    src = topo.router_id(2, 0)
    dst = topo.router_id(2, 3)
    assert next_hop_dimension_order(src, dst, topo) == NORTH
    assert next_hop_dimension_order(dst, src, topo) == SOUTH


def test_min_hops_manhattan():
    topo = NocTopology(kind="mesh", x=4, y=4)
    assert min_hops(0, 15, topo) == 6
    assert min_hops(5, 5, topo) == 0


def test_min_hops_torus_wrap():
    topo = NocTopology(kind="torus", x=4, y=4)
    assert min_hops(0, 15, topo) == 2


@pytest.mark.parametrize("kind", ["mesh", "torus"])
@pytest.mark.parametrize("dims", [(1, 1), (2, 2), (3, 5), (4, 4), (8, 8)])
def test_min_hops_matches_bfs_oracle(kind, dims):
    x, y = dims
    topo = NocTopology(kind=kind, x=x, y=y)
    for src in range(x * y):
        for dst in range(x * y):
            assert min_hops(src, dst, topo) == bfs_hops(kind, x, y, src, dst), \
                (kind, dims, src, dst)


@pytest.mark.parametrize("kind", ["mesh", "torus"])
def test_dimension_order_routes_reach_destination(kind):
    """Following next_hop step by step always terminates at the target."""
    topo = NocTopology(kind=kind, x=5, y=4)
    for src in range(topo.num_routers):
        for dst in range(topo.num_routers):
            cur, hops = src, 0
            while True:
                port = next_hop_dimension_order(cur, dst, topo)
                if port == LOCAL:
                    break
                cur = topo.neighbor(cur, port)
                hops += 1
                assert hops <= 32, "routing loop"
            assert cur == dst
            assert hops == min_hops(src, dst, topo)


def test_invalid_router_rejected():
    topo = NocTopology(kind="mesh", x=4, y=4)
    with pytest.raises(InvalidRouter):
        next_hop_dimension_order(0, 16, topo)
    with pytest.raises(InvalidRouter):
        min_hops(-1, 3, topo)


def test_adaptive_single_productive_port():
    topo = NocTopology(kind="mesh", x=4, y=4, routing="minimal_adaptive")
    # straight east: only one productive port no matter the congestion
    assert minimal_adaptive_next_hop(0, 3, topo, {EAST: 0}) == EAST


def test_adaptive_prefers_more_credits():
    topo = NocTopology(kind="mesh", x=4, y=4, routing="minimal_adaptive")
    dst = topo.router_id(2, 2)
    assert minimal_adaptive_next_hop(0, dst, topo, {EAST: 3, NORTH: 1}) == EAST
    assert minimal_adaptive_next_hop(0, dst, topo, {EAST: 1, NORTH: 3}) == NORTH


def test_adaptive_tie_breaks_to_x_dimension():
    topo = NocTopology(kind="mesh", x=4, y=4, routing="minimal_adaptive")
    dst = topo.router_id(2, 2)
    assert minimal_adaptive_next_hop(0, dst, topo, {EAST: 2, NORTH: 2}) == EAST
    assert productive_ports(0, dst, topo) == (EAST, NORTH)
