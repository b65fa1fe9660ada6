"""NoC topology: router coordinate math, routing functions, hop counts.

Routers are numbered row-major: id = y * X + x for an X-by-Y grid.
Ports are indexed EAST=0, WEST=1, NORTH=2, SOUTH=3, LOCAL=4, with
east = +x, north = +y.
"""

from dataclasses import dataclass

from .errors import InvalidRouter

EAST, WEST, NORTH, SOUTH, LOCAL = range(5)
NUM_PORTS = 5
PORT_NAMES = ("east", "west", "north", "south", "local")
OPPOSITE = (WEST, EAST, SOUTH, NORTH, LOCAL)

MESH = "mesh"
TORUS = "torus"
DIMENSION_ORDER = "dimension_order"
MINIMAL_ADAPTIVE = "minimal_adaptive"


@dataclass(frozen=True)
class NocTopology:
    kind: str = MESH
    x: int = 1
    y: int = 1
    routing: str = DIMENSION_ORDER

    def __post_init__(self):
        if self.kind not in (MESH, TORUS):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.routing not in (DIMENSION_ORDER, MINIMAL_ADAPTIVE):
            raise ValueError(f"unknown routing function {self.routing!r}")
        if self.x < 1 or self.y < 1:
            raise ValueError("topology dimensions must be >= 1")

    @property
    def num_routers(self):
        return self.x * self.y

    def coords(self, router):
        if not 0 <= router < self.num_routers:
            raise InvalidRouter(f"router {router} outside 0..{self.num_routers - 1}")
        return router % self.x, router // self.x

    def router_id(self, x, y):
        if not (0 <= x < self.x and 0 <= y < self.y):
            raise InvalidRouter(f"coordinates ({x},{y}) outside {self.x}x{self.y}")
        return y * self.x + x

    def neighbor(self, router, port):
        """Router on the other end of `port`, or None at a mesh edge."""
        x, y = self.coords(router)
        if port == EAST:
            x += 1
        elif port == WEST:
            x -= 1
        elif port == NORTH:
            y += 1
        elif port == SOUTH:
            y -= 1
        else:
            return None
        if self.kind == TORUS:
            return self.router_id(x % self.x, y % self.y)
        if 0 <= x < self.x and 0 <= y < self.y:
            return self.router_id(x, y)
        return None


def _axis_step(delta, size, wrap):
    """Signed direction (-1/0/+1) along one axis; shortest way on a torus.

    Ties on an even torus go the positive way.
    """
    if delta == 0:
        return 0
    if not wrap:
        return 1 if delta > 0 else -1
    fwd = delta % size          # hops going +
    back = (-delta) % size      # hops going -
    if fwd <= back:
        return 1
    return -1


def next_hop_dimension_order(current, dest, topo):
    """Output port for XY routing: fix the X offset fully before Y."""
    cx, cy = topo.coords(current)
    dx, dy = topo.coords(dest)
    wrap = topo.kind == TORUS
    step = _axis_step(dx - cx, topo.x, wrap)
    if step:
        return EAST if step > 0 else WEST
    step = _axis_step(dy - cy, topo.y, wrap)
    if step:
        return NORTH if step > 0 else SOUTH
    return LOCAL


def min_hops(src, dst, topo):
    """Router-to-router hop count: Manhattan on mesh, wrap-aware on torus."""
    sx, sy = topo.coords(src)
    dx, dy = topo.coords(dst)
    ax, ay = abs(dx - sx), abs(dy - sy)
    if topo.kind == TORUS:
        ax = min(ax, topo.x - ax)
        ay = min(ay, topo.y - ay)
    return ax + ay


def productive_ports(current, dest, topo):
    """Distance-reducing ports, X-dimension first (used for adaptive routing)."""
    if current == dest:
        return (LOCAL,)
    ports = []
    px = next_hop_dimension_order(current, dest, topo)
    if px != LOCAL:
        ports.append(px)
    # Y-direction port, if the Y offset is nonzero
    cy = topo.coords(current)[1]
    dy = topo.coords(dest)[1]
    step = _axis_step(dy - cy, topo.y, topo.kind == TORUS)
    py = NORTH if step > 0 else SOUTH if step < 0 else None
    if py is not None and py != px:
        ports.append(py)
    return tuple(ports)


def minimal_adaptive_next_hop(current, dest, topo, congestion):
    """Pick the productive port with the most free credits; ties go X-first.

    `congestion` maps port index -> free downstream credits.
    """
    ports = productive_ports(current, dest, topo)
    if len(ports) == 1:
        return ports[0]
    best = ports[0]
    for p in ports[1:]:
        if congestion.get(p, 0) > congestion.get(best, 0):
            best = p
    return best


def routing_table(topo):
    """Precomputed dimension-order table: table[current][dest] -> port."""
    import numpy as np

    n = topo.num_routers
    table = np.empty((n, n), dtype=np.int8)
    for cur in range(n):
        for dst in range(n):
            table[cur, dst] = next_hop_dimension_order(cur, dst, topo)
    return table


def productive_table(topo):
    """Per (current, dest) up to two productive ports (second may be -1)."""
    import numpy as np

    n = topo.num_routers
    table = np.full((n, n, 2), -1, dtype=np.int8)
    for cur in range(n):
        for dst in range(n):
            ports = productive_ports(cur, dst, topo)
            table[cur, dst, 0] = ports[0]
            if len(ports) > 1:
                table[cur, dst, 1] = ports[1]
    return table
