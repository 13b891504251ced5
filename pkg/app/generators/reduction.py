"""
Independent Set Reduction

Turns a simple undirected graph into an EVSP instance whose optimum is
K times the graph's independence number, K being the lcm of the vertex
degrees.

Layout: one station with a single plain space and one vehicle. Every edge
(u, v) gets its own time slot [i*(K+1), i*(K+1)+K) in which one demand of
c_u (duration K/deg(u)) and one of c_v (duration K/deg(v)) leave together,
so the single vehicle serves at most one of them. A customer served in
full therefore contributes exactly K and no two neighbours can both be
served. Isolated vertices get a duration-K demand in a slot of their own.
Every demand uses 1 W·min and the vehicle starts with exactly enough for
all of them, so energy never binds.
"""

import itertools
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Tuple, Union

import networkx as nx
from pydantic import BaseModel, Field

from app.errors import GraphValidationError, SizeCapExceededError
from app.schemas.models import Customer, Demand, Instance, Station, Vehicle
from app.utils.logger import logger

MAX_BRUTEFORCE_VERTICES = 20
STATION_ID = "s1"
VEHICLE_ID = "v1"
DEMAND_ENERGY = Fraction(1)  # W·min


class Graph(BaseModel):
    """A simple undirected graph; build through from_edges to get it checked"""
    vertices: List[str] = Field(default_factory=list)
    edges: List[Tuple[str, str]] = Field(default_factory=list)

    @classmethod
    def from_edges(cls, edges, vertices=()) -> "Graph":
        """
        Build and check a graph.

        Raises:
            GraphValidationError: self-loop or repeated edge
        """
        seen = set()
        clean: List[Tuple[str, str]] = []
        names = [str(v) for v in vertices]
        for u, v in edges:
            u, v = str(u), str(v)
            if u == v:
                raise GraphValidationError(f"self-loop on {u}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphValidationError(f"repeated edge {u} {v}")
            seen.add(key)
            clean.append((u, v))
            names.extend((u, v))
        return cls(vertices=sorted(set(names)), edges=clean)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g


def read_edge_list(path: Union[str, Path]) -> Graph:
    """
    Read a graph from text: one "u v" pair per line, a single token adds an
    isolated vertex, blank lines and lines starting with # are skipped.
    """
    edges = []
    vertices = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) == 1:
            vertices.append(tokens[0])
        else:
            edges.append((tokens[0], tokens[1]))
    return Graph.from_edges(edges, vertices)


def max_independent_set_bruteforce(g: Graph) -> int:
    """
    Independence number by subset enumeration.

    Raises:
        SizeCapExceededError: more than 20 vertices
    """
    if len(g.vertices) > MAX_BRUTEFORCE_VERTICES:
        raise SizeCapExceededError(f"{len(g.vertices)} vertices exceed the cap of {MAX_BRUTEFORCE_VERTICES}")
    nxg = g.to_networkx()
    for size in range(len(g.vertices), 0, -1):
        for subset in itertools.combinations(g.vertices, size):
            if not any(nxg.has_edge(u, v) for u, v in itertools.combinations(subset, 2)):
                return size
    return 0


def misp_to_evsp(g: Graph, name: str = "") -> Tuple[Instance, int]:
    """
    Build the EVSP instance of a graph.

    Returns:
        (instance, K) with optimum(instance) = K * alpha(g)
    """
    nxg = g.to_networkx()
    degrees: Dict[str, int] = dict(nxg.degree())
    connected = [d for d in degrees.values() if d > 0]
    K = math.lcm(*connected) if connected else 1

    demands: Dict[str, List[Demand]] = {v: [] for v in g.vertices}

    def add(vertex: str, start: int, duration: Fraction) -> None:
        demands[vertex].append(Demand(
            pickup_station=STATION_ID,
            depart=start,
            dropoff_station=STATION_ID,
            arrive=start + duration,
            energy=DEMAND_ENERGY,
        ))

    slot = 0
    for u, v in sorted(tuple(sorted(e)) for e in g.edges):
        start = slot * (K + 1)
        add(u, start, Fraction(K, degrees[u]))
        add(v, start, Fraction(K, degrees[v]))
        slot += 1
    for vertex in sorted(v for v, d in degrees.items() if d == 0):
        add(vertex, slot * (K + 1), Fraction(K))
        slot += 1

    total = sum(len(ds) for ds in demands.values())
    capacity = max(total, 1) * DEMAND_ENERGY
    inst = Instance(
        name=name or f"misp-{len(g.vertices)}v-{len(g.edges)}e",
        battery_capacity=capacity,
        charge_rate=DEMAND_ENERGY,
        stations=[Station(id=STATION_ID, capacity=1, chargers=0)],
        vehicles=[Vehicle(id=VEHICLE_ID, initial_station=STATION_ID, initial_energy=capacity)],
        customers=[Customer(id=f"c_{v}", demands=demands[v]) for v in g.vertices],
    )
    logger.info(f"reduction: {len(g.vertices)} vertices, {len(g.edges)} edges -> {total} demands, K={K}")
    return inst, K
