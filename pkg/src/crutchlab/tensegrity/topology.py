"""Node/member topology of the columnar tensegrity, builders and JSON I/O.

Roles: ``top-attachment`` nodes take the crutch shaft, ``ground-contact``
nodes are the four independently mobile feet, everything else is
``interface``. The column is class-1: no two struts share a node.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

CABLE_FAILURE_N = 1500.0   # lower bound of the measured single-cable range
STRUT_FAILURE_N = 4000.0
MODULE_FAILURE_N = 2000.0  # lower bound of the measured whole-module range

ROLE_TOP = "top-attachment"
ROLE_INTERFACE = "interface"
ROLE_GROUND = "ground-contact"
_ROLES = (ROLE_TOP, ROLE_INTERFACE, ROLE_GROUND)


class TopologyError(ValueError):
    pass


@dataclass
class Node:
    id: int
    position: np.ndarray
    role: str = ROLE_INTERFACE

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        if not np.all(np.isfinite(self.position)):
            raise TopologyError(f"node {self.id}: non-finite position")
        if self.role not in _ROLES:
            raise TopologyError(f"node {self.id}: unknown role {self.role!r}")


@dataclass
class Member:
    id: int
    kind: str  # "cable" | "strut"
    ends: tuple
    axial_rigidity: float  # EA, N
    rest_length: float
    rest_length_offset: float = 0.0  # struts only: nut-turn extension
    failure_load: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cable", "strut"):
            raise TopologyError(f"member {self.id}: kind must be cable or strut")
        a, b = self.ends
        if a == b:
            raise TopologyError(f"member {self.id}: ends coincide")
        self.ends = (int(a), int(b))
        if self.axial_rigidity <= 0:
            raise TopologyError(f"member {self.id}: EA must be positive")
        if self.rest_length <= 0:
            raise TopologyError(f"member {self.id}: rest length must be positive")
        if self.kind == "cable" and self.rest_length_offset != 0.0:
            raise TopologyError(f"member {self.id}: cables have no rest-length offset")
        if self.failure_load == 0.0:
            self.failure_load = CABLE_FAILURE_N if self.kind == "cable" else STRUT_FAILURE_N

    @property
    def effective_rest_length(self):
        return self.rest_length + self.rest_length_offset


@dataclass
class Topology:
    nodes: list = field(default_factory=list)
    members: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    # -- array views used by the solver kernels -------------------------------
    def coords(self):
        return np.array([nd.position for nd in self.nodes], dtype=float)

    def ends(self):
        return np.array([mb.ends for mb in self.members], dtype=np.int64)

    def ea(self):
        return np.array([mb.axial_rigidity for mb in self.members], dtype=float)

    def rest_lengths(self, with_offsets=True):
        if with_offsets:
            return np.array([mb.effective_rest_length for mb in self.members], dtype=float)
        return np.array([mb.rest_length for mb in self.members], dtype=float)

    def is_cable(self):
        return np.array([mb.kind == "cable" for mb in self.members], dtype=bool)

    def failure_loads(self):
        return np.array([mb.failure_load for mb in self.members], dtype=float)

    def node_ids(self, role):
        return [nd.id for nd in self.nodes if nd.role == role]

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_members(self):
        return len(self.members)

    def validate(self):
        ids = [nd.id for nd in self.nodes]
        if len(set(ids)) != len(ids):
            raise TopologyError("duplicate node ids")
        if sorted(ids) != list(range(len(ids))):
            raise TopologyError("node ids must be 0..n-1")
        touched = set()
        strut_nodes = set()
        for mb in self.members:
            for e in mb.ends:
                if e not in set(ids):
                    raise TopologyError(f"member {mb.id}: unknown node {e}")
                touched.add(e)
            if mb.kind == "strut":
                if strut_nodes & set(mb.ends):
                    raise TopologyError("not class-1: two struts share a node")
                strut_nodes |= set(mb.ends)
        if touched != set(ids):
            raise TopologyError("isolated node(s): every node needs a member")
        # single-member analytic rigs carry no cables; every real build does
        if any(mb.kind == "cable" for mb in self.members) and not self._cables_connected():
            raise TopologyError("cable graph does not connect all nodes")

    def _cables_connected(self):
        adj = {nd.id: set() for nd in self.nodes}
        for mb in self.members:
            if mb.kind == "cable":
                a, b = mb.ends
                adj[a].add(b)
                adj[b].add(a)
        seen = {self.nodes[0].id}
        stack = [self.nodes[0].id]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.nodes)

    # -- JSON schema -----------------------------------------------------------
    def to_json_dict(self):
        return {
            "nodes": [
                {"id": nd.id, "position": nd.position.tolist(), "role": nd.role}
                for nd in self.nodes
            ],
            "members": [
                {
                    "id": mb.id,
                    "kind": mb.kind,
                    "ends": list(mb.ends),
                    "axial_rigidity_N": mb.axial_rigidity,
                    "rest_length_m": mb.rest_length,
                    "rest_length_offset_m": mb.rest_length_offset,
                    "failure_load_N": mb.failure_load,
                }
                for mb in self.members
            ],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json_dict(cls, d):
        nodes = [Node(n["id"], np.array(n["position"]), n["role"]) for n in d["nodes"]]
        members = [
            Member(
                m["id"],
                m["kind"],
                tuple(m["ends"]),
                m["axial_rigidity_N"],
                m["rest_length_m"],
                m.get("rest_length_offset_m", 0.0),
                m.get("failure_load_N", 0.0),
            )
            for m in d["members"]
        ]
        return cls(nodes=nodes, members=members)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


def _ring(count, radius, z, phase):
    ang = phase + 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.full(count, z)])


def prism_cell(n_struts=4, radius=0.05, height=0.10, twist=None,
               ea_cable=2.0e5, ea_strut=2.0e6):
    """Single p-strut prismatic tensegrity cell.

    Struts run bottom k -> top k+1; side cables bottom k -> top k; ring cables
    close both polygons. The twist admitting a self-stress is
    pi/2 - pi/p (pi/4 for the four-strut cell); other twists build fine but
    carry no self-stress.
    """
    p = int(n_struts)
    if p < 3:
        raise TopologyError("need at least 3 struts")
    if radius <= 0 or height <= 0:
        raise TopologyError("radius and height must be positive")
    if twist is None:
        twist = math.pi / 2 - math.pi / p
    bottom = _ring(p, radius, 0.0, 0.0)
    top = _ring(p, radius, height, twist)
    coords = np.vstack([bottom, top])
    nodes = [Node(i, coords[i], ROLE_GROUND if i < p else ROLE_TOP) for i in range(2 * p)]

    pairs = []
    kinds = []
    for k in range(p):
        pairs.append((k, p + (k + 1) % p))       # struts
        kinds.append("strut")
    for k in range(p):
        pairs.append((k, (k + 1) % p))           # bottom ring
        kinds.append("cable")
        pairs.append((p + k, p + (k + 1) % p))   # top ring
        kinds.append("cable")
        pairs.append((k, p + k))                 # side cables
        kinds.append("cable")

    members = _members_from_pairs(coords, pairs, kinds, ea_cable, ea_strut)
    return Topology(nodes=nodes, members=members)


def _members_from_pairs(coords, pairs, kinds, ea_cable, ea_strut):
    members = []
    for mid, ((a, b), kind) in enumerate(zip(pairs, kinds)):
        rest = float(np.linalg.norm(coords[b] - coords[a]))
        if rest < 1e-12:
            raise TopologyError(f"degenerate geometry: nodes {a} and {b} coincide")
        ea = ea_cable if kind == "cable" else ea_strut
        members.append(Member(mid, kind, (a, b), ea, rest))
    return members


def two_cell_layout(radius=0.05, cell_height=0.10, twist=math.pi / 4,
                    saddle_gap=0.02, ea_cable=2.0e5, ea_strut=2.0e6):
    """Assemble the raw (un-form-found) two-cell four-strut column.

    Two four-strut prismatic cells interleave by ``saddle_gap``: the upper
    cell's bottom ring sits that far below the lower cell's top ring, the way
    the joint bits of the physical module nest into each other. Cable graph:

    * per cell: 4 diagonal cables plus a closing ring on its outer layer
      (ground ring below, attachment ring on top),
    * interface: 8 saddle cables zig-zagging between the two inner rings and
      8 tie cables running past the interface (ground ring -> upper-bottom
      ring, lower-top ring -> attachment ring).

    16 nodes, 8 struts, 32 cables, class-1. The twist argument orients the
    rings; an exact self-stress generally appears only after the form-finding
    polish in :func:`build_two_cell_column`.
    """
    p = 4
    if radius <= 0 or cell_height <= 0 or saddle_gap <= 0:
        raise TopologyError("radius, cell_height and saddle_gap must be positive")
    if not 0.0 < twist < math.pi / 2:
        raise TopologyError("twist must lie in (0, pi/2)")
    if saddle_gap >= cell_height:
        raise TopologyError("saddle_gap must be smaller than cell_height")

    z_t = cell_height                     # lower cell top ring
    z_B = cell_height - saddle_gap        # upper cell bottom ring (interleaved)
    z_T = z_B + cell_height               # attachment ring
    step = 2.0 * math.pi / p

    b = _ring(p, radius, 0.0, 0.0)                    # nodes 0..3 ground
    t = _ring(p, radius, z_t, twist)                  # nodes 4..7 lower-top
    # upper cell mirrored in chirality, rotated to center saddles
    B = _ring(p, radius, z_B, twist + step / 2)       # nodes 8..11 upper-bottom
    T = _ring(p, radius, z_T, step / 2)               # nodes 12..15 attachment
    coords = np.vstack([b, t, B, T])

    roles = [ROLE_GROUND] * p + [ROLE_INTERFACE] * 2 * p + [ROLE_TOP] * p
    nodes = [Node(i, coords[i], roles[i]) for i in range(4 * p)]

    bi = lambda k: k % p
    ti = lambda k: p + k % p
    Bi = lambda k: 2 * p + k % p
    Ti = lambda k: 3 * p + k % p

    pairs = []
    kinds = []

    for k in range(p):                      # struts, lower cell right-handed,
        pairs.append((bi(k), ti(k + 1)))    # upper cell left-handed (mirrored)
        kinds.append("strut")
        pairs.append((Bi(k), Ti(k - 1)))
        kinds.append("strut")
    for k in range(p):
        pairs.append((bi(k), bi(k + 1)))    # ground ring
        kinds.append("cable")
        pairs.append((Ti(k), Ti(k + 1)))    # attachment ring
        kinds.append("cable")
        pairs.append((bi(k), ti(k)))        # lower diagonals
        kinds.append("cable")
        pairs.append((Bi(k), Ti(k)))        # upper diagonals
        kinds.append("cable")
        pairs.append((ti(k), Bi(k)))        # saddle zig
        kinds.append("cable")
        pairs.append((ti(k + 1), Bi(k)))    # saddle zag
        kinds.append("cable")
        pairs.append((bi(k), Bi(k)))        # lower tie across the interface
        kinds.append("cable")
        pairs.append((ti(k), Ti(k)))        # upper tie across the interface
        kinds.append("cable")

    members = _members_from_pairs(coords, pairs, kinds, ea_cable, ea_strut)
    return Topology(nodes=nodes, members=members)
