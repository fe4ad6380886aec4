"""Two-cell column builder with a form-finding polish.

The raw interleaved layout from :func:`two_cell_layout` is generally not
prestressable: its equilibrium matrix has an empty null space. Building
therefore mimics assembly of the physical module: extend the strut rest
lengths a little, let the free-standing column relax into its self-stressed
shape, then rescale that shape (an affine map, which preserves force-density
equilibrium exactly) back to the requested footprint radius and overall
height. Rest lengths are refreshed so the returned topology is-stress-free at
its reference geometry and carries an exact self-stress direction.
"""

import math

import numpy as np

from .statics import apply_prestress, find_self_stress
from .topology import Member, Node, Topology, two_cell_layout

_POLISH_EXTENSION = 1e-3  # m, temporary nut-turn used only to find the shape


def build_two_cell_column(radius=0.05, cell_height=0.10, twist=math.pi / 4,
                          saddle_gap=0.02, ea_cable=2.0e5, ea_strut=2.0e6,
                          polish=True):
    """Build the prestressable two-cell four-strut column.

    ``twist`` and ``saddle_gap`` shape the assembly layout; the polished
    equilibrium geometry keeps their character but adjusts them to the
    nearest self-stressable shape. 16 nodes, 8 struts, 32 cables, class-1.
    """
    layout = two_cell_layout(radius, cell_height, twist, saddle_gap,
                             ea_cable, ea_strut)
    if not polish:
        return layout
    cfg = apply_prestress(layout, _POLISH_EXTENSION, tol=1e-9)
    coords = _rescale(cfg.coords, layout, radius, 2 * cell_height - saddle_gap)
    members = [
        Member(mb.id, mb.kind, mb.ends, mb.axial_rigidity,
               float(np.linalg.norm(coords[mb.ends[1]] - coords[mb.ends[0]])),
               failure_load=mb.failure_load)
        for mb in layout.members
    ]
    nodes = [Node(nd.id, coords[nd.id], nd.role) for nd in layout.nodes]
    topo = Topology(nodes=nodes, members=members)
    find_self_stress(topo)  # raises if the polish failed to land on the manifold
    return topo


def _rescale(coords, layout, radius, total_height):
    """Affine map: footprint radius and total height back to requested values."""
    from .topology import ROLE_GROUND

    ground = layout.node_ids(ROLE_GROUND)
    x = coords.copy()
    center = x[ground].mean(axis=0)
    x -= center
    r_now = np.hypot(x[ground, 0], x[ground, 1]).mean()
    h_now = x[:, 2].max() - x[:, 2].min()
    x[:, :2] *= radius / r_now
    x[:, 2] -= x[:, 2].min()
    x[:, 2] *= total_height / h_now
    return x
