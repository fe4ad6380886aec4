"""Static equilibrium of the prestressed column.

Newton iteration with backtracking line search on the residual norm is the
primary solver; when it stalls (singular tangent or no descent) it falls back
to dynamic relaxation with kinetic damping and finishes with a Newton polish.
Slack cables are frozen per iteration: a cable shorter than its rest length
contributes neither force nor stiffness in that iterate.
"""

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .topology import ROLE_GROUND, Topology

DEFAULT_TOL = 1e-6  # N, max-norm of the free-DOF residual


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no equilibrium after {iterations} iterations (residual {residual:.3e} N)"
        )


class MechanismSingularity(SolverError):
    pass


class NoSelfStress(ValueError):
    pass


class SignInfeasibleSelfStress(NoSelfStress):
    """Null space exists but admits no tension-cable / compression-strut vector."""


@dataclass
class SelfStress:
    force_densities: np.ndarray  # per member, N/m, normalized to max |q| = 1
    residual: float              # ||A q||_inf before normalization scale-out

    def __post_init__(self):
        self.force_densities = np.asarray(self.force_densities, dtype=float)


@dataclass
class LoadCase:
    """Per-node external force vectors (N)."""
    forces: np.ndarray

    def __post_init__(self):
        self.forces = np.asarray(self.forces, dtype=float)

    @classmethod
    def zero(cls, n_nodes):
        return cls(np.zeros((n_nodes, 3)))

    @classmethod
    def vertical_on(cls, topology, node_ids, total_force):
        f = np.zeros((topology.n_nodes, 3))
        f[list(node_ids), 2] = total_force / len(node_ids)
        return cls(f)


@dataclass
class Terrain:
    """Height offsets (m) for ground-contact nodes; flat terrain is all zero."""
    offsets: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(list(self.offsets.values()), dtype=float)
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValueError("terrain offsets must be finite")

    @classmethod
    def flat(cls):
        return cls({})

    @classmethod
    def raised(cls, node_ids, height):
        return cls({int(i): float(height) for i in node_ids})

    def offset_for(self, node_id):
        return self.offsets.get(node_id, 0.0)


@dataclass
class Configuration:
    topology: Topology
    coords: np.ndarray           # (n, 3) equilibrium coordinates
    forces: np.ndarray           # (m,) axial member forces, tension positive
    fixed: np.ndarray            # (n, 3) bool, prescribed DOFs
    reactions: np.ndarray        # (n, 3) support reactions, zero on free DOFs
    residual: float
    iterations: int = 0
    overload: bool = False       # some member at or beyond its failure load

    @property
    def support_nodes(self):
        return [i for i in range(self.coords.shape[0]) if self.fixed[i].any()]

    def to_json_dict(self):
        return {
            "topology": self.topology.to_json_dict(),
            "coordinates_m": self.coords.tolist(),
            "member_forces_N": self.forces.tolist(),
            "fixed_dofs": self.fixed.astype(int).tolist(),
            "reactions_N": self.reactions.tolist(),
            "residual_N": self.residual,
            "overload": bool(self.overload),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            topology=Topology.from_json_dict(d["topology"]),
            coords=np.array(d["coordinates_m"], dtype=float),
            forces=np.array(d["member_forces_N"], dtype=float),
            fixed=np.array(d["fixed_dofs"], dtype=bool),
            reactions=np.array(d["reactions_N"], dtype=float),
            residual=float(d["residual_N"]),
            overload=bool(d.get("overload", False)),
        )


def equilibrium_matrix(topology, coords=None):
    """Force-density equilibrium matrix A, shape (3 n_nodes, n_members).

    Column j carries +(x_a - x_b) in node a's row block and the negative in
    node b's, so A q equals the external load balancing force densities q.
    """
    coords = topology.coords() if coords is None else np.asarray(coords, dtype=float)
    if not np.all(np.isfinite(coords)):
        raise ValueError("coordinates must be finite")
    ends = topology.ends()
    lengths = kernels.member_lengths(coords, ends)
    if np.any(lengths < 1e-12):
        raise ValueError("zero-length member")
    n, m = coords.shape[0], ends.shape[0]
    A = np.zeros((3 * n, m))
    for j in range(m):
        a, b = ends[j]
        d = coords[a] - coords[b]
        A[3 * a:3 * a + 3, j] = d
        A[3 * b:3 * b + 3, j] = -d
    return A


def find_self_stress(topology, coords=None, sv_rtol=1e-10):
    """Self-stress force densities from the right null space of A.

    Singular vectors with singular value below ``sv_rtol`` times the largest
    span the candidate space; a linear program picks a sign-feasible
    combination (cables >= 0, struts <= 0). Raises NoSelfStress when the null
    space is empty and SignInfeasibleSelfStress when it carries no admissible
    vector.
    """
    A = equilibrium_matrix(topology, coords)
    _, s, vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    m = A.shape[1]
    n_null = int(np.sum(s < sv_rtol * smax)) + max(0, m - s.size)
    if n_null == 0:
        raise NoSelfStress("equilibrium matrix has no right null space")
    basis = vt[-n_null:].T  # (m, n_null)
    sign = np.where(topology.is_cable(), 1.0, -1.0)

    if n_null == 1:
        q = basis[:, 0]
        for cand in (q, -q):
            if np.all(sign * cand >= -1e-9 * np.abs(cand).max()):
                q = cand
                break
        else:
            raise SignInfeasibleSelfStress("1-dim null space has mixed signs")
    else:
        q = _sign_feasible_combination(basis, sign)

    q = q / np.abs(q).max()
    resid = float(np.abs(A @ q).max())
    return SelfStress(force_densities=q, residual=resid)


def _sign_feasible_combination(basis, sign):
    # LP: maximize margin t with sign_i * (basis @ c)_i >= t, |c| <= 1
    from scipy.optimize import linprog

    m, k = basis.shape
    # variables: c (k), t (1); maximize t
    a_ub = np.hstack([-(sign[:, None] * basis), np.ones((m, 1))])
    b_ub = np.zeros(m)
    bounds = [(-1.0, 1.0)] * k + [(None, 1.0)]
    res = linprog(
        np.r_[np.zeros(k), -1.0], A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs"
    )
    if not res.success or res.x[-1] <= 1e-12:
        raise SignInfeasibleSelfStress(
            f"{k}-dim null space admits no sign-feasible self-stress"
        )
    return basis @ res.x[:k]


def _free_mask(n_nodes, fixed):
    free = ~np.asarray(fixed, dtype=bool)
    return free.astype(float)


def solve_equilibrium(topology, coords0, fixed, fext=None, tol=DEFAULT_TOL,
                      max_iter=200, dr_max_iter=200_000):
    """Find static equilibrium of the free DOFs. Returns a Configuration.

    ``fixed`` is an (n, 3) bool mask of prescribed DOFs whose values are taken
    from ``coords0``. Newton first; dynamic-relaxation fallback; Newton polish.
    """
    ends = topology.ends()
    ea = topology.ea()
    l0 = topology.rest_lengths()
    is_cable = topology.is_cable()
    n = topology.n_nodes
    fixed = np.asarray(fixed, dtype=bool)
    fext = np.zeros((n, 3)) if fext is None else np.asarray(fext, dtype=float)
    freef = _free_mask(n, fixed)

    x, res, its, singular = _newton(
        coords0, ends, ea, l0, is_cable, fext, fixed, freef, tol, max_iter
    )
    if res >= tol:
        # kinetic-damping fallback (coarse first, Newton polishes quadratically)
        for dr_tol in (max(tol, 1e-3 * res), tol):
            x, dr_its, res = kernels.relax(
                x, ends, ea, l0, is_cable, fext, freef, dr_tol, dr_max_iter
            )
            its += dr_its
            x, res, polish_its, singular = _newton(
                x, ends, ea, l0, is_cable, fext, fixed, freef, tol, max_iter
            )
            its += polish_its
            if res < tol:
                break
        if res >= tol:
            if singular:
                raise MechanismSingularity(
                    f"constrained tangent stiffness singular (residual {res:.3e} N)"
                )
            raise NonConvergence(its, res)

    nf, forces, _ = kernels.internal_forces(x, ends, ea, l0, is_cable)
    reactions = np.where(fixed, -(fext + nf), 0.0)
    overload = bool(np.any(np.abs(forces) >= topology.failure_loads()))
    return Configuration(
        topology=topology, coords=x, forces=forces, fixed=fixed,
        reactions=reactions, residual=float(res), iterations=its, overload=overload,
    )


def _newton(coords0, ends, ea, l0, is_cable, fext, fixed, freef, tol, max_iter):
    """Damped Newton with backtracking line search on the residual max-norm.

    When the plain Newton direction fails (singular tangent or no descent),
    a Levenberg shift lambda*I is added and grown until a descent step
    appears; the shift decays again on success. Returns
    (coords, residual, iterations, singular_flag).
    """
    x = coords0.copy()
    free_idx = np.flatnonzero(~fixed.ravel())
    singular = False

    def residual(xc):
        nf, _, _ = kernels.internal_forces(xc, ends, ea, l0, is_cable)
        r = (fext + nf) * freef
        return r, np.abs(r).max()

    r, res = residual(x)
    lam = 0.0
    eye = np.eye(free_idx.size)
    for it in range(1, max_iter + 1):
        if res < tol:
            return x, res, it - 1, singular
        K = kernels.tangent_matrix(x, ends, ea, l0, is_cable)
        kff = K[np.ix_(free_idx, free_idx)]
        lam_floor = 1e-8 * np.abs(np.diag(kff)).mean() + 1e-30
        stepped = False
        lam_try = lam
        for _ in range(12):
            try:
                dx_free = np.linalg.solve(kff + lam_try * eye, r.ravel()[free_idx])
            except np.linalg.LinAlgError:
                singular = True
                lam_try = max(10.0 * lam_try, lam_floor)
                continue
            if not np.all(np.isfinite(dx_free)):
                singular = True
                lam_try = max(10.0 * lam_try, lam_floor)
                continue
            dx = np.zeros(x.size)
            dx[free_idx] = dx_free
            dx = dx.reshape(x.shape)
            alpha = 1.0
            while alpha > 1e-6:
                r_new, res_new = residual(x + alpha * dx)
                if res_new < res:
                    break
                alpha *= 0.5
            else:
                lam_try = max(10.0 * lam_try, lam_floor)
                continue
            x = x + alpha * dx
            r, res = r_new, res_new
            lam = 0.0 if lam_try < lam_floor else 0.3 * lam_try
            stepped = True
            break
        if not stepped:
            return x, res, it, singular  # stalled even with heavy damping
    return x, res, max_iter, singular


def prestress_support_mask(topology):
    """Statically determinate 3-2-1 pinning of three ground nodes.

    Kills the six rigid-body modes of a free-standing solve without
    introducing reactions in a self-equilibrated state.
    """
    ground = topology.node_ids(ROLE_GROUND)
    if len(ground) < 3:
        raise ValueError("need three ground-contact nodes to regularize")
    fixed = np.zeros((topology.n_nodes, 3), dtype=bool)
    fixed[ground[0]] = (True, True, True)
    fixed[ground[1]] = (True, False, True)
    fixed[ground[2]] = (False, False, True)
    return fixed


def apply_prestress(topology, strut_extension, tol=1e-9, max_iter=200):
    """Nut-turn prestress: extend every strut's rest length and re-equilibrate.

    Returns the unloaded free-standing Configuration (3-2-1 regularized, so
    reactions vanish). ``overload`` flags any member at or past its failure
    load; that is a warning, not an error.
    """
    if strut_extension < 0:
        raise ValueError("strut extension must be non-negative")
    topo = copy.deepcopy(topology)
    for mb in topo.members:
        if mb.kind == "strut":
            mb.rest_length_offset = float(strut_extension)
    coords0 = topo.coords()
    if strut_extension == 0.0:
        m = topo.n_members
        fixed = prestress_support_mask(topo)
        return Configuration(
            topology=topo, coords=coords0, forces=np.zeros(m), fixed=fixed,
            reactions=np.zeros((topo.n_nodes, 3)), residual=0.0,
        )
    fixed = prestress_support_mask(topo)
    return solve_equilibrium(topo, coords0, fixed, tol=tol, max_iter=max_iter)


def support_mask_for_roles(topology, ground=True, top_lateral=False):
    """Support mask: ground nodes fully pinned, optionally top nodes x/y-guided."""
    fixed = np.zeros((topology.n_nodes, 3), dtype=bool)
    if ground:
        for i in topology.node_ids(ROLE_GROUND):
            fixed[i] = (True, True, True)
    if top_lateral:
        from .topology import ROLE_TOP

        for i in topology.node_ids(ROLE_TOP):
            fixed[i, 0] = True
            fixed[i, 1] = True
    return fixed


def solve_static(config, loads=None, terrain=None, tol=DEFAULT_TOL, max_iter=200,
                 top_lateral_guide=False):
    """Equilibrium under external loads with ground nodes pinned on the terrain.

    Starts from the (prestressed) configuration. Ground-contact nodes are
    fully pinned at their current x, y with the terrain's height offset added
    to z. Loads on supported nodes are rejected.
    """
    topo = config.topology
    terrain = Terrain.flat() if terrain is None else terrain
    loads = LoadCase.zero(topo.n_nodes) if loads is None else loads
    fixed = support_mask_for_roles(topo, ground=True, top_lateral=top_lateral_guide)

    ground = topo.node_ids(ROLE_GROUND)
    unknown = set(terrain.offsets) - set(ground)
    if unknown:
        raise ValueError(f"terrain offsets on non-ground nodes: {sorted(unknown)}")
    fully_fixed = {i for i in range(topo.n_nodes) if fixed[i].all()}
    loaded = {int(i) for i in np.flatnonzero(np.abs(loads.forces).sum(axis=1) > 0)}
    if loaded & fully_fixed:
        raise ValueError(
            f"loads applied to supported nodes: {sorted(loaded & fully_fixed)}"
        )

    coords0 = config.coords.copy()
    for i in ground:
        coords0[i, 2] += terrain.offset_for(i)
    return solve_equilibrium(topo, coords0, fixed, fext=loads.forces,
                             tol=tol, max_iter=max_iter)


def tangent_stiffness(config):
    """Tangent stiffness (3n, 3n) at the configuration's coordinates."""
    topo = config.topology
    return kernels.tangent_matrix(
        config.coords, topo.ends(), topo.ea(), topo.rest_lengths(), topo.is_cable()
    )
