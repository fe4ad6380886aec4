"""Hot numeric kernels for the structural solver.

Every kernel exists twice: a plain-numpy implementation (``*_np``) and a
numba ``@njit`` build of the same loop code. Which one is exported is decided
once at import time from the ``CRUTCHLAB_NUMBA`` environment variable:

* unset / ``auto`` -- use numba when importable, numpy otherwise
* ``0`` / ``false`` / ``no``  -- force the pure-numpy path
* anything else -- require numba (ImportError if missing)

Both paths implement identical arithmetic; ``benchmarks/bench_kernels.py``
compares their speed.

Conventions: ``coords`` is (n, 3), ``ends`` is (m, 2) int64, member axial
force is positive in tension, cables are tension-only (clamped at zero,
slack cables contribute nothing to forces or stiffness).
"""

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "member_lengths",
    "member_forces",
    "internal_forces",
    "tangent_matrix",
    "relax",
]


_VISCOSITY = 0.98  # per-step velocity retention in dynamic relaxation
_RESET_GAP = 15    # minimum steps between kinetic-energy resets


def _numba_requested():
    flag = os.environ.get("CRUTCHLAB_NUMBA", "auto").strip().lower()
    if flag in ("", "auto"):
        return None
    return flag not in ("0", "false", "no", "off")


def member_lengths_np(coords, ends):
    d = coords[ends[:, 1]] - coords[ends[:, 0]]
    return np.sqrt((d * d).sum(axis=1))


def member_forces_np(coords, ends, ea, l0, is_cable):
    """Axial force per member (tension positive, slack cables -> 0)."""
    lengths = member_lengths_np(coords, ends)
    f = ea * (lengths - l0) / l0
    f[is_cable & (f < 0.0)] = 0.0
    return lengths, f


def internal_forces_np(coords, ends, ea, l0, is_cable):
    """Nodal force exerted by the members on each node, plus member state."""
    lengths, f = member_forces_np(coords, ends, ea, l0, is_cable)
    d = coords[ends[:, 1]] - coords[ends[:, 0]]
    u = d / lengths[:, None]
    pull = f[:, None] * u
    nf = np.zeros_like(coords)
    np.add.at(nf, ends[:, 0], pull)
    np.add.at(nf, ends[:, 1], -pull)
    return nf, f, lengths


def tangent_matrix_np(coords, ends, ea, l0, is_cable):
    """Tangent stiffness K = -d(internal forces)/d(coords), (3n, 3n) dense.

    Material part (EA/L0) u u^T plus geometric part (f/L)(I - u u^T);
    slack cables are excluded from both.
    """
    n = coords.shape[0]
    lengths, f = member_forces_np(coords, ends, ea, l0, is_cable)
    d = coords[ends[:, 1]] - coords[ends[:, 0]]
    u = d / lengths[:, None]
    slack = is_cable & (lengths < l0)
    kmat = np.where(slack, 0.0, ea / l0)
    kgeo = np.where(slack, 0.0, f / lengths)
    eye = np.eye(3)
    uu = u[:, :, None] * u[:, None, :]
    blocks = kmat[:, None, None] * uu + kgeo[:, None, None] * (eye - uu)
    K = np.zeros((3 * n, 3 * n))
    for j in range(ends.shape[0]):
        a, b = ends[j]
        sa, sb = slice(3 * a, 3 * a + 3), slice(3 * b, 3 * b + 3)
        K[sa, sa] += blocks[j]
        K[sb, sb] += blocks[j]
        K[sa, sb] -= blocks[j]
        K[sb, sa] -= blocks[j]
    return K


def _nodal_masses_np(x, ends, ea, l0, is_cable):
    lengths, f = member_forces_np(x, ends, ea, l0, is_cable)
    k_inc = ea / l0 + np.abs(f) / lengths
    mass = np.zeros(x.shape[0])
    np.add.at(mass, ends[:, 0], k_inc)
    np.add.at(mass, ends[:, 1], k_inc)
    return np.maximum(2.0 * mass, 1e-12)[:, None]


def relax_np(coords, ends, ea, l0, is_cable, fext, free, tol, max_iter):
    """Dynamic relaxation with kinetic damping on the free DOFs.

    Returns (coords, iterations, residual_inf_norm). Fictitious nodal masses
    follow the incident-stiffness rule; they are frozen between kinetic-energy
    resets so the pseudo-dynamics stay conservative, a light viscous term
    bleeds stiff-mode oscillation, and resets are spaced at least
    ``_RESET_GAP`` steps apart so soft modes keep making progress.
    """
    x = coords.copy()
    v = np.zeros_like(x)
    mass = _nodal_masses_np(x, ends, ea, l0, is_cable)
    ke_prev = 0.0
    last_reset = 0
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        nf, f, lengths = internal_forces_np(x, ends, ea, l0, is_cable)
        r = (fext + nf) * free
        res = np.abs(r).max()
        if res < tol:
            return x, it, res
        v = _VISCOSITY * v + r / mass
        x += v * free
        ke = float((mass * v * v).sum())
        if ke < ke_prev and it - last_reset >= _RESET_GAP:
            v[:] = 0.0
            ke_prev = 0.0
            last_reset = it
            mass = _nodal_masses_np(x, ends, ea, l0, is_cable)
        else:
            ke_prev = max(ke, ke_prev)
    return x, it, res


def _relax_loop(coords, ends, ea, l0, is_cable, fext, free, tol, max_iter):
    n = coords.shape[0]
    m = ends.shape[0]
    x = coords.copy()
    v = np.zeros((n, 3))
    mass = np.zeros(n)
    refresh_mass = True
    ke_prev = 0.0
    last_reset = 0
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        r = fext.copy()
        if refresh_mass:
            mass[:] = 0.0
        for j in range(m):
            a = ends[j, 0]
            b = ends[j, 1]
            dx = x[b, 0] - x[a, 0]
            dy = x[b, 1] - x[a, 1]
            dz = x[b, 2] - x[a, 2]
            length = np.sqrt(dx * dx + dy * dy + dz * dz)
            f = ea[j] * (length - l0[j]) / l0[j]
            if is_cable[j] and f < 0.0:
                f = 0.0
            c = f / length
            r[a, 0] += c * dx
            r[a, 1] += c * dy
            r[a, 2] += c * dz
            r[b, 0] -= c * dx
            r[b, 1] -= c * dy
            r[b, 2] -= c * dz
            if refresh_mass:
                k_inc = ea[j] / l0[j] + abs(f) / length
                mass[a] += k_inc
                mass[b] += k_inc
        if refresh_mass:
            for i in range(n):
                mass[i] = max(2.0 * mass[i], 1e-12)
            refresh_mass = False
        res = 0.0
        for i in range(n):
            for c3 in range(3):
                ri = r[i, c3] * free[i, c3]
                r[i, c3] = ri
                if abs(ri) > res:
                    res = abs(ri)
        if res < tol:
            return x, it, res
        ke = 0.0
        for i in range(n):
            for c3 in range(3):
                v[i, c3] = _VISCOSITY * v[i, c3] + r[i, c3] / mass[i]
                x[i, c3] += v[i, c3] * free[i, c3]
                ke += mass[i] * v[i, c3] * v[i, c3]
        if ke < ke_prev and it - last_reset >= _RESET_GAP:
            v[:] = 0.0
            ke_prev = 0.0
            last_reset = it
            refresh_mass = True
        elif ke > ke_prev:
            ke_prev = ke
    return x, it, res


def _member_forces_loop(coords, ends, ea, l0, is_cable):
    m = ends.shape[0]
    lengths = np.empty(m)
    f = np.empty(m)
    for j in range(m):
        a = ends[j, 0]
        b = ends[j, 1]
        dx = coords[b, 0] - coords[a, 0]
        dy = coords[b, 1] - coords[a, 1]
        dz = coords[b, 2] - coords[a, 2]
        lengths[j] = np.sqrt(dx * dx + dy * dy + dz * dz)
        fj = ea[j] * (lengths[j] - l0[j]) / l0[j]
        if is_cable[j] and fj < 0.0:
            fj = 0.0
        f[j] = fj
    return lengths, f


def _internal_forces_loop(coords, ends, ea, l0, is_cable):
    n = coords.shape[0]
    m = ends.shape[0]
    lengths = np.empty(m)
    f = np.empty(m)
    nf = np.zeros((n, 3))
    for j in range(m):
        a = ends[j, 0]
        b = ends[j, 1]
        dx = coords[b, 0] - coords[a, 0]
        dy = coords[b, 1] - coords[a, 1]
        dz = coords[b, 2] - coords[a, 2]
        length = np.sqrt(dx * dx + dy * dy + dz * dz)
        fj = ea[j] * (length - l0[j]) / l0[j]
        if is_cable[j] and fj < 0.0:
            fj = 0.0
        lengths[j] = length
        f[j] = fj
        c = fj / length
        nf[a, 0] += c * dx
        nf[a, 1] += c * dy
        nf[a, 2] += c * dz
        nf[b, 0] -= c * dx
        nf[b, 1] -= c * dy
        nf[b, 2] -= c * dz
    return nf, f, lengths


def _tangent_matrix_loop(coords, ends, ea, l0, is_cable):
    n = coords.shape[0]
    m = ends.shape[0]
    K = np.zeros((3 * n, 3 * n))
    for j in range(m):
        a = ends[j, 0]
        b = ends[j, 1]
        dx = coords[b, 0] - coords[a, 0]
        dy = coords[b, 1] - coords[a, 1]
        dz = coords[b, 2] - coords[a, 2]
        length = np.sqrt(dx * dx + dy * dy + dz * dz)
        f = ea[j] * (length - l0[j]) / l0[j]
        if is_cable[j] and f < 0.0:
            continue
        kmat = ea[j] / l0[j]
        kgeo = f / length
        ux = dx / length
        uy = dy / length
        uz = dz / length
        u = (ux, uy, uz)
        for p in range(3):
            for q in range(3):
                blk = (kmat - kgeo) * u[p] * u[q]
                if p == q:
                    blk += kgeo
                K[3 * a + p, 3 * a + q] += blk
                K[3 * b + p, 3 * b + q] += blk
                K[3 * a + p, 3 * b + q] -= blk
                K[3 * b + p, 3 * a + q] -= blk
    return K


_want = _numba_requested()
USE_NUMBA = False
if _want is not False:
    try:
        from numba import njit

        USE_NUMBA = True
    except ImportError:
        if _want is True:
            raise
        USE_NUMBA = False

if USE_NUMBA:
    _jit = njit(cache=True)
    _member_forces_jit = _jit(_member_forces_loop)
    _internal_forces_jit = _jit(_internal_forces_loop)
    _tangent_matrix_jit = _jit(_tangent_matrix_loop)
    _relax_jit = _jit(_relax_loop)

    def member_forces(coords, ends, ea, l0, is_cable):
        return _member_forces_jit(coords, ends, ea, l0, is_cable)

    def internal_forces(coords, ends, ea, l0, is_cable):
        return _internal_forces_jit(coords, ends, ea, l0, is_cable)

    def tangent_matrix(coords, ends, ea, l0, is_cable):
        return _tangent_matrix_jit(coords, ends, ea, l0, is_cable)

    def relax(coords, ends, ea, l0, is_cable, fext, free, tol, max_iter):
        return _relax_jit(coords, ends, ea, l0, is_cable, fext, free, tol, max_iter)

else:
    member_forces = member_forces_np
    internal_forces = internal_forces_np
    tangent_matrix = tangent_matrix_np
    relax = relax_np

member_lengths = member_lengths_np


def backend_name():
    """Human-readable name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
