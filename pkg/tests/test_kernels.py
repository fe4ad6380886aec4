import json
import os
import subprocess
import sys

import numpy as np

from crutchlab.tensegrity import apply_prestress, kernels


def arrays(column):
    return (column.coords(), column.ends(), column.ea(),
            column.rest_lengths(), column.is_cable())


def test_active_backend_matches_numpy_reference(column, rng):
    coords, ends, ea, l0, ic = arrays(column)
    x = coords + rng.normal(scale=1e-3, size=coords.shape)
    la, fa = kernels.member_forces(x, ends, ea, l0, ic)
    lb, fb = kernels.member_forces_np(x, ends, ea, l0, ic)
    np.testing.assert_allclose(la, lb, rtol=1e-14)
    np.testing.assert_allclose(fa, fb, rtol=1e-12, atol=1e-9)
    nfa = kernels.internal_forces(x, ends, ea, l0, ic)[0]
    nfb = kernels.internal_forces_np(x, ends, ea, l0, ic)[0]
    np.testing.assert_allclose(nfa, nfb, rtol=1e-10, atol=1e-8)
    Ka = kernels.tangent_matrix(x, ends, ea, l0, ic)
    Kb = kernels.tangent_matrix_np(x, ends, ea, l0, ic)
    np.testing.assert_allclose(Ka, Kb, rtol=1e-10, atol=1e-6)


def test_relax_backends_reach_same_equilibrium(column):
    coords, ends, ea, l0, ic = arrays(column)
    l0 = l0 + 2e-4 * (~ic)  # gentle strut extension
    free = np.ones_like(coords)
    free[:4] = 0.0
    fext = np.zeros_like(coords)
    xa, _, ra = kernels.relax(coords, ends, ea, l0, ic, fext, free, 1e-4, 100_000)
    xb, _, rb = kernels.relax_np(coords, ends, ea, l0, ic, fext, free, 1e-4, 100_000)
    assert ra < 1e-4 and rb < 1e-4
    np.testing.assert_allclose(xa, xb, atol=1e-6)


def test_env_flag_forces_numpy_path(column, tmp_path):
    script = tmp_path / "probe.py"
    script.write_text(
        "import json\n"
        "from crutchlab.tensegrity import kernels, build_two_cell_column, apply_prestress\n"
        "cfg = apply_prestress(build_two_cell_column(), 2e-3)\n"
        "print(json.dumps({'backend': kernels.backend_name(),"
        " 'forces': cfg.forces.tolist()}))\n"
    )
    env = dict(os.environ, CRUTCHLAB_NUMBA="0")
    out = subprocess.run([sys.executable, str(script)], env=env,
                         capture_output=True, text=True, check=True)
    payload = json.loads(out.stdout)
    assert payload["backend"] == "numpy"
    here = apply_prestress(column, 2e-3)
    np.testing.assert_allclose(np.array(payload["forces"]), here.forces,
                               rtol=1e-8, atol=1e-7)
