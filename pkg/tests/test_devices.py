import numpy as np
import pytest

from crutchlab.tensegrity import (
    DeviceModel,
    LoadCase,
    Terrain,
    axial_load_profile,
    check_member_failure,
    comparison_device_profile,
    spring_displacement,
    terrain_conformance,
)
from crutchlab.tensegrity.devices import (
    CALIBRATION_TARGETS_KN_PER_M,
    RIGID_STIFFNESS_N_PER_M,
)


def spring():
    return DeviceModel("spring", k=10_800.0, travel=0.035, k_bottom=200_000.0)


# ---------------------------------------------------------------- analytic devices

def test_spring_below_knee():
    assert spring_displacement(spring(), 300.0) == pytest.approx(300.0 / 10_800.0, abs=1e-9)


def test_spring_knee_location():
    m = spring()
    knee = m.k * m.travel
    assert knee == pytest.approx(378.0, abs=1e-9)
    assert spring_displacement(m, knee) == pytest.approx(0.035, abs=1e-9)


def test_spring_above_knee():
    expected = 0.035 + 122.0 / 200_000.0
    assert spring_displacement(spring(), 500.0) == pytest.approx(expected, abs=1e-9)


def test_spring_profile_piecewise_exact():
    prof = comparison_device_profile(spring(), max_load=1100.0, steps=22)
    for load, disp in zip(prof.load_N, prof.displacement_m):
        assert disp == pytest.approx(spring_displacement(spring(), load), abs=1e-9)


def test_rigid_profile():
    prof = comparison_device_profile(DeviceModel("rigid"), max_load=1000.0, steps=10)
    np.testing.assert_allclose(prof.displacement_m, prof.load_N / RIGID_STIFFNESS_N_PER_M)
    assert prof.displacement_m[-1] <= 1e-4  # 0.1 mm at 1000 N


def test_device_model_validation():
    with pytest.raises(ValueError):
        DeviceModel("hover")
    with pytest.raises(ValueError):
        DeviceModel("spring", k=-1.0)
    with pytest.raises(ValueError):
        DeviceModel("tensegrity")


# ---------------------------------------------------------------- tensegrity profile

def test_profile_starts_at_origin(calibrated):
    prof = axial_load_profile(calibrated, max_load=200.0, steps=10)
    assert prof.load_N[0] == 0.0
    assert prof.displacement_m[0] == 0.0
    assert prof.secant_Npm[0] == pytest.approx(prof.tangent_Npm[0])


def test_profile_monotone_displacement(calibrated):
    prof = axial_load_profile(calibrated, max_load=1100.0, steps=22)
    assert np.all(np.diff(prof.displacement_m) >= 0)


def test_calibrated_near_zero_tangent_hits_anchor(calibrated):
    prof = axial_load_profile(calibrated, max_load=1100.0, steps=22)
    k0_target = CALIBRATION_TARGETS_KN_PER_M[0] * 1e3
    assert abs(prof.tangent_Npm[0] - k0_target) <= 0.30 * k0_target


def test_calibrated_stiffening_ratio(calibrated):
    prof = axial_load_profile(calibrated, max_load=1100.0, steps=22)
    assert prof.tangent_at(1000.0) >= 5.0 * prof.tangent_Npm[0]
    assert prof.tangent_at(1000.0) > prof.tangent_at(50.0)


def test_profile_requires_ten_steps(calibrated):
    with pytest.raises(ValueError):
        axial_load_profile(calibrated, max_load=100.0, steps=5)


def test_profile_csv_header(calibrated):
    prof = axial_load_profile(calibrated, max_load=200.0, steps=10)
    assert prof.to_csv().splitlines()[0] == "load_N,displacement_m,secant_Npm,tangent_Npm"


# ---------------------------------------------------------------- terrain conformance

def raised_side_direction(topology, raised_nodes):
    coords = topology.coords()
    center = coords[topology.node_ids("ground-contact"), :2].mean(axis=0)
    d = coords[list(raised_nodes), :2].mean(axis=0) - center
    return d / np.linalg.norm(d)


def table_model_horizontal_push(topology, raised_nodes, height):
    """Rigid 4-leg table oracle: fit the foot plane, tilt the normal force.

    A vertical load on a plate whose feet define an inclined plane feels a
    horizontal push proportional to the downhill gradient -(a, b) of the
    plane z = a x + b y + c.
    """
    coords = topology.coords()
    ground = topology.node_ids("ground-contact")
    xy = coords[ground, :2]
    z = np.array([height if g in set(raised_nodes) else 0.0 for g in ground])
    design = np.column_stack([xy, np.ones(len(ground))])
    a, b, _ = np.linalg.lstsq(design, z, rcond=None)[0]
    return -np.array([a, b])


def test_flat_symmetric_feedback_is_vertical(calibrated):
    _, fb = terrain_conformance(calibrated)
    net = fb[:, :2].sum(axis=0)
    assert np.abs(net).max() < 1e-6
    assert fb[:, 2].sum() == pytest.approx(500.0, abs=1e-6)


def test_raised_terrain_feedback_points_away_from_bump(calibrated):
    raised = [0, 1]
    terrain = Terrain.raised(raised, 5e-3)
    solved, fb = terrain_conformance(calibrated, terrain=terrain)
    assert solved.residual < 1e-6
    ic = solved.topology.is_cable()
    assert solved.forces[ic].min() >= -1e-9
    net = fb[:, :2].sum(axis=0)
    assert np.linalg.norm(net) > 1e-3
    uphill = raised_side_direction(solved.topology, raised)
    assert net @ uphill < 0
    oracle = table_model_horizontal_push(solved.topology, raised, 5e-3)
    assert net @ oracle > 0  # same half-plane as the rigid-table push
    assert fb[:, 2].sum() == pytest.approx(500.0, abs=1e-6)


def test_raised_terrain_survives_without_collapse(calibrated):
    solved, _ = terrain_conformance(calibrated, terrain=Terrain.raised([0, 1], 5e-3))
    assert not solved.overload


# ---------------------------------------------------------------- failure checks

def test_unloaded_calibrated_state_has_no_failures(calibrated):
    report = check_member_failure(calibrated)
    assert not report.entries
    assert not report.module_overloaded


def test_synthetic_overloaded_cable_listed(calibrated):
    import copy

    cfg = copy.deepcopy(calibrated)
    cable_idx = next(i for i, mb in enumerate(cfg.topology.members) if mb.kind == "cable")
    cfg.forces[cable_idx] = 1600.0
    report = check_member_failure(cfg)
    assert [e["member"] for e in report.entries] == [cfg.topology.members[cable_idx].id]
    assert report.entries[0]["limit_N"] == 1500.0


def test_module_flag_at_2500_newton_top_load(calibrated):
    report = check_member_failure(calibrated, top_load=2500.0)
    assert report.module_overloaded
