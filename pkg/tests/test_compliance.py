import json
import math
from dataclasses import replace

import numpy as np
import pytest

from wptfocus.beamforming import spherical_los_bf, spherical_smc_bf
from wptfocus.compliance import (
    REFERENCE_FREQUENCIES,
    RegulatoryProfile,
    budget_table,
    compliance_report,
    format_budget_csv,
    isotropic_aperture,
    max_receivable_power,
    s_max,
)
from wptfocus.errors import EmptyGrid, NonpositiveFrequency
from wptfocus.fieldmetrics import default_plane, power_density_grid


def test_s_max_rules():
    assert s_max(3.8e9, "EU") == 10.0
    assert s_max(1.0e9, "EU") == pytest.approx(5.0)
    assert s_max(1.5e9, "FCC") == 10.0
    assert s_max(0.75e9, "FCC") == pytest.approx(5.0)
    with pytest.raises(NonpositiveFrequency):
        s_max(0.0)
    with pytest.raises(ValueError):
        s_max(1e9, "XX")


def test_max_receivable_power_rows():
    for f, a_cm2, p_mw in [(917e6, 85, 85), (3.8e9, 5, 5), (30e9, 0.08, 0.08)]:
        assert isotropic_aperture(f) * 1e4 == pytest.approx(a_cm2, rel=0.03)
        assert max_receivable_power(f, 10.0) * 1e3 == pytest.approx(p_mw, rel=0.03)
    with pytest.raises(NonpositiveFrequency):
        max_receivable_power(-1.0)


def test_budget_table_modes():
    rows = budget_table()
    assert [r.frequency_hz for r in rows] == list(REFERENCE_FREQUENCIES)
    assert budget_table([]) == []
    eu = budget_table([917e6], "region-scaled", "EU")[0]
    assert eu.p_r_max_mw == pytest.approx(10 * 917 / 2000 * isotropic_aperture(917e6) * 1e3)
    assert eu.p_r_max_mw == pytest.approx(39, abs=0.5)
    with pytest.raises(ValueError):
        budget_table(mode="bogus")


def test_budget_is_inverse_square_in_frequency():
    rows = budget_table()
    p = np.array([r.p_r_max_mw for r in rows])
    f = np.array([r.frequency_hz for r in rows])
    assert np.all(np.diff(p) < 0)
    np.testing.assert_allclose(p * f**2, p[0] * f[0] ** 2, rtol=1e-12)


def test_csv_format():
    assert format_budget_csv([]) == "frequency_hz,aperture_cm2,s_max_w_per_m2,p_r_max_mw\n"
    line = format_budget_csv(budget_table([3.8e9])).splitlines()[1]
    assert line == "3.8e+09,4.953,10,4.953"


def test_profile_validation():
    with pytest.raises(ValueError):
        RegulatoryProfile("XX")


@pytest.fixture(scope="module")
def coarse(hallway):
    plane = default_plane(hallway, step=0.1)
    w = spherical_smc_bf(hallway)
    return plane, w, power_density_grid(hallway, w, plane)


def test_report_focus_near_device(hallway, coarse):
    plane, w, grid = coarse
    rep = compliance_report(hallway, w, grid, nf_plane=plane)
    assert np.linalg.norm(np.array(rep.max_location_m) - hallway.device) < 0.5
    assert rep.compliant
    assert rep.eirp_w >= hallway.tx_power
    assert rep.g_ff_max_db < rep.g_nf_max_db
    doc = json.loads(rep.to_json())
    for key in ("max_power_density_w_per_m2", "device_power_density_w_per_m2", "margin_db", "eirp_w"):
        assert key in doc


def test_report_boundary_and_monotone(hallway, coarse):
    plane, w, grid = coarse
    rep = compliance_report(hallway, w, grid, nf_plane=plane)
    # scale P_t so that max S equals S_max exactly
    k = rep.s_max_w_per_m2 / rep.max_power_density_w_per_m2
    sc = replace(hallway, tx_power=hallway.tx_power * k)
    g2 = replace(grid, values=grid.values * k)
    edge = compliance_report(sc, w, g2, nf_plane=plane)
    assert edge.compliant
    assert edge.margin_db == pytest.approx(0.0, abs=1e-9)
    flags = []
    for scale in (0.5, 1.0, 2.0, 100.0):
        sc = replace(hallway, tx_power=hallway.tx_power * k * scale)
        flags.append(compliance_report(sc, w, replace(grid, values=grid.values * k * scale),
                                       nf_plane=plane).compliant)
    assert flags == sorted(flags, reverse=True)
    assert flags[-1] is False


def test_report_los_peak_before_device(hallway):
    plane = default_plane(hallway, step=0.1)
    w = spherical_los_bf(hallway)
    grid = power_density_grid(hallway, w, plane, components=[1])
    rep = compliance_report(hallway, w, grid, nf_plane=plane)
    assert 0.0 < rep.max_location_m[0] < 12.3 - 0.5


def test_exclusion_radius(hallway, coarse):
    plane, w, grid = coarse
    rep = compliance_report(hallway, w, grid, exclusion_radius=13.0, nf_plane=plane)
    assert rep.max_location_m[0] >= 13.0
    with pytest.raises(EmptyGrid):
        compliance_report(hallway, w, grid, exclusion_radius=1e3, nf_plane=plane)


def test_eirp_limit(hallway, coarse):
    plane, w, grid = coarse
    rep = compliance_report(hallway, w, grid, RegulatoryProfile("EU", eirp_limit_w=1.0), nf_plane=plane)
    assert rep.eirp_compliant is False
    assert rep.eirp_w == pytest.approx(hallway.tx_power * 10 ** (rep.g_ff_max_db / 10), rel=1e-12)
    assert math.isfinite(rep.margin_db)
