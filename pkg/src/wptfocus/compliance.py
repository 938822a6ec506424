"""Exposure limits, receivable-power budgets and grid compliance reports.

Power-density limits follow EU 1999/519/EC and FCC 47 CFR 1.1310:
10 W/m^2 above a regional corner frequency (2 GHz EU, 1.5 GHz FCC),
decreasing linearly with frequency below it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyGrid, NonpositiveFrequency
from .fieldmetrics import FieldGrid, db, ff_gain_max, nf_gain_pattern, PlaneSpec
from .geometry import SPEED_OF_LIGHT, Scenario

S_MAX_FLAT = 10.0
CORNER_FREQUENCY = {"EU": 2.0e9, "FCC": 1.5e9}

REFERENCE_FREQUENCIES = (917e6, 2.4e9, 3.8e9, 6.0e9, 30e9)

# max S may exceed the limit by this much before a grid is flagged
COMPLIANCE_TOL_DB = 0.01


@dataclass(frozen=True)
class RegulatoryProfile:
    region: str = "EU"
    eirp_limit_w: Optional[float] = None

    def __post_init__(self):
        if self.region not in CORNER_FREQUENCY:
            raise ValueError(f"unknown region {self.region!r}; choose from {sorted(CORNER_FREQUENCY)}")

    def s_max(self, frequency: float) -> float:
        return s_max(frequency, self.region)


def s_max(frequency: float, region: str = "EU") -> float:
    if frequency <= 0:
        raise NonpositiveFrequency("frequency must be positive")
    try:
        corner = CORNER_FREQUENCY[region]
    except KeyError:
        raise ValueError(f"unknown region {region!r}") from None
    if frequency >= corner:
        return S_MAX_FLAT
    return S_MAX_FLAT * frequency / corner


def isotropic_aperture(frequency: float) -> float:
    if frequency <= 0:
        raise NonpositiveFrequency("frequency must be positive")
    lam = SPEED_OF_LIGHT / frequency
    return lam * lam / (4.0 * math.pi)


def max_receivable_power(frequency: float, s: float = S_MAX_FLAT) -> float:
    """Power through an isotropic antenna at incident density ``s`` (W)."""
    return s * isotropic_aperture(frequency)


@dataclass(frozen=True)
class BudgetRow:
    frequency_hz: float
    aperture_cm2: float
    s_max_w_per_m2: float
    p_r_max_mw: float


def budget_table(frequencies: Iterable[float] = REFERENCE_FREQUENCIES, mode: str = "flat10",
                 region: str = "EU") -> list[BudgetRow]:
    """Receivable-power budget per frequency.

    ``flat10`` applies 10 W/m^2 at every frequency; ``region-scaled``
    applies the regional limit :func:`s_max`.
    """
    if mode not in ("flat10", "region-scaled"):
        raise ValueError(f"unknown mode {mode!r}")
    rows = []
    for f in frequencies:
        a = isotropic_aperture(f)
        s = S_MAX_FLAT if mode == "flat10" else s_max(f, region)
        rows.append(BudgetRow(float(f), a * 1e4, s, s * a * 1e3))
    return rows


def format_budget_csv(rows: Sequence[BudgetRow]) -> str:
    lines = ["frequency_hz,aperture_cm2,s_max_w_per_m2,p_r_max_mw"]
    for r in rows:
        lines.append(f"{r.frequency_hz:.6g},{r.aperture_cm2:.4g},{r.s_max_w_per_m2:.6g},{r.p_r_max_mw:.4g}")
    return "\n".join(lines) + "\n"


@dataclass
class ComplianceReport:
    max_power_density_w_per_m2: float
    max_location_m: list
    device_power_density_w_per_m2: float
    s_max_w_per_m2: float
    compliant: bool
    margin_db: float
    eirp_w: float
    g_ff_max_db: float
    g_nf_max_db: float
    tx_power_w: float
    region: str
    exclusion_radius_m: float
    eirp_compliant: Optional[bool] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def compliance_report(
    scenario: Scenario,
    w,
    grid: FieldGrid,
    profile: RegulatoryProfile = RegulatoryProfile(),
    exclusion_radius: float = 0.0,
    nf_plane: Optional[PlaneSpec] = None,
) -> ComplianceReport:
    """Check a power-density grid against the profile's limit.

    Samples closer than ``exclusion_radius`` to the array plane are not
    assessed.  The near-field gain maximum is evaluated on ``nf_plane``
    (by default the same sampling as ``grid``).
    """
    pts = grid.points()
    dist = np.abs((pts - scenario.array.center) @ scenario.array.boresight)
    vals = np.where(dist >= exclusion_radius, grid.values, np.nan)
    if vals.size == 0 or np.all(np.isnan(vals)):
        raise EmptyGrid("no assessable grid samples")
    i = int(np.nanargmax(vals))
    iu, iv = np.unravel_index(i, vals.shape)
    s_peak = float(vals[iu, iv])
    limit = profile.s_max(scenario.frequency)
    margin = float(db(limit / s_peak)) if s_peak > 0 else math.inf

    from .fieldmetrics import power_density_at

    s_dev = power_density_at(scenario.device, w, scenario, grid.metadata.get("components"))
    g_ff = ff_gain_max(w, scenario)
    eirp = scenario.tx_power * g_ff

    if nf_plane is None:
        nf_plane = PlaneSpec(grid.origin, grid.axis_u, grid.axis_v,
                             (float(grid.u[0]), float(grid.u[-1])),
                             (float(grid.v[0]), float(grid.v[-1])),
                             grid.step_u or 1.0)
    g_nf = nf_gain_pattern(w, scenario, nf_plane)
    g_nf_max = float(np.nanmax(g_nf.values))

    return ComplianceReport(
        max_power_density_w_per_m2=s_peak,
        max_location_m=[float(x) for x in grid.location(iu, iv)],
        device_power_density_w_per_m2=float(s_dev),
        s_max_w_per_m2=limit,
        compliant=bool(margin >= -COMPLIANCE_TOL_DB),
        margin_db=margin,
        eirp_w=float(eirp),
        g_ff_max_db=float(db(g_ff)),
        g_nf_max_db=float(db(g_nf_max)),
        tx_power_w=scenario.tx_power,
        region=profile.region,
        exclusion_radius_m=exclusion_radius,
        eirp_compliant=None if profile.eirp_limit_w is None else bool(eirp <= profile.eirp_limit_w),
    )


__all__ = [
    "RegulatoryProfile",
    "ComplianceReport",
    "BudgetRow",
    "REFERENCE_FREQUENCIES",
    "s_max",
    "isotropic_aperture",
    "max_receivable_power",
    "budget_table",
    "format_budget_csv",
    "compliance_report",
]
