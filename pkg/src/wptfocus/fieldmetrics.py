"""Power density, array-gain patterns and power-gain metrics.

Conventions
-----------
The complex field at ``q`` is ``E(q) = sum_l w_l sum_k c_lk(q) exp(-j k d_lk) / d_lk``
with ``c_lk`` the reflection/visibility factor of component ``k``, and the
power density is ``S(q) = P_t / (4 pi) * |E(q)|**2``.  Power gain uses the
same orientation, ``PG = |sum_l h_l w_l|**2``, so that conjugate
beamforming ``w = conj(h)/||h||`` attains ``||h||**2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import kernels
from .beamforming import _weights
from .channel import ChannelVector
from .errors import EmptyGrid, SameSideViolation, SingularPoint, UnknownComponent
from .geometry import Scenario, vec3

# pointwise API treats anything closer than this (in wavelengths) as coincident
_POINT_TOL = 1e-9
# grid mode masks samples closer than this (in wavelengths) to any source
GRID_MIN_DIST = 0.5

QUANTITY_UNITS = {"power_density": "W/m^2", "array_gain": "1"}


def _as_h(h) -> NDArray[np.complex128]:
    return h.aggregate if isinstance(h, ChannelVector) else np.asarray(h, dtype=complex)


def _select(scenario: Scenario, components):
    ks = scenario.component_indices if components is None else tuple(sorted(set(components)))
    known = set(scenario.component_indices)
    bad = [k for k in ks if k not in known]
    if bad:
        raise UnknownComponent(f"unknown multipath component(s) {bad}")
    return 1 in ks, [scenario.reflector(k) for k in ks if k != 1]


def field_at_points(points, w, scenario: Scenario, components=None, min_dist=None,
                    backend="auto"):
    """Raw complex field and kernel status flags at ``points`` (``(P, 3)``)."""
    include_los, refl = _select(scenario, components)
    lam = scenario.wavelength
    return kernels.field_sum(
        np.atleast_2d(points),
        scenario.antenna_positions(),
        _weights(w),
        refl,
        include_los=include_los,
        parallel=scenario.polarization == "parallel",
        elem_exp=scenario.element_exponent,
        boresight=scenario.array.boresight,
        wavelength=lam,
        min_dist=GRID_MIN_DIST * lam if min_dist is None else min_dist,
        backend=backend,
    )


def _raise_status(status: int):
    if status & kernels.SINGULAR:
        raise SingularPoint("field point coincides with an antenna or mirror antenna")
    if status & kernels.WRONG_SIDE:
        raise SameSideViolation("field point is behind a reflector")


def power_density_at(q: ArrayLike, w, scenario: Scenario, components=None,
                     backend="auto") -> float:
    """Power density in W/m^2 at a single point."""
    q = vec3(q)
    e, st = field_at_points(q[None, :], w, scenario, components,
                            min_dist=_POINT_TOL * scenario.wavelength, backend=backend)
    _raise_status(int(st[0]))
    return scenario.tx_power / (4.0 * math.pi) * abs(e[0]) ** 2


@dataclass(frozen=True)
class PlaneSpec:
    """Rectangular sampling of a plane: ``origin + u*axis_u + v*axis_v``."""

    origin: NDArray[np.float64]
    axis_u: NDArray[np.float64]
    axis_v: NDArray[np.float64]
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    step: float = 0.05

    def coordinates(self):
        def axis(lo, hi):
            n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
            return lo + self.step * np.arange(n)

        return axis(*self.u_range), axis(*self.v_range)


def default_plane(scenario: Scenario, step: float = 0.05, height: float = 3.0,
                  overshoot: float = 1.25) -> PlaneSpec:
    """Vertical plane through the array center and the device.

    ``u`` runs horizontally from the array center toward the device up to
    ``overshoot`` times the device range; ``v`` is height above z = 0.
    """
    c = scenario.array.center
    delta = scenario.device - c
    horiz = np.array([delta[0], delta[1], 0.0])
    if np.linalg.norm(horiz) == 0.0:
        horiz = scenario.array.boresight * np.array([1.0, 1.0, 0.0])
    axis_u = horiz / np.linalg.norm(horiz)
    dist = float(np.linalg.norm(horiz))
    return PlaneSpec(
        origin=np.array([c[0], c[1], 0.0]),
        axis_u=axis_u,
        axis_v=np.array([0.0, 0.0, 1.0]),
        u_range=(0.0, overshoot * dist),
        v_range=(step, height),
        step=step,
    )


@dataclass
class FieldGrid:
    """Sampled scalar field on a plane; ``values[i, j]`` sits at ``(u[i], v[j])``.

    Masked samples (too close to a source, or behind a reflector) are NaN.
    """

    origin: NDArray[np.float64]
    axis_u: NDArray[np.float64]
    axis_v: NDArray[np.float64]
    u: NDArray[np.float64]
    v: NDArray[np.float64]
    values: NDArray[np.float64]
    quantity: str = "power_density"
    metadata: dict = field(default_factory=dict)

    @property
    def units(self) -> str:
        return QUANTITY_UNITS.get(self.quantity, "")

    @property
    def step_u(self) -> float:
        return float(self.u[1] - self.u[0]) if len(self.u) > 1 else 0.0

    def points(self) -> NDArray[np.float64]:
        uu, vv = np.meshgrid(self.u, self.v, indexing="ij")
        return self.origin + uu[..., None] * self.axis_u + vv[..., None] * self.axis_v

    def location(self, i: int, j: int) -> NDArray[np.float64]:
        return self.origin + self.u[i] * self.axis_u + self.v[j] * self.axis_v

    def project(self, p: ArrayLike) -> tuple[float, float]:
        rel = np.asarray(p, dtype=float) - self.origin
        return float(rel @ self.axis_u), float(rel @ self.axis_v)

    def nearest_index(self, p: ArrayLike) -> tuple[int, int]:
        pu, pv = self.project(p)
        return int(np.argmin(np.abs(self.u - pu))), int(np.argmin(np.abs(self.v - pv)))

    def write_csv(self, fh: TextIO, comments: Optional[dict] = None) -> None:
        """Row-major CSV over ``(u, v)`` with optional ``#`` metadata lines."""
        for key, val in (comments or {}).items():
            fh.write(f"# {key}: {val}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["u", "v", "x", "y", "z", "value", "quantity", "units"])
        pts = self.points()
        for i, u in enumerate(self.u):
            for j, v in enumerate(self.v):
                x, y, z = pts[i, j]
                wr.writerow([f"{u:.6g}", f"{v:.6g}", f"{x:.6g}", f"{y:.6g}", f"{z:.6g}",
                             repr(float(self.values[i, j])), self.quantity, self.units])


def _grid_from(plane: PlaneSpec, values_flat, quantity, nu, nv, u, v, meta):
    return FieldGrid(
        origin=np.asarray(plane.origin, dtype=float),
        axis_u=np.asarray(plane.axis_u, dtype=float),
        axis_v=np.asarray(plane.axis_v, dtype=float),
        u=u,
        v=v,
        values=values_flat.reshape(nu, nv),
        quantity=quantity,
        metadata=meta,
    )


def _plane_points(plane: PlaneSpec):
    u, v = plane.coordinates()
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = (np.asarray(plane.origin, dtype=float)
           + uu[..., None] * np.asarray(plane.axis_u, dtype=float)
           + vv[..., None] * np.asarray(plane.axis_v, dtype=float))
    return pts.reshape(-1, 3), u, v


def power_density_grid(scenario: Scenario, w, plane: Optional[PlaneSpec] = None,
                       components=None, backend="auto") -> FieldGrid:
    plane = default_plane(scenario) if plane is None else plane
    pts, u, v = _plane_points(plane)
    e, st = field_at_points(pts, w, scenario, components, backend=backend)
    s = scenario.tx_power / (4.0 * math.pi) * np.abs(e) ** 2
    s[st != kernels.OK] = np.nan
    meta = {"components": list(scenario.component_indices if components is None else sorted(set(components)))}
    return _grid_from(plane, s, "power_density", len(u), len(v), u, v, meta)


def power_gain(h, w) -> float:
    """``|sum_l h_l w_l|**2`` for the aggregate channel."""
    return float(abs(np.sum(_as_h(h) * _weights(w))) ** 2)


def pg_miso(h) -> float:
    hv = _as_h(h)
    return float(np.vdot(hv, hv).real)


def pg_siso(h) -> float:
    hv = _as_h(h)
    return pg_miso(hv) / len(hv)


def db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PgReport:
    pg: float
    pg_siso: float
    pg_miso: float
    received_power: float

    @property
    def pg_db(self) -> float:
        return float(db(self.pg))


def pg_report(h, w, scenario: Optional[Scenario] = None, aperture: Optional[float] = None) -> PgReport:
    """Power-gain summary; received power assumes the scenario's ``P_t`` and ``A_r``.

    With an isotropic aperture the received power is ``P_t * PG``; other
    apertures scale it by ``A_r * 4 pi / lambda**2``.
    """
    pg = power_gain(h, w)
    p_r = float("nan")
    if scenario is not None:
        ap = scenario.effective_aperture if aperture is None else aperture
        s = scenario.tx_power * pg * 4.0 * math.pi / scenario.wavelength**2
        p_r = received_power(s, ap)
    return PgReport(pg, pg_siso(h), pg_miso(h), p_r)


def received_power(s, aperture):
    return s * aperture


# ---------------------------------------------------------------------------
# gain patterns
# ---------------------------------------------------------------------------

def nf_gain_at(q: ArrayLike, w, scenario: Scenario, backend="auto") -> float:
    """Near-field array gain ``|sum_l w_l exp(-j k d_l(q))|**2`` at one point."""
    g, st = kernels.nf_gain(vec3(q)[None, :], scenario.antenna_positions(), _weights(w),
                            scenario.wavelength, _POINT_TOL * scenario.wavelength, backend)
    _raise_status(int(st[0]))
    return float(g[0])


def nf_gain_pattern(w, scenario: Scenario, where=None, backend="auto"):
    """Near-field gain over a :class:`PlaneSpec` (returns a grid) or a point array.

    Steering vectors use LOS distances only and unit-modulus entries.
    Points within half a wavelength of an antenna are NaN.
    """
    where = default_plane(scenario) if where is None else where
    lam = scenario.wavelength
    tx = scenario.antenna_positions()
    if isinstance(where, PlaneSpec):
        pts, u, v = _plane_points(where)
        g, st = kernels.nf_gain(pts, tx, _weights(w), lam, GRID_MIN_DIST * lam, backend)
        g[st != kernels.OK] = np.nan
        return _grid_from(where, g, "array_gain", len(u), len(v), u, v, {})
    pts = np.atleast_2d(np.asarray(where, dtype=float))
    g, st = kernels.nf_gain(pts, tx, _weights(w), lam, GRID_MIN_DIST * lam, backend)
    g[st != kernels.OK] = np.nan
    return g


@dataclass
class FarFieldPattern:
    azimuth_deg: NDArray[np.float64]
    elevation_deg: NDArray[np.float64]
    values: NDArray[np.float64]

    def max(self):
        i = int(np.nanargmax(self.values))
        ia, ie = np.unravel_index(i, self.values.shape)
        return float(self.values[ia, ie]), float(self.azimuth_deg[ia]), float(self.elevation_deg[ie])

    def write_csv(self, fh: TextIO) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["azimuth_deg", "elevation_deg", "gain", "gain_db"])
        for i, az in enumerate(self.azimuth_deg):
            for j, el in enumerate(self.elevation_deg):
                g = float(self.values[i, j])
                wr.writerow([f"{az:.6g}", f"{el:.6g}", repr(g), f"{float(db(g)):.2f}"])


def direction(scenario: Scenario, azimuth, elevation):
    """Unit vector(s) at ``azimuth``/``elevation`` (rad) in the array frame.

    Azimuth rotates from boresight toward ``axis_u``; elevation toward ``axis_v``.
    """
    a = scenario.array
    az = np.asarray(azimuth, dtype=float)[..., None]
    el = np.asarray(elevation, dtype=float)[..., None]
    return (np.cos(el) * np.cos(az) * a.boresight
            + np.cos(el) * np.sin(az) * a.axis_u
            + np.sin(el) * a.axis_v)


def ff_gain_pattern(w, scenario: Scenario, azimuth_deg: Optional[Sequence[float]] = None,
                    elevation_deg: Optional[Sequence[float]] = None, backend="auto") -> FarFieldPattern:
    """Far-field gain ``|sum_l w_l exp(+j k u . (p_l - c))|**2`` per direction.

    The default direction grid covers the front hemisphere at 0.5 degree.
    """
    az = np.arange(-90.0, 90.0 + 1e-9, 0.5) if azimuth_deg is None else np.asarray(azimuth_deg, float)
    el = np.arange(-90.0, 90.0 + 1e-9, 0.5) if elevation_deg is None else np.asarray(elevation_deg, float)
    aa, ee = np.meshgrid(np.radians(az), np.radians(el), indexing="ij")
    dirs = direction(scenario, aa.ravel(), ee.ravel())
    rel = scenario.antenna_positions() - scenario.array.center
    g = kernels.ff_gain(dirs, rel, _weights(w), scenario.wavelength, backend)
    return FarFieldPattern(az, el, g.reshape(len(az), len(el)))


def ff_gain_max(w, scenario: Scenario, refine: bool = True, backend="auto") -> float:
    """Maximum far-field gain over all directions, refined around the coarse peak."""
    pat = ff_gain_pattern(w, scenario, np.arange(-90, 90.01, 1.0), np.arange(-90, 90.01, 1.0),
                          backend=backend)
    g, az0, el0 = pat.max()
    if not refine:
        return g
    fine = ff_gain_pattern(w, scenario, np.arange(az0 - 1.5, az0 + 1.5001, 0.02),
                           np.arange(el0 - 1.5, el0 + 1.5001, 0.02), backend=backend)
    return max(g, fine.max()[0])


# ---------------------------------------------------------------------------
# grid reductions
# ---------------------------------------------------------------------------

def find_global_max(grid: FieldGrid):
    """Location and value of the largest sample; ties go to the lowest linear index."""
    vals = grid.values
    if vals.size == 0 or np.all(np.isnan(vals)):
        raise EmptyGrid("grid has no valid samples")
    i = int(np.nanargmax(vals))
    iu, iv = np.unravel_index(i, vals.shape)
    return grid.location(iu, iv), float(vals[iu, iv])


def focal_width(grid: FieldGrid, through: ArrayLike, axis: str = "u") -> float:
    """-3 dB extent of the field along a grid axis, around the sample nearest ``through``.

    Starting at that sample the cut is climbed to its local peak; the width
    is the distance between the linearly interpolated half-power crossings
    on either side, or to the end of the axis where no crossing exists.
    """
    iu, iv = grid.nearest_index(through)
    if axis == "u":
        cut, coord, i0 = grid.values[:, iv], grid.u, iu
    elif axis == "v":
        cut, coord, i0 = grid.values[iu, :], grid.v, iv
    else:
        raise ValueError("axis must be 'u' or 'v'")
    cut = np.where(np.isnan(cut), 0.0, cut)
    n = len(cut)
    if n == 0:
        raise EmptyGrid("empty cut")
    i = i0
    while True:
        nb = [j for j in (i - 1, i + 1) if 0 <= j < n and cut[j] > cut[i]]
        if not nb:
            break
        i = max(nb, key=lambda j: cut[j])
    half = cut[i] / 2.0

    def crossing(step):
        j = i
        while 0 <= j + step < n and cut[j + step] >= half:
            j += step
        if not 0 <= j + step < n:
            return coord[j]
        a, b = cut[j], cut[j + step]
        frac = (a - half) / (a - b) if a != b else 0.0
        return coord[j] + frac * (coord[j + step] - coord[j])

    return float(abs(crossing(1) - crossing(-1)))


def write_far_field_summary(fh: TextIO, g_nf_device: float, g_ff_max: float) -> None:
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["quantity", "gain", "gain_db"])
    wr.writerow(["g_nf_device", repr(float(g_nf_device)), f"{float(db(g_nf_device)):.2f}"])
    wr.writerow(["g_ff_max", repr(float(g_ff_max)), f"{float(db(g_ff_max)):.2f}"])


__all__ = [
    "PlaneSpec",
    "FieldGrid",
    "FarFieldPattern",
    "PgReport",
    "default_plane",
    "field_at_points",
    "power_density_at",
    "power_density_grid",
    "power_gain",
    "pg_siso",
    "pg_miso",
    "pg_report",
    "received_power",
    "nf_gain_at",
    "nf_gain_pattern",
    "ff_gain_pattern",
    "ff_gain_max",
    "direction",
    "find_global_max",
    "focal_width",
    "db",
]
