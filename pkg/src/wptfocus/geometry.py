"""Arrays, planar reflectors and the first-order image-source construction.

Points are plain ``numpy`` arrays with a trailing axis of length 3.  All
functions broadcast over leading axes, so a whole array of antenna
positions can be mirrored or tested for visibility in a single call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import SameSideViolation

SPEED_OF_LIGHT = 299_792_458.0

POLARIZATIONS = ("parallel", "perpendicular")

Vector = NDArray[np.float64]

# relative tolerance applied to reflector half-widths; boundary hits are visible
_EDGE_RTOL = 1e-12


def vec3(x: ArrayLike, y: Optional[float] = None, z: Optional[float] = None) -> Vector:
    """Build a finite 3-vector from ``(x, y, z)`` or from a length-3 sequence."""
    if y is None and z is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def _unit(v: ArrayLike, name: str) -> Vector:
    v = vec3(v)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


def wavelength_of(frequency: float) -> float:
    return SPEED_OF_LIGHT / frequency


@dataclass(frozen=True)
class Ura:
    """Uniform rectangular array.

    ``nx`` elements are placed along ``axis_u`` and ``ny`` along ``axis_v``.
    The spacing is in meters unless ``spacing_in_wavelengths`` is set, in
    which case it is resolved against the carrier wavelength by
    :func:`build_array`.
    """

    center: Vector
    axis_u: Vector
    axis_v: Vector
    nx: int
    ny: int
    spacing: float
    spacing_in_wavelengths: bool = False

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "axis_u", _unit(self.axis_u, "axis_u"))
        object.__setattr__(self, "axis_v", _unit(self.axis_v, "axis_v"))
        if abs(float(np.dot(self.axis_u, self.axis_v))) > 1e-9:
            raise ValueError("array axes must be orthogonal")
        if int(self.nx) < 1 or int(self.ny) < 1:
            raise ValueError("array dimensions must be positive")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def num_antennas(self) -> int:
        return self.nx * self.ny

    @property
    def boresight(self) -> Vector:
        return np.cross(self.axis_u, self.axis_v)

    def spacing_m(self, wavelength: float) -> float:
        return self.spacing * wavelength if self.spacing_in_wavelengths else self.spacing


@dataclass(frozen=True)
class Reflector:
    """Planar specular reflector.

    The reflecting rectangle is centered on ``anchor`` and spans
    ``half_widths[i]`` along ``extent_axes[i]``.  A half-width of
    ``math.inf`` leaves that direction unbounded; ``extent_axes=None``
    marks the entire plane as reflecting.  ``polarization`` overrides the
    scenario-wide Fresnel branch for this surface.
    """

    index: int
    anchor: Vector
    normal: Vector
    eps_r: float = 5.0
    attenuation_db: float = 0.0
    extent_axes: Optional[tuple[Vector, Vector]] = None
    half_widths: Optional[tuple[float, float]] = None
    polarization: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "anchor", vec3(self.anchor))
        if self.polarization is not None and self.polarization not in POLARIZATIONS:
            raise ValueError(f"polarization must be one of {POLARIZATIONS}")
        object.__setattr__(self, "normal", _unit(self.normal, "normal"))
        if self.index < 2:
            raise ValueError("reflector component index must be >= 2 (k=1 is LOS)")
        if not self.eps_r > 1:
            raise ValueError("relative permittivity must exceed 1")
        if self.attenuation_db < 0:
            raise ValueError("attenuation must be non-negative")
        if self.extent_axes is None:
            object.__setattr__(self, "half_widths", None)
            return
        a1 = _unit(self.extent_axes[0], "extent axis")
        a2 = _unit(self.extent_axes[1], "extent axis")
        for a in (a1, a2):
            if abs(float(np.dot(a, self.normal))) > 1e-9:
                raise ValueError("extent axes must lie in the reflector plane")
        if abs(float(np.dot(a1, a2))) > 1e-9:
            raise ValueError("extent axes must be orthogonal")
        if self.half_widths is None or len(self.half_widths) != 2:
            raise ValueError("finite reflector needs two half-widths")
        hw = tuple(float(h) for h in self.half_widths)
        if not all(h > 0 for h in hw):
            raise ValueError("half-widths must be positive")
        object.__setattr__(self, "extent_axes", (a1, a2))
        object.__setattr__(self, "half_widths", hw)

    @property
    def bounded(self) -> bool:
        return self.extent_axes is not None and not all(
            math.isinf(h) for h in self.half_widths
        )

    @property
    def amplitude_factor(self) -> float:
        return 10.0 ** (-self.attenuation_db / 20.0)


@dataclass(frozen=True)
class Scenario:
    """A transmit array, its surroundings and one energy-neutral device.

    ``rx_aperture`` is the effective receive aperture in m^2; ``None``
    selects an isotropic antenna (``wavelength**2 / (4*pi)``).
    ``element_exponent`` sets a ``cos(psi)**q`` element power pattern
    around the array boresight (``q = 0`` is isotropic).
    """

    frequency: float
    tx_power: float
    array: Ura
    device: Vector
    reflectors: tuple[Reflector, ...] = ()
    polarization: str = "parallel"
    rx_aperture: Optional[float] = None
    element_exponent: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "device", vec3(self.device))
        object.__setattr__(self, "reflectors", tuple(self.reflectors))
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")
        if not self.tx_power > 0:
            raise ValueError("transmit power must be positive")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"polarization must be one of {POLARIZATIONS}")
        idx = [r.index for r in self.reflectors]
        if len(set(idx)) != len(idx):
            raise ValueError("reflector component indices must be unique")
        if self.rx_aperture is not None and not self.rx_aperture > 0:
            raise ValueError("receive aperture must be positive")
        if self.element_exponent < 0:
            raise ValueError("element exponent must be non-negative")

    @property
    def wavelength(self) -> float:
        return wavelength_of(self.frequency)

    @property
    def num_antennas(self) -> int:
        return self.array.num_antennas

    @property
    def component_indices(self) -> tuple[int, ...]:
        return (1,) + tuple(sorted(r.index for r in self.reflectors))

    @property
    def effective_aperture(self) -> float:
        if self.rx_aperture is not None:
            return self.rx_aperture
        return self.wavelength**2 / (4.0 * math.pi)

    def polarization_at(self, reflector: Reflector) -> str:
        return reflector.polarization or self.polarization

    def reflector(self, k: int) -> Reflector:
        for r in self.reflectors:
            if r.index == k:
                return r
        raise KeyError(k)

    def antenna_positions(self) -> NDArray[np.float64]:
        return build_array(self.array, self.wavelength)

    def with_device(self, device: ArrayLike) -> "Scenario":
        return replace(self, device=vec3(device))


def build_array(ura: Ura, wavelength: float) -> NDArray[np.float64]:
    """Antenna positions of ``ura`` as an ``(nx*ny, 3)`` array.

    Antenna ``l = j*nx + i`` sits at column ``i`` along ``axis_u`` and
    row ``j`` along ``axis_v``; the centroid is ``ura.center``.
    """
    s = ura.spacing_m(wavelength)
    iu = (np.arange(ura.nx) - (ura.nx - 1) / 2.0) * s
    iv = (np.arange(ura.ny) - (ura.ny - 1) / 2.0) * s
    cu, cv = np.meshgrid(iu, iv)  # shape (ny, nx)
    pos = (
        ura.center
        + cu.reshape(-1, 1) * ura.axis_u
        + cv.reshape(-1, 1) * ura.axis_v
    )
    return pos


def signed_distance(p: ArrayLike, reflector: Reflector) -> NDArray[np.float64]:
    return (np.asarray(p, dtype=float) - reflector.anchor) @ reflector.normal


def mirror_point(p: ArrayLike, reflector: Reflector) -> NDArray[np.float64]:
    """Reflect ``p`` (shape ``(..., 3)``) across the reflector plane."""
    p = np.asarray(p, dtype=float)
    d = signed_distance(p, reflector)
    return p - 2.0 * d[..., None] * reflector.normal


def mirror_array(positions: ArrayLike, reflector: Reflector) -> NDArray[np.float64]:
    return mirror_point(np.atleast_2d(positions), reflector)


def _check_same_side(tx, rx, reflector):
    dt = signed_distance(tx, reflector)
    dr = signed_distance(rx, reflector)
    if np.any(dt * dr <= 0.0):
        raise SameSideViolation(
            f"points are not strictly on the same side of reflector {reflector.index}"
        )
    return dt, dr


def specular_point(tx: ArrayLike, rx: ArrayLike, reflector: Reflector):
    """Point where the specular ray between ``tx`` and ``rx`` hits the plane.

    Returns ``None`` when the segment from the mirrored transmitter to the
    receiver is parallel to the plane (only reachable for scalar inputs).
    Raises :class:`SameSideViolation` when the points straddle the plane.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    dt, dr = _check_same_side(tx, rx, reflector)
    denom = np.abs(dt) + np.abs(dr)
    if np.ndim(denom) == 0 and denom == 0.0:
        return None
    t = np.abs(dt) / denom
    img = mirror_point(tx, reflector)
    s = img + t[..., None] * (rx - img)
    # remove the residual normal component left by rounding
    return s - signed_distance(s, reflector)[..., None] * reflector.normal


def _inside(s, reflector: Reflector):
    if not reflector.bounded:
        return np.ones(np.shape(s)[:-1], dtype=bool)
    rel = s - reflector.anchor
    ok = np.ones(np.shape(s)[:-1], dtype=bool)
    for axis, hw in zip(reflector.extent_axes, reflector.half_widths):
        if math.isinf(hw):
            continue
        ok &= np.abs(rel @ axis) <= hw * (1.0 + _EDGE_RTOL) + _EDGE_RTOL
    return ok


def visibility(tx: ArrayLike, rx: ArrayLike, reflector: Reflector):
    """1 if the specular point lies on the finite reflector, else 0."""
    s = specular_point(tx, rx, reflector)
    if s is None:
        return 0
    vis = _inside(s, reflector).astype(int)
    return int(vis) if vis.ndim == 0 else vis


def incidence_angle(tx: ArrayLike, rx: ArrayLike, reflector: Reflector):
    """Angle between the specular ray and the reflector normal (rad)."""
    dt, dr = _check_same_side(tx, rx, reflector)
    img = mirror_point(tx, reflector)
    d = np.linalg.norm(np.asarray(rx, dtype=float) - img, axis=-1)
    cos_t = np.clip((np.abs(dt) + np.abs(dr)) / d, 0.0, 1.0)
    return np.arccos(cos_t)


def fraunhofer_distance(aperture_diagonal: float, wavelength: float) -> float:
    return 2.0 * aperture_diagonal**2 / wavelength


def aperture_diagonal(ura: Ura, wavelength: float) -> float:
    s = ura.spacing_m(wavelength)
    return math.hypot((ura.nx - 1) * s, (ura.ny - 1) * s)


# ---------------------------------------------------------------------------
# bundled scenarios
# ---------------------------------------------------------------------------

HALLWAY_DISTANCE = 12.3
HALLWAY_HEIGHT = 1.5


def hallway_reflectors(eps_r: float = 5.0, attenuation_db: float = 3.0) -> tuple[Reflector, ...]:
    """Floor (k=2), wall at y=-2 m (k=3) and a 6 m long wall at y=+2 m (k=4).

    A vertically polarized array is TM (parallel) at the floor and TE
    (perpendicular) at the vertical walls.
    """
    floor = Reflector(2, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), eps_r, attenuation_db,
                      polarization="parallel", name="floor")
    wall_neg = Reflector(3, (0.0, -2.0, 0.0), (0.0, 1.0, 0.0), eps_r, attenuation_db,
                         polarization="perpendicular", name="wall -y")
    # finite along x in [0, 6] m, unbounded vertically
    wall_pos = Reflector(
        4,
        (3.0, 2.0, HALLWAY_HEIGHT),
        (0.0, -1.0, 0.0),
        eps_r,
        attenuation_db,
        extent_axes=((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
        half_widths=(3.0, math.inf),
        polarization="perpendicular",
        name="wall +y",
    )
    return (floor, wall_neg, wall_pos)


def hallway_array(center: Sequence[float] = (0.0, 0.0, HALLWAY_HEIGHT)) -> Ura:
    return Ura(
        center=center,
        axis_u=(0.0, 1.0, 0.0),
        axis_v=(0.0, 0.0, 1.0),
        nx=40,
        ny=25,
        spacing=0.75,
        spacing_in_wavelengths=True,
    )


def hallway_3p8(tx_power: float = 10.0) -> Scenario:
    """Default hallway: 3.8 GHz, 40x25 URA, device 12.3 m on boresight."""
    return Scenario(
        frequency=3.8e9,
        tx_power=tx_power,
        array=hallway_array(),
        device=(HALLWAY_DISTANCE, 0.0, HALLWAY_HEIGHT),
        reflectors=hallway_reflectors(),
        polarization="parallel",
        name="hallway-3p8",
    )


def free_space_3p8(tx_power: float = 10.0) -> Scenario:
    return replace(hallway_3p8(tx_power), reflectors=(), name="free-space-3p8")


PRESETS = {
    "hallway-3p8": hallway_3p8,
    "free-space-3p8": free_space_3p8,
}


def scale_scenario(scenario: Scenario, s: float) -> Scenario:
    """Scale every length by ``s`` and the carrier frequency by ``1/s``.

    Reflector extents, array spacing and the receive aperture (an area)
    follow the geometry.  Spacing given in wavelengths is unchanged.
    """
    ura = scenario.array
    arr = replace(
        ura,
        center=ura.center * s,
        spacing=ura.spacing if ura.spacing_in_wavelengths else ura.spacing * s,
    )
    refl = []
    for r in scenario.reflectors:
        hw = None if r.half_widths is None else tuple(h * s for h in r.half_widths)
        refl.append(replace(r, anchor=r.anchor * s, half_widths=hw))
    ap = None if scenario.rx_aperture is None else scenario.rx_aperture * s * s
    return replace(
        scenario,
        frequency=scenario.frequency / s,
        array=arr,
        device=scenario.device * s,
        reflectors=tuple(refl),
        rx_aperture=ap,
    )


__all__ = [
    "SPEED_OF_LIGHT",
    "Ura",
    "Reflector",
    "Scenario",
    "vec3",
    "wavelength_of",
    "build_array",
    "signed_distance",
    "mirror_point",
    "mirror_array",
    "specular_point",
    "visibility",
    "incidence_angle",
    "fraunhofer_distance",
    "aperture_diagonal",
    "hallway_3p8",
    "free_space_3p8",
    "hallway_reflectors",
    "hallway_array",
    "scale_scenario",
    "PRESETS",
]
