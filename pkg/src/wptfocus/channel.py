"""Narrowband channel synthesis: LOS plus first-order specular reflections.

Coefficients are Friis-normalized field transmission factors, so
``abs(h)**2`` is the power ratio between one isotropic transmit antenna
and an isotropic receive antenna.  A reflected path is treated as a LOS
path from the mirrored antenna, scaled by the Fresnel coefficient at the
specular point, a per-reflection attenuation and a visibility gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import geometry as geo
from .errors import UnknownComponent, ZeroDistance
from .geometry import Reflector, Scenario

# upper cap on the linear SNR so the noise scale stays representable
SNR_CAP = 1e12


@dataclass(frozen=True)
class ChannelVector:
    """Per-component channel coefficients over the ``L`` transmit antennas."""

    wavelength: float
    components: dict[int, NDArray[np.complex128]] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.components.values()}
        if len(lengths) > 1:
            raise ValueError("all components must have the same length")

    @property
    def num_antennas(self) -> int:
        return len(next(iter(self.components.values())))

    @property
    def aggregate(self) -> NDArray[np.complex128]:
        return np.sum(np.stack(list(self.components.values())), axis=0)

    def __getitem__(self, k: int) -> NDArray[np.complex128]:
        return self.components[k]

    @classmethod
    def from_vector(cls, h: ArrayLike, wavelength: float = float("nan")) -> "ChannelVector":
        return cls(wavelength, {0: np.asarray(h, dtype=complex)})


@dataclass(frozen=True)
class CsiQuality:
    """Channel SNR of the CSI estimate (linear, per antenna)."""

    snr: float

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError("channel SNR must be positive")

    @classmethod
    def from_db(cls, snr_db: float) -> "CsiQuality":
        return cls(10.0 ** (snr_db / 10.0))

    def noise_variance(self, h: ArrayLike) -> float:
        h = _as_vector(h)
        snr = min(self.snr, SNR_CAP)
        return float(np.vdot(h, h).real) / (len(h) * snr)


def _as_vector(h) -> NDArray[np.complex128]:
    if isinstance(h, ChannelVector):
        return h.aggregate
    return np.asarray(h, dtype=complex)


def los_coefficient(d, wavelength: float):
    """Friis transmission coefficient ``lambda/(4 pi d) * exp(-j 2 pi d / lambda)``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ZeroDistance("propagation distance must be positive")
    h = wavelength / (4.0 * np.pi * d) * np.exp(-2j * np.pi * d / wavelength)
    return complex(h) if h.ndim == 0 else h


def fresnel_reflection(theta_i, eps_r: float, polarization: str = "parallel"):
    r"""Fresnel amplitude reflection coefficient of a lossless dielectric.

    Parameters
    ----------
    theta_i : float or array
        Incidence angle from the surface normal, in ``[0, pi/2)``.
    eps_r : float
        Relative permittivity (> 1).
    polarization : {"parallel", "perpendicular"}
        E-field orientation relative to the plane of incidence.

    Notes
    -----
    Sign convention: ``parallel`` is positive at normal incidence,
    ``(sqrt(eps_r) - 1)/(sqrt(eps_r) + 1)``, vanishes at the Brewster
    angle ``arctan(sqrt(eps_r))`` and tends to -1 at grazing incidence.
    ``perpendicular`` is ``(1 - sqrt(eps_r))/(1 + sqrt(eps_r))`` at normal
    incidence and also tends to -1 at grazing.
    """
    c = np.cos(theta_i)
    root = np.sqrt(eps_r - np.sin(theta_i) ** 2)
    if polarization == "parallel":
        g = (eps_r * c - root) / (eps_r * c + root)
    elif polarization == "perpendicular":
        g = (c - root) / (c + root)
    else:
        raise ValueError(f"unknown polarization {polarization!r}")
    return float(g) if np.ndim(g) == 0 else g


def brewster_angle(eps_r: float) -> float:
    return math.atan(math.sqrt(eps_r))


def _element_amplitude(direction, boresight, exponent: float):
    if exponent == 0.0:
        return 1.0
    cos_psi = np.clip(direction @ boresight, 0.0, 1.0)
    return cos_psi ** (exponent / 2.0)


def smc_coefficient(
    tx: ArrayLike,
    scenario: Scenario,
    reflector: Reflector,
    wavelength: Optional[float] = None,
    rx: Optional[ArrayLike] = None,
):
    """Coefficient of the specular path via ``reflector`` for antenna(s) ``tx``.

    ``tx`` may be a single position or an ``(L, 3)`` array.  The receive
    point defaults to the scenario's device.
    """
    lam = scenario.wavelength if wavelength is None else wavelength
    rx = scenario.device if rx is None else np.asarray(rx, dtype=float)
    tx = np.asarray(tx, dtype=float)

    vis = geo.visibility(tx, rx, reflector)
    theta = geo.incidence_angle(tx, rx, reflector)
    gamma = fresnel_reflection(theta, reflector.eps_r, scenario.polarization_at(reflector))
    img = geo.mirror_point(tx, reflector)
    d_tot = np.linalg.norm(rx - img, axis=-1)

    amp = vis * gamma * reflector.amplitude_factor
    if scenario.element_exponent:
        s = geo.specular_point(tx, rx, reflector)
        dep = s - tx
        dep = dep / np.linalg.norm(dep, axis=-1, keepdims=True)
        amp = amp * _element_amplitude(dep, scenario.array.boresight, scenario.element_exponent)
    h = amp * los_coefficient(d_tot, lam)
    return complex(h) if np.ndim(h) == 0 else h


def los_channel(tx: ArrayLike, scenario: Scenario, rx: Optional[ArrayLike] = None):
    rx = scenario.device if rx is None else np.asarray(rx, dtype=float)
    delta = rx - np.asarray(tx, dtype=float)
    d = np.linalg.norm(delta, axis=-1)
    h = los_coefficient(d, scenario.wavelength)
    if scenario.element_exponent:
        h = h * _element_amplitude(
            delta / d[..., None], scenario.array.boresight, scenario.element_exponent
        )
    return h


def synthesize_channel(
    scenario: Scenario,
    components: Optional[Iterable[int]] = None,
    rx: Optional[ArrayLike] = None,
) -> ChannelVector:
    """Channel from every transmit antenna to the device (or ``rx``).

    ``components`` selects multipath components by index: 1 is the LOS
    path, ``k >= 2`` the reflector with that index.  ``None`` uses all.
    """
    ks = scenario.component_indices if components is None else tuple(sorted(set(components)))
    known = set(scenario.component_indices)
    bad = [k for k in ks if k not in known]
    if bad:
        raise UnknownComponent(f"unknown multipath component(s) {bad}")
    pos = scenario.antenna_positions()
    comps = {}
    for k in ks:
        if k == 1:
            comps[k] = np.atleast_1d(los_channel(pos, scenario, rx))
        else:
            comps[k] = np.atleast_1d(
                smc_coefficient(pos, scenario, scenario.reflector(k), rx=rx)
            )
    return ChannelVector(scenario.wavelength, comps)


def unit_noise(num_antennas: int, seed) -> NDArray[np.complex128]:
    """Unit-variance circular complex Gaussian vector, deterministic per seed."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, num_antennas))
    return (z[0] + 1j * z[1]) / math.sqrt(2.0)


def add_csi_noise(h, quality: CsiQuality, seed) -> ChannelVector:
    """Noisy CSI ``h + n`` with ``n`` white with variance ``||h||^2/(L*SNR)``.

    Components are kept; the noise is attached as component ``0`` so the
    aggregate is the noisy estimate.
    """
    if isinstance(h, ChannelVector):
        base = h
    else:
        base = ChannelVector.from_vector(h)
    agg = base.aggregate
    sigma = math.sqrt(quality.noise_variance(agg))
    comps = dict(base.components)
    noise = sigma * unit_noise(len(agg), seed)
    comps[0] = comps.get(0, 0) + noise
    return ChannelVector(base.wavelength, comps)


__all__ = [
    "ChannelVector",
    "CsiQuality",
    "los_coefficient",
    "fresnel_reflection",
    "brewster_angle",
    "smc_coefficient",
    "los_channel",
    "synthesize_channel",
    "unit_noise",
    "add_csi_noise",
]
