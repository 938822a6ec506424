"""Transmit beamformers.

All weight vectors are unit-norm.  The field radiated toward a point is
``sum_l w_l a_l`` with ``a_l`` the (spherical or plane-wave) propagation
phasor, so a beamformer focuses by pre-compensating the propagation phase:
``w_l ∝ exp(+j 2 pi d_l / lambda)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .channel import ChannelVector, los_channel, synthesize_channel
from .errors import DegenerateDirection, ZeroChannel
from .geometry import Scenario

STRATEGIES = ("conjugate", "planewave-los", "spherical-los", "spherical-smc", "random")


@dataclass(frozen=True)
class BeamWeights:
    weights: NDArray[np.complex128]
    strategy: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).ravel()
        n = np.linalg.norm(w)
        if n == 0.0:
            raise ZeroChannel("beam weights must be nonzero")
        object.__setattr__(self, "weights", w / n)

    def __len__(self):
        return len(self.weights)

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)


def _weights(w) -> NDArray[np.complex128]:
    return w.weights if isinstance(w, BeamWeights) else np.asarray(w, dtype=complex)


def conjugate_bf(h, strategy: str = "conjugate") -> BeamWeights:
    """Maximum-ratio transmission: ``w = conj(h) / ||h||``."""
    hv = h.aggregate if isinstance(h, ChannelVector) else np.asarray(h, dtype=complex)
    if not np.any(hv):
        raise ZeroChannel("cannot beamform on an all-zero channel")
    return BeamWeights(np.conj(hv), strategy)


def _device_direction(scenario: Scenario, target=None):
    target = scenario.device if target is None else np.asarray(target, dtype=float)
    c = scenario.array.center
    delta = target - c
    dist = np.linalg.norm(delta)
    if dist == 0.0:
        raise DegenerateDirection("device coincides with the array center")
    u = delta / dist
    if abs(float(u @ scenario.array.boresight)) < 1e-12:
        raise DegenerateDirection("device lies in the array plane")
    return u


def planewave_los_bf(scenario: Scenario, target=None) -> BeamWeights:
    """Far-field steering toward the device direction seen from the array center."""
    u = _device_direction(scenario, target)
    rel = scenario.antenna_positions() - scenario.array.center
    k0 = 2.0 * math.pi / scenario.wavelength
    return BeamWeights(np.exp(-1j * k0 * (rel @ u)), "planewave-los")


def spherical_los_bf(scenario: Scenario, target=None, phase_only: bool = False) -> BeamWeights:
    """Near-field focusing using the exact antenna-to-device distances.

    The default magnitude-weighted variant equals conjugate beamforming
    on the LOS-only channel; ``phase_only=True`` gives equal magnitudes.
    """
    target = scenario.device if target is None else np.asarray(target, dtype=float)
    pos = scenario.antenna_positions()
    if phase_only:
        d = np.linalg.norm(target - pos, axis=-1)
        if np.any(d == 0.0):
            raise DegenerateDirection("focus point coincides with an antenna")
        return BeamWeights(np.exp(2j * math.pi * d / scenario.wavelength), "spherical-los-phase")
    return conjugate_bf(los_channel(pos, scenario, target), "spherical-los")


def spherical_smc_bf(scenario: Scenario, components: Optional[Iterable[int]] = None) -> BeamWeights:
    """Conjugate beamforming on the geometry-predicted multipath channel."""
    if components is not None:
        components = tuple(components)
        if not components:
            raise ValueError("at least one multipath component is required")
    h = synthesize_channel(scenario, components)
    return conjugate_bf(h, "spherical-smc")


def random_bf(num_antennas: int, seed) -> BeamWeights:
    """Weights uniform on the complex unit sphere."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, num_antennas))
    return BeamWeights(z[0] + 1j * z[1], "random")


def make_beamformer(scenario: Scenario, strategy: str, components=None, seed=0,
                    phase_only: bool = False) -> BeamWeights:
    if strategy == "planewave-los":
        return planewave_los_bf(scenario)
    if strategy == "spherical-los":
        return spherical_los_bf(scenario, phase_only=phase_only)
    if strategy == "spherical-smc":
        return spherical_smc_bf(scenario, components)
    if strategy == "conjugate":
        return conjugate_bf(synthesize_channel(scenario, components))
    if strategy == "random":
        return random_bf(scenario.num_antennas, seed)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


@dataclass
class SweepResult:
    index: Optional[int]
    powers: list[float] = field(default_factory=list)
    candidates: Optional[NDArray[np.float64]] = None

    @property
    def found(self) -> bool:
        return self.index is not None


def beam_sweep(
    scenario: Scenario,
    candidates: Sequence[ArrayLike],
    wake_threshold: float,
    components: Optional[Iterable[int]] = None,
    phase_only: bool = False,
) -> SweepResult:
    """Focus at each candidate in turn until the device receives ``wake_threshold`` W.

    Received power is ``S(device) * A_r`` with ``S`` evaluated over the
    multipath ``components`` of the real scenario.  The sweep stops at
    the first candidate that reaches the threshold; ``powers`` holds the
    delivered power of every evaluated candidate.
    """
    from .fieldmetrics import power_density_at

    cand = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cand.shape[0] == 0:
        raise ValueError("candidate list must be nonempty")
    comps = scenario.component_indices if components is None else tuple(components)
    powers = []
    for i, c in enumerate(cand):
        w = spherical_los_bf(scenario, target=c, phase_only=phase_only)
        s = power_density_at(scenario.device, w, scenario, comps)
        p = s * scenario.effective_aperture
        powers.append(p)
        if p >= wake_threshold:
            return SweepResult(i, powers, cand)
    return SweepResult(None, powers, cand)


__all__ = [
    "BeamWeights",
    "STRATEGIES",
    "conjugate_bf",
    "planewave_los_bf",
    "spherical_los_bf",
    "spherical_smc_bf",
    "random_bf",
    "make_beamformer",
    "beam_sweep",
    "SweepResult",
]
