"""Monte-Carlo power-gain statistics for reciprocity beamforming on noisy CSI.

Trial ``i`` draws its noise (or random weights) from a generator seeded
with ``SeedSequence([base_seed, i])``.  Samples therefore depend only on
``(base_seed, i)``: chunking, ordering and the SNR grid do not change
them, and every SNR point of a curve sees the same noise realizations
up to scale.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

from .channel import ChannelVector, CsiQuality, unit_noise
from .errors import EmptySamples, ZeroTrials
from .fieldmetrics import db, pg_miso, pg_siso, power_gain

PROBABILITIES = (0.50, 0.90, 0.98)

_CHUNK = 1024


def trial_seed(base_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(base_seed), int(trial)])


def _h(h) -> NDArray[np.complex128]:
    return h.aggregate if isinstance(h, ChannelVector) else np.asarray(h, dtype=complex)


def _noise_block(num_antennas: int, base_seed: int, start: int, stop: int):
    return np.stack([unit_noise(num_antennas, trial_seed(base_seed, i)) for i in range(start, stop)])


def _mrt_gain(h, h_est):
    # PG of w = conj(h_est)/||h_est|| on the true channel, one row per trial
    num = np.abs(h_est.conj() @ h) ** 2
    return num / np.einsum("ij,ij->i", h_est.conj(), h_est).real


def pg_samples(h, snr: float, trials: int, base_seed: int = 0) -> NDArray[np.float64]:
    """PG of conjugate beamforming on ``trials`` independent noisy CSI draws."""
    return _pg_samples_multi(h, [snr], trials, base_seed)[0]


def _pg_samples_multi(h, snrs: Sequence[float], trials: int, base_seed: int):
    if trials <= 0:
        raise ZeroTrials("number of trials must be positive")
    hv = _h(h)
    sigmas = [math.sqrt(CsiQuality(s).noise_variance(hv)) for s in snrs]
    out = np.empty((len(snrs), trials))
    for start in range(0, trials, _CHUNK):
        stop = min(start + _CHUNK, trials)
        z = _noise_block(len(hv), base_seed, start, stop)
        for j, sigma in enumerate(sigmas):
            out[j, start:stop] = _mrt_gain(hv, hv + sigma * z)
    return out


def symmetric_interval(samples, mean: float, probability: float) -> float:
    """Smallest ``U`` with at least ``probability`` of samples in ``[mean-U, mean+U]``.

    Uses the ``ceil(probability * n)``-th smallest absolute deviation.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise EmptySamples("no samples")
    if not 0.0 < probability <= 1.0:
        raise ValueError("probability must be in (0, 1]")
    dev = np.sort(np.abs(x - mean))
    k = max(1, math.ceil(probability * n - 1e-9))
    return float(dev[k - 1])


@dataclass
class PgDistribution:
    snr: float
    samples: NDArray[np.float64]
    mean: float
    intervals: dict = field(default_factory=dict)
    pg_siso: float = float("nan")
    pg_miso: float = float("nan")

    @classmethod
    def from_samples(cls, samples, h, snr: float = float("nan"),
                     probabilities: Iterable[float] = PROBABILITIES) -> "PgDistribution":
        samples = np.asarray(samples, dtype=float)
        mean = float(np.mean(samples))
        ivals = {p: symmetric_interval(samples, mean, p) for p in probabilities}
        return cls(snr, samples, mean, ivals, pg_siso(h), pg_miso(h))

    @property
    def snr_db(self) -> float:
        return float(db(self.snr))

    @property
    def mean_db(self) -> float:
        return float(db(self.mean))

    def interval_db(self, probability: float) -> tuple[float, float]:
        u = self.intervals[probability]
        lo = self.mean - u
        return (float(db(lo)) if lo > 0 else -math.inf, float(db(self.mean + u)))


def random_bf_distribution(h, trials: int, base_seed: int = 0) -> PgDistribution:
    """PG over ``trials`` random beamformers (uniform on the unit sphere)."""
    if trials <= 0:
        raise ZeroTrials("number of trials must be positive")
    hv = _h(h)
    pg = np.empty(trials)
    for start in range(0, trials, _CHUNK):
        stop = min(start + _CHUNK, trials)
        z = _noise_block(len(hv), base_seed, start, stop)
        w = z / np.linalg.norm(z, axis=1, keepdims=True)
        pg[start:stop] = np.abs(w @ hv) ** 2
    return PgDistribution.from_samples(pg, hv)


@dataclass
class PgCurve:
    points: list[PgDistribution]
    references: dict

    @property
    def snr_db(self) -> NDArray[np.float64]:
        return np.array([p.snr_db for p in self.points])

    @property
    def mean_db(self) -> NDArray[np.float64]:
        return np.array([p.mean_db for p in self.points])

    def write_csv(self, fh: TextIO) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        cols = ["snr_db", "mean_pg_db"]
        for p in PROBABILITIES:
            tag = f"u{int(round(p * 100))}"
            cols += [f"{tag}_db_lo", f"{tag}_db_hi"]
        wr.writerow(cols)
        for d in self.points:
            row = [f"{d.snr_db:.4f}", f"{d.mean_db:.4f}"]
            for p in PROBABILITIES:
                lo, hi = d.interval_db(p)
                row += [f"{lo:.4f}", f"{hi:.4f}"]
            wr.writerow(row)

    def references_json(self) -> str:
        doc = {name: {"pg": v, "pg_db": float(db(v))} for name, v in self.references.items()}
        return json.dumps(doc, indent=2, sort_keys=True)


def pg_vs_snr_curve(h, snrs: Sequence[float], trials: int = 10_000, base_seed: int = 0,
                    references: Optional[dict] = None) -> PgCurve:
    """One :class:`PgDistribution` per linear SNR in ``snrs``.

    ``references`` adds SNR-independent PG lines (e.g. geometry-based
    beamformers) to the always-present ``pg_siso`` and ``pg_miso``.
    """
    hv = _h(h)
    samples = _pg_samples_multi(hv, list(snrs), trials, base_seed)
    pts = [PgDistribution.from_samples(s, hv, snr) for s, snr in zip(samples, snrs)]
    refs = {"pg_siso": pg_siso(hv), "pg_miso": pg_miso(hv)}
    refs.update(references or {})
    return PgCurve(pts, refs)


def geometry_references(scenario, h=None) -> dict:
    """PG of the three geometry-based beamformers on channel ``h``."""
    from .beamforming import planewave_los_bf, spherical_los_bf, spherical_smc_bf
    from .channel import synthesize_channel

    h = synthesize_channel(scenario) if h is None else h
    return {
        "planewave_los": power_gain(h, planewave_los_bf(scenario)),
        "spherical_los": power_gain(h, spherical_los_bf(scenario)),
        "spherical_smc": power_gain(h, spherical_smc_bf(scenario)),
    }


def mid_region_slope(curve: PgCurve, guard_db: float = 10.0) -> float:
    """Least-squares slope (dB/dB) of the mean PG away from both asymptotes.

    Uses the points whose mean lies at least ``guard_db`` above ``pg_siso``
    and ``guard_db`` below ``pg_miso``.
    """
    x = curve.snr_db
    y = curve.mean_db
    lo = db(curve.references["pg_siso"]) + guard_db
    hi = db(curve.references["pg_miso"]) - guard_db
    sel = (y >= lo) & (y <= hi)
    if sel.sum() < 2:
        raise EmptySamples("not enough points between the asymptotes")
    return float(np.polyfit(x[sel], y[sel], 1)[0])


__all__ = [
    "PROBABILITIES",
    "trial_seed",
    "pg_samples",
    "symmetric_interval",
    "PgDistribution",
    "PgCurve",
    "random_bf_distribution",
    "pg_vs_snr_curve",
    "geometry_references",
    "mid_region_slope",
]
