"""Hot field kernels with a numba backend and a pure-numpy fallback.

The numba backend is used when numba imports cleanly, unless the
environment variable ``WPT_DISABLE_NUMBA`` is set to a truthy value.
Both backends expose the same functions; :func:`get_backend` returns
either one explicitly (tests and the benchmark compare them).
"""

import os
from types import ModuleType

import numpy as np

from . import _numpy

OK, SINGULAR, WRONG_SIDE = _numpy.OK, _numpy.SINGULAR, _numpy.WRONG_SIDE


def _env_disabled() -> bool:
    return os.environ.get("WPT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def get_backend(name: str = "auto") -> ModuleType:
    if name == "auto":
        return _numba if USE_NUMBA else _numpy
    if name == "numba":
        if _numba is None:
            raise RuntimeError("numba backend unavailable")
        return _numba
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {name!r}")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    if USE_NUMBA and n > 0:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def pack_reflectors(reflectors, default_polarization="parallel"):
    """Flatten reflectors into the contiguous arrays the kernels take."""
    n = len(reflectors)
    anchor = np.zeros((n, 3))
    normal = np.zeros((n, 3))
    ax1 = np.zeros((n, 3))
    ax2 = np.zeros((n, 3))
    hw = np.full((n, 2), np.inf)
    eps = np.ones(n)
    amp = np.ones(n)
    par = np.ones(n, dtype=np.bool_)
    for i, r in enumerate(reflectors):
        anchor[i] = r.anchor
        normal[i] = r.normal
        if r.extent_axes is not None:
            ax1[i], ax2[i] = r.extent_axes
            hw[i] = r.half_widths
        eps[i] = r.eps_r
        amp[i] = r.amplitude_factor
        par[i] = (r.polarization or default_polarization) == "parallel"
    return anchor, normal, ax1, ax2, hw, eps, amp, par


def field_sum(points, tx, w, reflectors, *, include_los, parallel, elem_exp,
              boresight, wavelength, min_dist, backend="auto"):
    """Complex field ``sum_l w_l sum_k c_lk exp(-j k d_lk) / d_lk`` at each point.

    ``parallel`` selects the Fresnel branch for reflectors without their
    own polarization.  Returns ``(field, status)`` where ``status`` carries :data:`SINGULAR`
    and :data:`WRONG_SIDE` bit flags; flagged points hold garbage values.
    """
    be = get_backend(backend)
    packed = pack_reflectors(reflectors, "parallel" if parallel else "perpendicular")
    return be.field_sum(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(tx, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.complex128),
        *packed,
        bool(include_los),
        float(elem_exp),
        np.ascontiguousarray(boresight, dtype=np.float64),
        float(wavelength),
        float(min_dist),
    )


def nf_gain(points, tx, w, wavelength, min_dist, backend="auto"):
    be = get_backend(backend)
    return be.nf_gain(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(tx, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.complex128),
        float(wavelength),
        float(min_dist),
    )


def ff_gain(directions, tx_rel, w, wavelength, backend="auto"):
    be = get_backend(backend)
    return be.ff_gain(
        np.ascontiguousarray(directions, dtype=np.float64),
        np.ascontiguousarray(tx_rel, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.complex128),
        float(wavelength),
    )
