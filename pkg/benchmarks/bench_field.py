"""Time the field kernels on the default hallway with both backends.

    python3 benchmarks/bench_field.py --step 0.1 --repeat 3
"""

import argparse
import time

import numpy as np

from wptfocus import kernels
from wptfocus.beamforming import spherical_smc_bf
from wptfocus.fieldmetrics import default_plane, nf_gain_pattern, power_density_grid
from wptfocus.geometry import hallway_3p8


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.1, help="grid step in m (0.05 is the default grid)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args(argv)

    if args.threads:
        kernels.set_num_threads(args.threads)
    sc = hallway_3p8()
    w = spherical_smc_bf(sc)
    plane = default_plane(sc, step=args.step)
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])

    if "numba" in backends:
        # compile (or load the on-disk cache) outside the timed region
        t0 = time.perf_counter()
        power_density_grid(sc, w, default_plane(sc, step=2.0), backend="numba")
        nf_gain_pattern(w, sc, default_plane(sc, step=2.0), backend="numba")
        print(f"numba warm-up: {time.perf_counter() - t0:.2f} s")

    results = {}
    for task, fn in (("power_density_grid", power_density_grid), ("nf_gain_pattern", None)):
        for be in backends:
            if fn is None:
                t, g = best_of(lambda: nf_gain_pattern(w, sc, plane, backend=be), args.repeat)
            else:
                t, g = best_of(lambda: fn(sc, w, plane, backend=be), args.repeat)
            results[(task, be)] = (t, g.values)
            print(f"{task:20s} {be:6s} {g.values.size:7d} points  {t:8.3f} s")
        if len(backends) == 2:
            a, b = results[(task, "numpy")][1], results[(task, "numba")][1]
            m = ~np.isnan(a)
            diff = float(np.max(np.abs(a[m] - b[m]) / np.abs(a[m])))
            speed = results[(task, "numpy")][0] / results[(task, "numba")][0]
            print(f"{task:20s} speed-up {speed:.1f}x, max rel. difference {diff:.1e}")


if __name__ == "__main__":
    main()
