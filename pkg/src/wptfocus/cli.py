"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric or
geometric failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analysis import geometry_references, pg_vs_snr_curve
from .beamforming import STRATEGIES, beam_sweep, make_beamformer
from .channel import synthesize_channel
from .compliance import (
    REFERENCE_FREQUENCIES,
    RegulatoryProfile,
    budget_table,
    compliance_report,
    format_budget_csv,
)
from .config import load_scenario
from .errors import ConfigError, EmptyGrid, GeometryError, UnknownComponent, WptError, ZeroChannel
from .fieldmetrics import (
    db,
    default_plane,
    ff_gain_max,
    ff_gain_pattern,
    find_global_max,
    nf_gain_at,
    nf_gain_pattern,
    power_density_grid,
    write_far_field_summary,
)

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _parse_float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _parse_components(text):
    if text is None:
        return None
    try:
        ks = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad component list {text!r}") from None
    if not ks:
        raise UsageError("component list is empty")
    return ks


def _timestamp(args):
    if args.no_timestamp:
        return None
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _scenario(args):
    sc = load_scenario(args.scenario, args.preset)
    if getattr(args, "tx_power", None) is not None:
        from dataclasses import replace

        if not args.tx_power > 0:
            raise UsageError("--tx-power must be positive")
        sc = replace(sc, tx_power=args.tx_power)
    return sc


def _beamformer(sc, args, components):
    if args.strategy not in STRATEGIES:
        raise UsageError(f"unknown strategy {args.strategy!r}; choose from {', '.join(STRATEGIES)}")
    return make_beamformer(sc, args.strategy, components, seed=args.seed, phase_only=args.phase_only)


def _plane(sc, args):
    if args.step <= 0:
        raise UsageError("--step must be positive")
    return default_plane(sc, step=args.step, height=args.height, overshoot=args.overshoot)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_budget_table(args) -> int:
    freqs = REFERENCE_FREQUENCIES if args.frequencies is None else _parse_float_list(args.frequencies)
    if any(f <= 0 for f in freqs):
        raise UsageError("frequencies must be positive")
    rows = budget_table(freqs, args.mode, args.region)
    with _output(args.out) as fh:
        fh.write(format_budget_csv(rows))
    return 0


def _meta(sc, args, components, extra=None):
    meta = {}
    ts = _timestamp(args)
    if ts:
        meta["generated"] = ts
    meta.update({
        "wptfocus": __version__,
        "scenario": sc.name,
        "strategy": args.strategy,
        "phase_only": args.phase_only,
        "components": ",".join(str(k) for k in (components or sc.component_indices)),
        "tx_power_w": sc.tx_power,
        "frequency_hz": sc.frequency,
        "seed": args.seed,
    })
    meta.update(extra or {})
    return meta


def cmd_field(args) -> int:
    sc = _scenario(args)
    comps = _parse_components(args.components)
    w = _beamformer(sc, args, comps)
    grid = power_density_grid(sc, w, _plane(sc, args), comps)
    loc, val = find_global_max(grid)
    meta = _meta(sc, args, comps, {
        "max_power_density_w_per_m2": repr(val),
        "max_location_m": " ".join(f"{x:.4f}" for x in loc),
    })
    with _output(args.out) as fh:
        grid.write_csv(fh, meta)
    print(f"max S = {val:.4g} W/m^2 at ({loc[0]:.2f}, {loc[1]:.2f}, {loc[2]:.2f}) m",
          file=sys.stderr)
    return 0


def cmd_gain_pattern(args) -> int:
    sc = _scenario(args)
    comps = _parse_components(args.components)
    w = _beamformer(sc, args, comps)
    g_dev = nf_gain_at(sc.device, w, sc)
    g_ff = ff_gain_max(w, sc)
    prefix = args.out
    if prefix:
        nf = nf_gain_pattern(w, sc, _plane(sc, args))
        with open(f"{prefix}_nf.csv", "w", newline="") as fh:
            nf.write_csv(fh, _meta(sc, args, comps))
        ff = ff_gain_pattern(w, sc, np.arange(-90, 90.01, args.ff_step),
                             np.arange(-90, 90.01, args.ff_step))
        with open(f"{prefix}_ff.csv", "w", newline="") as fh:
            ff.write_csv(fh)
        with open(f"{prefix}_summary.csv", "w", newline="") as fh:
            write_far_field_summary(fh, g_dev, g_ff)
    print(f"G_NF(device) = {float(db(g_dev)):.2f} dB")
    print(f"G_FF,max = {float(db(g_ff)):.2f} dB")
    return 0


def cmd_pg_curve(args) -> int:
    if args.trials <= 0:
        raise UsageError("--trials must be positive")
    if args.snr_points < 1:
        raise UsageError("--snr-points must be positive")
    sc = _scenario(args)
    comps = _parse_components(args.components)
    h = synthesize_channel(sc, comps)
    snr_db = np.linspace(args.snr_min, args.snr_max, args.snr_points)
    refs = geometry_references(sc, h)
    curve = pg_vs_snr_curve(h, 10.0 ** (snr_db / 10.0), args.trials, args.seed, refs)
    buf = io.StringIO()
    curve.write_csv(buf)
    refs_doc = json.loads(curve.references_json())
    doc = {"references": refs_doc, "trials": args.trials, "seed": args.seed,
           "scenario": sc.name, "num_antennas": sc.num_antennas}
    ts = _timestamp(args)
    if ts:
        doc["generated"] = ts
    if args.out:
        Path(f"{args.out}.csv").write_text(buf.getvalue())
        Path(f"{args.out}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(buf.getvalue())
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_compliance(args) -> int:
    try:
        profile = RegulatoryProfile(args.region, args.eirp_limit)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sc = _scenario(args)
    comps = _parse_components(args.components)
    w = _beamformer(sc, args, comps)
    plane = _plane(sc, args)
    grid = power_density_grid(sc, w, plane, comps)
    rep = compliance_report(sc, w, grid, profile, args.exclusion_radius, plane)
    doc = json.loads(rep.to_json())
    doc["strategy"] = args.strategy
    ts = _timestamp(args)
    if ts:
        doc["generated"] = ts
    with _output(args.out) as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    comps = _parse_components(args.components)
    if args.count < 1:
        raise UsageError("--count must be positive")
    start = np.asarray(args.start, dtype=float)
    stop = np.asarray(args.stop, dtype=float)
    t = np.linspace(0.0, 1.0, args.count) if args.count > 1 else np.zeros(1)
    cands = start + t[:, None] * (stop - start)
    res = beam_sweep(sc, cands, args.threshold, comps, phase_only=args.phase_only)
    with _output(args.out) as fh:
        ts = _timestamp(args)
        if ts:
            fh.write(f"# generated: {ts}\n")
        fh.write(f"# threshold_w: {args.threshold!r}\n")
        fh.write(f"# hit_index: {'none' if res.index is None else res.index}\n")
        fh.write("index,x,y,z,received_power_w,received_power_dbm,woke\n")
        for i, p in enumerate(map(float, res.powers)):
            x, y, z = cands[i]
            dbm = float(db(p * 1e3))
            fh.write(f"{i},{x:.6g},{y:.6g},{z:.6g},{p!r},{dbm:.2f},{int(p >= args.threshold)}\n")
    msg = "no candidate reached the threshold" if res.index is None else f"wake-up at candidate {res.index}"
    print(msg, file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, strategy=True, plane=False):
    p.add_argument("--scenario", help="scenario JSON file (default: $WPT_SCENARIO_PATH, else preset)")
    p.add_argument("--preset", help="bundled preset used as base (default hallway-3p8)")
    p.add_argument("--tx-power", type=float, help="override total transmit power (W)")
    p.add_argument("--components", help="comma-separated multipath components, e.g. 1,2,3,4")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    if strategy:
        p.add_argument("--strategy", default="spherical-smc",
                       help=f"beamformer: {', '.join(STRATEGIES)}")
        p.add_argument("--phase-only", action="store_true",
                       help="equal-magnitude variant of the spherical LOS beamformer")
    if plane:
        p.add_argument("--step", type=float, default=0.05, help="grid step (m)")
        p.add_argument("--height", type=float, default=3.0, help="grid top height (m)")
        p.add_argument("--overshoot", type=float, default=1.25,
                       help="grid length as a multiple of the device range")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wptfocus", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=0, help="cap on worker threads")
    ap.add_argument("--no-timestamp", action="store_true", help="omit timestamps for byte-identical reruns")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("budget-table", help="receivable power at the exposure limit")
    p.add_argument("--frequencies", help="comma-separated Hz (default: the five reference bands)")
    p.add_argument("--mode", choices=("flat10", "region-scaled"), default="flat10")
    p.add_argument("--region", choices=("EU", "FCC"), default="EU")
    p.add_argument("--out")
    p.set_defaults(func=cmd_budget_table)

    p = sub.add_parser("field", help="power-density grid on the array/device plane")
    _add_common(p, plane=True)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("gain-pattern", help="near-field gain grid and far-field pattern")
    _add_common(p, plane=True)
    p.add_argument("--ff-step", type=float, default=1.0, help="far-field grid step (deg)")
    p.set_defaults(func=cmd_gain_pattern)

    p = sub.add_parser("pg-curve", help="Monte-Carlo PG versus CSI SNR")
    _add_common(p, strategy=False)
    p.add_argument("--snr-min", type=float, default=-30.0)
    p.add_argument("--snr-max", type=float, default=30.0)
    p.add_argument("--snr-points", type=int, default=31)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_pg_curve)

    p = sub.add_parser("compliance", help="power-density compliance report (JSON)")
    _add_common(p, plane=True)
    p.add_argument("--region", default="EU", help="EU or FCC")
    p.add_argument("--exclusion-radius", type=float, default=0.0,
                   help="skip samples closer than this to the array plane (m)")
    p.add_argument("--eirp-limit", type=float, default=None, help="optional EIRP limit (W)")
    p.set_defaults(func=cmd_compliance)

    p = sub.add_parser("sweep", help="beam sweep over a line of candidate positions")
    _add_common(p, strategy=False)
    p.add_argument("--start", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--stop", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--count", type=int, default=21)
    p.add_argument("--threshold", type=float, required=True, help="wake-up power (W)")
    p.add_argument("--phase-only", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        kernels.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (UsageError, ConfigError, UnknownComponent) as exc:
        print(f"wptfocus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeometryError, ZeroChannel, EmptyGrid, FloatingPointError) as exc:
        print(f"wptfocus: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (WptError, ValueError) as exc:
        print(f"wptfocus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
