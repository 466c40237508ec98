"""Command line front end.

Subcommands: solve, slice, singularities, metric, lipschitz, bounds.
Every run reads a JSON configuration, writes its outputs into --out and
echoes a manifest (resolved configuration plus code version) alongside
them.  Identical configurations produce byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bounds import (gronwall_check, interpolated_path, lipschitz_experiment,
                     sobolev_rhs, transport_lower_bounds)
from .chart import InitialDatum, make_datum, solve_for_time
from .errors import ConfigError, DomainError, SolveError
from .metric import NormWeights, PathOfData, norm_profile, path_domain
from .slices import detect_singularities, slice_at_time
from .wavespeed import make_wave_speed

_FLOAT_FMT = "%.17g"


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("cannot read configuration: %s" % exc)


def _get(cfg, key, default=None, required=False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError("missing configuration key %r" % key)
    return default


def _build_ws(cfg):
    spec = dict(_get(cfg, "wave_speed", required=True))
    name = spec.pop("name", None)
    if name is None:
        raise ConfigError("wave_speed needs a 'name'")
    try:
        return make_wave_speed(name, **spec)
    except (TypeError, DomainError) as exc:
        raise ConfigError("bad wave_speed: %s" % exc)


def _build_datum(cfg, ws, h):
    spec = dict(_get(cfg, "datum", required=True))
    kind = spec.pop("kind", "bump")
    try:
        return make_datum(ws, kind=kind, h=h, **spec)
    except (TypeError, DomainError) as exc:
        raise ConfigError("bad datum: %s" % exc)


def _build_path(cfg, ws, h):
    spec = dict(_get(cfg, "path", required=True))
    kind = spec.pop("kind", None)
    thetas = np.linspace(0.0, 1.0, int(spec.pop("n_thetas", 5)))
    try:
        if kind == "interp_pair":
            A = make_datum(ws, h=h, **spec["start"])
            B = make_datum(ws, h=h, **spec["end"])
            return interpolated_path(A, B, ws, n_thetas=len(thetas))
        if kind == "family":
            start = spec["start"]
            end = spec["end"]

            def datum_fn(theta):
                params = {}
                for k, va in start.items():
                    vb = end.get(k, va)
                    if isinstance(va, (int, float)) and not isinstance(va, bool):
                        params[k] = (1.0 - theta) * va + theta * vb
                    else:
                        params[k] = va
                return make_datum(ws, h=h, **params)

            cap = max(datum_fn(th).E0 for th in thetas) * (1.0 + 1e-9)
            return PathOfData(datum_fn, thetas, cap)
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError("bad path: %s" % exc)
    raise ConfigError("unknown path kind %r" % kind)


def _write_manifest(outdir, cfg, command):
    manifest = {"command": command, "config": cfg, "version": __version__}
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_csv(path, header, columns):
    arr = np.column_stack(columns)
    np.savetxt(path, arr, fmt=_FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")


def _grid_params(cfg):
    grid = _get(cfg, "grid", {})
    h = float(grid.get("h", 1.0 / 256))
    T = float(grid.get("T", 1.0))
    margin = float(grid.get("margin", 1.2))
    return h, T, margin


def _metric_params(cfg):
    m = _get(cfg, "metric", {})
    return NormWeights(float(m.get("delta", 0.1))), float(m.get("eps", 1e-4))


def cmd_solve(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    datum = _build_datum(cfg, ws, h)
    chart = solve_for_time(datum, ws, T, h, margin=margin)
    chart.save(os.path.join(outdir, "chart.npz"))
    summary = {"E0": datum.E0, "h": h, "T": T,
               "grid_points": [len(chart.X), len(chart.Y)]}
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")


def cmd_slice(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    datum = _build_datum(cfg, ws, h)
    taus = [float(s) for s in _get(cfg, "taus", required=True)]
    chart = solve_for_time(datum, ws, max(taus), h, margin=margin)
    energies = []
    for k, tau in enumerate(taus):
        sl = slice_at_time(chart, tau)
        _write_csv(os.path.join(outdir, "slice_%03d.csv" % k),
                   ["x", "u", "ut", "ux", "R", "S", "e"],
                   [sl.x, sl.u, sl.ut, sl.ux, sl.R, sl.S, sl.e])
        energies.append({"tau": tau, "energy": sl.energy,
                         "clipped": sl.clipped})
    with open(os.path.join(outdir, "energies.json"), "w") as fh:
        json.dump({"E0": datum.E0, "slices": energies}, fh,
                  sort_keys=True, indent=1)
        fh.write("\n")


def cmd_singularities(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    datum = _build_datum(cfg, ws, h)
    chart = solve_for_time(datum, ws, T, h, margin=margin)
    report = detect_singularities(chart)
    with open(os.path.join(outdir, "singularities.json"), "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def cmd_metric(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    weights, eps = _metric_params(cfg)
    path = _build_path(cfg, ws, h)
    taus = [float(s) for s in _get(cfg, "taus", required=True)]
    theta = float(_get(cfg, "theta", 0.5))
    reports = norm_profile(path, theta, taus, ws, max(taus) if max(taus) > 0
                           else T, h, weights=weights, eps=eps, margin=margin)
    per_tau = [{"tau": r.tau, "norm": r.value,
                "I": [float(v) for v in r.parts],
                "a": r.a_rate, "energy": r.energy} for r in reports]
    with open(os.path.join(outdir, "metric.json"), "w") as fh:
        json.dump({"theta": theta, "delta": weights.delta,
                   "per_tau": per_tau}, fh, sort_keys=True, indent=1)
        fh.write("\n")
    _write_csv(os.path.join(outdir, "metric.csv"),
               ["tau", "norm", "a", "energy"],
               [[r.tau for r in reports], [r.value for r in reports],
                [r.a_rate for r in reports], [r.energy for r in reports]])


def cmd_lipschitz(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    weights, eps = _metric_params(cfg)
    path = _build_path(cfg, ws, h)
    taus = [float(s) for s in _get(cfg, "taus", required=True)]
    C_fit = _get(cfg, "C_fit")
    rep = lipschitz_experiment(path, taus, ws, max(taus), h, weights=weights,
                               eps=eps, margin=margin,
                               C_fit=None if C_fit is None else float(C_fit))
    rows = rep.rows
    _write_csv(os.path.join(outdir, "lipschitz.csv"),
               ["tau", "length", "ratio", "a_int", "envelope", "violated",
                "endpoint_h1l2", "endpoint_clipped"],
               [[r.tau for r in rows], [r.length for r in rows],
                [r.ratio for r in rows], [r.a_int for r in rows],
                [r.envelope for r in rows],
                [float(r.violated) for r in rows],
                [r.endpoint_h1l2 for r in rows],
                [float(r.endpoint_clipped) for r in rows]])
    with open(os.path.join(outdir, "lipschitz.json"), "w") as fh:
        json.dump({"fitted_C": rep.fitted_C,
                   "violations": int(sum(r.violated for r in rows))},
                  fh, sort_keys=True, indent=1)
        fh.write("\n")


def cmd_bounds(cfg, outdir, args):
    ws = _build_ws(cfg)
    h, T, margin = _grid_params(cfg)
    pairs = _get(cfg, "pairs", required=True)
    results = []

    def one(spec):
        A = make_datum(ws, h=h, **spec["start"])
        B = make_datum(ws, h=h, **spec["end"])
        rhs = sobolev_rhs(A, B)
        l1, wd = transport_lower_bounds(A, B, ws)
        return {"sobolev_rhs": rhs, "l1_u0": l1, "transport_dual": wd}

    threads = max(1, int(args.threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, pairs))
    else:
        results = [one(spec) for spec in pairs]
    _write_csv(os.path.join(outdir, "bounds.csv"),
               ["sobolev_rhs", "l1_u0", "transport_dual"],
               [[r["sobolev_rhs"] for r in results],
                [r["l1_u0"] for r in results],
                [r["transport_dual"] for r in results]])
    with open(os.path.join(outdir, "bounds.json"), "w") as fh:
        json.dump({"pairs": results}, fh, sort_keys=True, indent=1)
        fh.write("\n")


_COMMANDS = {
    "solve": cmd_solve,
    "slice": cmd_slice,
    "singularities": cmd_singularities,
    "metric": cmd_metric,
    "lipschitz": cmd_lipschitz,
    "bounds": cmd_bounds,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="varwave",
        description="Conservative solutions and metric experiments for a "
                    "variational wave equation.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        _COMMANDS[args.command](cfg, args.out, args)
        _write_manifest(args.out, cfg, args.command)
    except ConfigError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 2
    except (SolveError, DomainError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
