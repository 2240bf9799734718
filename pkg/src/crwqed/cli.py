"""Command-line front end emitting reproducible CSV artifacts.

Subcommands map onto the main result families:

  spectrum      energy spectrum versus coupling strength
  bound-states  BIC/BOC energies and per-site profiles
  dynamics      exact / Markovian / Weisskopf-Wigner emission dynamics
  magic         magic-cavity Rabi scan and population dynamics

Every run resolves its configuration (config file < --set overrides),
computes in memory, then writes data files atomically plus a JSON manifest
listing the resolved parameters and outputs.  Data files carry no
timestamps, so identical configurations give byte-identical CSVs.

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from . import exact, markov, nonmarkov, spectral
from .exact import ToleranceError
from .markov import PositivityError
from .model import (SystemParams, excited_atom_state, params_from_mapping,
                    params_to_mapping, read_config)
from .timeseries import TimeSeries, write_csv

_CMD_FLOAT = {"g_min", "g_max", "t_max", "t_step", "delta_min", "delta_max"}
_CMD_INT = {"g_points", "delta_points", "heatmap_times"}
_CMD_STR = {"sites", "initial"}

_DEFAULTS = {
    "spectrum": {"g_min": 0.0, "g_max": 0.5, "g_points": 101, "n_c": 201},
    "bound-states": {"n_c": 401},
    "dynamics": {"t_max": 50.0, "t_step": 0.02, "sites": "1,2,3,4,5",
                 "heatmap_times": 201},
    "magic": {"t_max": 200.0, "t_step": 0.02, "delta_min": -0.05,
              "delta_max": 0.05, "delta_points": 201, "initial": "giant"},
}


class ConfigError(ValueError):
    pass


def _coerce_cmd(key: str, val: str):
    try:
        if key in _CMD_INT:
            return int(val)
        if key in _CMD_FLOAT:
            return float(val)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {val!r}") from exc
    return val


def _resolve(args, command: str) -> dict:
    cfg = dict(_DEFAULTS[command])
    if args.config is not None:
        try:
            file_cfg = read_config(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg.update(file_cfg)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        key = key.strip().lower()
        from .model import _coerce  # shared model-key coercion

        try:
            coerced = _coerce(key, val.strip(), where="--set")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if isinstance(coerced, str):
            coerced = _coerce_cmd(key, coerced)
        cfg[key] = coerced
    # command keys read from file arrive as raw strings
    for key in list(cfg):
        if isinstance(cfg[key], str) and key not in _CMD_STR:
            cfg[key] = _coerce_cmd(key, cfg[key])
    return cfg


def _params(cfg: dict, sized_for: float | None = None) -> SystemParams:
    model_keys = {"omega_c", "omega", "xi", "g", "n", "n_c", "origin_offset",
                  "g_s", "m", "eta", "delta"}
    mapping = {k: v for k, v in cfg.items() if k in model_keys}
    try:
        params = params_from_mapping(mapping)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if sized_for is not None and "n_c" not in mapping:
        params = params.sized_for(sized_for)
    return params


def _time_grid(cfg: dict) -> np.ndarray:
    t_max, t_step = cfg["t_max"], cfg["t_step"]
    if t_max < 0 or t_step <= 0:
        raise ConfigError("t_max must be >= 0 and t_step > 0")
    if t_max == 0:
        return np.empty(0)
    n = int(round(t_max / t_step))
    return np.linspace(0.0, n * t_step, n + 1)


def _sites(cfg: dict) -> list[int]:
    try:
        return [int(s) for s in str(cfg["sites"]).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad sites list: {cfg['sites']!r}") from exc


def _manifest(outdir: str, command: str, cfg: dict, params: SystemParams,
              outputs: list[str], t0: float, extra: dict | None = None):
    doc = {
        "command": command,
        "parameters": {**cfg, **params_to_mapping(params)},
        "toolkit_version": __version__,
        "outputs": sorted(outputs),
        "duration_seconds": round(time.time() - t0, 3),
    }
    if extra:
        doc.update(extra)
    fd, tmp = tempfile.mkstemp(dir=outdir, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, os.path.join(outdir, "manifest.json"))


# --- commands --------------------------------------------------------------

def cmd_spectrum(cfg: dict, outdir: str, t0: float):
    params = _params(cfg)
    g_grid = np.linspace(cfg["g_min"], cfg["g_max"], cfg["g_points"])
    table = spectral.spectrum_vs_g(params, g_grid)
    rows = np.empty((table.size, 2))
    rows[:, 0] = np.repeat(g_grid, table.shape[1])
    rows[:, 1] = table.reshape(-1)
    path = os.path.join(outdir, "spectrum.csv")
    write_csv(path, ["g", "energy"], rows)
    _manifest(outdir, "spectrum", cfg, params, ["spectrum.csv"], t0)


def cmd_bound_states(cfg: dict, outdir: str, t0: float):
    params = _params(cfg)
    states = []
    notes = {}
    if params.g > 0:
        try:
            e_up, e_lo = spectral.boc_energies(params)
        except ValueError as exc:
            # odd N at weak coupling: no state splits off the band
            notes["boc"] = f"no BOC solution: {exc}"
        else:
            notes["boc_energies"] = [e_up, e_lo]
            upper, lower = spectral.boc_states(params)
            states += [upper.aligned(), lower.aligned()]
    if params.small_atom is not None:
        bic = spectral.bic_magic_cavity(params)
        if bic is None:
            notes["bic"] = "no BIC: magic-cavity condition fails"
        else:
            states.append(bic.aligned())
            notes["bic_small_atom_population"] = abs(bic.c_atom_s) ** 2
    elif spectral.bic_exists_single(params):
        states.append(spectral.bic_profile(params).aligned())
    else:
        notes["bic"] = f"no BIC: N={params.N} is not of the form 4m+2"
    path = os.path.join(outdir, "bound_states.csv")
    spectral.bound_states_to_csv(states, path)
    _manifest(outdir, "bound-states", cfg, params, ["bound_states.csv"], t0, notes)


def cmd_dynamics(cfg: dict, outdir: str, t0: float):
    t = _time_grid(cfg)
    sites = _sites(cfg)
    t_max = float(t[-1]) if len(t) else 0.0
    params = _params(cfg, sized_for=t_max)
    outputs = []
    pe_cols: dict = {}
    site_cols: dict = {}
    if len(t) == 0:
        empty = np.empty(0)
        pe_cols = {"pe_exact": empty, "pe_markov": empty, "pe_ww": empty, "D": empty.astype(complex)}
        site_cols = {f"beta2_{j}_{tag}": empty for j in sites for tag in ("exact", "ww")}
        heat = (np.empty(0), np.arange(params.N_c) - params.offset, np.empty((0, params.N_c)))
    else:
        initial = excited_atom_state(params, "giant")
        ts_exact = exact.evolve(params, initial, t, site_populations=sites)
        rates = markov.compute_rates(params)
        pe_markov = np.exp(-2.0 * rates.A.real * t)
        ts_ww = nonmarkov.alpha_single(params, t)
        beta_ww = nonmarkov.beta_profile(params, t, sites)
        pe_cols = {
            "pe_exact": ts_exact["P_e"],
            "pe_markov": pe_markov,
            "pe_ww": ts_ww["pe"],
            "D": ts_ww["D"],
        }
        if spectral.bic_exists_single(params):
            spec_params = params if params.N_c <= 1200 else _params({**cfg, "n_c": 1201})
            osc = spectral.bic_boc_oscillation(
                spec_params, excited_atom_state(spec_params, "giant").to_vector(spec_params), t,
                sites=[j for j in sites if 0 <= j <= params.N])
            pe_cols["pe_osc_pred"] = osc["pe_pred"]
        for j in sites:
            site_cols[f"beta2_{j}_exact"] = ts_exact[f"beta2_{j}"]
            site_cols[f"beta2_{j}_ww"] = beta_ww[f"beta2_{j}"]
        stride = max(1, (len(t) - 1) // max(1, cfg["heatmap_times"] - 1))
        heat = exact.snapshot_heatmap(params, initial, t[::stride])
    TimeSeries(t, pe_cols).to_csv(os.path.join(outdir, "pe.csv"))
    outputs.append("pe.csv")
    TimeSeries(t, site_cols).to_csv(os.path.join(outdir, "sites.csv"))
    outputs.append("sites.csv")
    exact.heatmap_to_csv(*heat, os.path.join(outdir, "heatmap.csv"))
    outputs.append("heatmap.csv")
    _manifest(outdir, "dynamics", cfg, params, outputs, t0)


def cmd_magic(cfg: dict, outdir: str, t0: float):
    t = _time_grid(cfg)
    t_max = float(t[-1]) if len(t) else 0.0
    params = _params(cfg, sized_for=t_max)
    if params.small_atom is None:
        raise ConfigError("magic command requires the small-atom block (g_s and m)")
    initial = cfg["initial"]
    if initial not in ("giant", "small"):
        raise ConfigError("initial must be 'giant' or 'small'")
    outputs = []
    notes: dict = {}

    # steady-state scan (needs a drive; default eta from config or 1e-3)
    from .model import Drive
    from dataclasses import replace

    eta = params.drive.eta if params.drive is not None else 1e-3 * params.xi
    scan_params = replace(params, drive=Drive(eta=eta, Delta=0.0), N_c=max(params.N + 2, 11),
                          origin_offset=None)
    deltas = np.linspace(cfg["delta_min"], cfg["delta_max"], cfg["delta_points"])
    dg, pg, ps = markov.rabi_scan(scan_params, deltas)
    write_csv(os.path.join(outdir, "rabi_scan.csv"), ["delta", "pe_g", "pe_s"],
              np.column_stack([dg, pg, ps]))
    outputs.append("rabi_scan.csv")

    if len(t) == 0:
        empty = np.empty(0)
        cols = {f"{obs}_{tag}": empty for obs in ("pe_g", "pe_s")
                for tag in ("exact", "markov", "ww")}
    else:
        undriven = replace(params, drive=None)
        psi0 = excited_atom_state(undriven, initial)
        ts_exact = exact.evolve(undriven, psi0, t)
        rho0 = markov.rho_two_atoms(initial)
        ts_markov = markov.evolve_magic(undriven, rho0, t)
        ts_ww = nonmarkov.magic_amplitudes(undriven, t, initial=initial)
        cols = {
            "pe_g_exact": ts_exact["P_e"], "pe_s_exact": ts_exact["P_s"],
            "pe_g_markov": ts_markov["P_e"], "pe_s_markov": ts_markov["P_s"],
            "pe_g_ww": ts_ww["pe_g"], "pe_s_ww": ts_ww["pe_s"],
        }
        rates = markov.compute_rates(undriven)
        if markov.reduction_holds(rates):
            _, plateau = markov.dark_state(undriven)
            notes["dark_state_plateau"] = plateau
            bic = spectral.bic_magic_cavity(replace(undriven, N_c=401, origin_offset=None))
            if bic is not None:
                notes["bic_projection_plateau"] = spectral.bic_projection_population(
                    bic, initial=initial)
    TimeSeries(t, cols).to_csv(os.path.join(outdir, "oscillation.csv"))
    outputs.append("oscillation.csv")
    _manifest(outdir, "magic", cfg, params, outputs, t0, notes)


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "bound-states": cmd_bound_states,
    "dynamics": cmd_dynamics,
    "magic": cmd_magic,
}

_CSV_HELP = {
    "spectrum": "spectrum.csv: (g, energy) long format, one row per eigenvalue",
    "bound-states": "bound_states.csv: (kind, energy, c_atom_g_re, c_atom_g_im, site, d_re, d_im)",
    "dynamics": ("pe.csv: (t, pe_exact, pe_markov, pe_ww, D_re, D_im[, pe_osc_pred]); "
                 "sites.csv: (t, beta2_<j>_exact, beta2_<j>_ww); "
                 "heatmap.csv: (t, j, population) long format"),
    "magic": ("rabi_scan.csv: (delta, pe_g, pe_s) steady states; "
              "oscillation.csv: (t, pe_{g,s}_{exact,markov,ww})"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crwqed",
        description="Giant-atom / coupled-resonator-waveguide QED toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} computation",
                           description=_CSV_HELP[name])
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable; wins over the file)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.time()
    try:
        cfg = _resolve(args, args.command)
        outdir = args.out
        os.makedirs(outdir, exist_ok=True)
        _COMMANDS[args.command](cfg, outdir, t0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ToleranceError, PositivityError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
