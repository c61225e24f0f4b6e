"""Command-line entry point: ``kdspin --config run.json --out results/``.

Every physics quantity in a config is in units of the electron mass, except
for ``mode = "experiment"`` whose nested block is SI.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import jsonschema
import numpy as np

from . import analysis, compton, dirac, evolution, experiment, field, perturbation
from .constants import fs_to_natural, natural_to_fs
from .errors import InvalidArgument, KDSpinError, PoorFit, PreconditionError

log = logging.getLogger("kdspin")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3

MAX_SWEEP_CYCLES = 1e9

MODES = ("simulate", "perturbation", "compton-check", "tune", "experiment", "sweep")

DEFAULTS = {
    "k_l": field.REFERENCE_K_L,
    "xi": field.REFERENCE_XI,
    "xi_prime": None,  # same as xi
    "p_z": "tuned",
    "q_2": 0.0,
    "truncation": field.DEFAULT_TRUNCATION,
    "steps_per_cycle": evolution.DEFAULT_STEPS_PER_CYCLE,
    "ramp_cycles": field.DEFAULT_RAMP_CYCLES,
    "duration_fs": 20.0,
    "initial_spin": "se",
    "samples": 2000,
    "figures": True,
}

_PHYSICS = {
    "k_l": {"type": "number", "exclusiveMinimum": 0},
    "xi": {"type": "number", "minimum": 0},
    "xi_prime": {"type": "number", "minimum": 0},
    "p_z": {"oneOf": [{"type": "number"}, {"const": "tuned"}]},
    "q_2": {"type": "number"},
    "truncation": {"type": "integer", "minimum": 2},
    "steps_per_cycle": {"type": "integer", "minimum": evolution.MIN_STEPS_PER_CYCLE},
    "ramp_cycles": {"type": "number", "minimum": 0},
    "duration_fs": {"type": "number", "exclusiveMinimum": 0},
    "duration_cycles": {"type": "number", "exclusiveMinimum": 0},
    "initial_spin": {"enum": ["se", "nw"]},
    "samples": {"type": "integer", "minimum": analysis.MIN_SAMPLES},
    "figures": {"type": "boolean"},
}

_SWEEP = {
    "type": "object",
    "additionalProperties": False,
    "required": ["axis", "values"],
    "properties": {
        "axis": {"enum": ["xi", "q_2"]},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "half_periods": {"type": "number", "exclusiveMinimum": 0},
    },
}


def _schema(mode):
    props = {"mode": {"enum": list(MODES)}}
    if mode == "experiment":
        props["experiment"] = {"type": "object"}
    elif mode == "tune":
        props["k_l"] = _PHYSICS["k_l"]
    elif mode == "compton-check":
        props.update(k_l=_PHYSICS["k_l"], p_z=_PHYSICS["p_z"],
                     n={"type": "integer", "minimum": 1})
    else:
        props.update(_PHYSICS)
        if mode == "sweep":
            props["sweep"] = _SWEEP
    schema = {"type": "object", "additionalProperties": False, "required": ["mode"],
              "properties": props}
    if mode == "sweep":
        schema["required"] = ["mode", "sweep"]
    return schema


class ConfigError(Exception):
    pass


def load_config(path):
    """Parse and validate a run config; raises :class:`ConfigError` with a diagnostic."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    mode = data.get("mode")
    if mode not in MODES:
        raise ConfigError(f"{path}: field 'mode' must be one of {', '.join(MODES)}, got {mode!r}")
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft7Validator(_schema(mode)).iter_errors(data))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{path}: field '{where}': {err.message}")
    if "duration_fs" in data and "duration_cycles" in data:
        raise ConfigError(f"{path}: give either 'duration_fs' or 'duration_cycles', not both")
    return data


def _resolved(cfg):
    out = dict(DEFAULTS)
    out.update(cfg)
    if out["xi_prime"] is None:
        out["xi_prime"] = out["xi"]
    if "duration_cycles" in cfg:
        out.pop("duration_fs")
    return out


def _p_z(cfg):
    if cfg["p_z"] == "tuned":
        return perturbation.tune_longitudinal_momentum(cfg["k_l"])
    return float(cfg["p_z"])


def _total_cycles(cfg):
    if "duration_cycles" in cfg:
        return float(cfg["duration_cycles"])
    return fs_to_natural(cfg["duration_fs"]) * cfg["k_l"] / (2 * math.pi)


def _ladder(cfg, p_z):
    p_i = np.array([-cfg["k_l"], cfg["q_2"], p_z])
    return field.MomentumLadder(p_i, cfg["k_l"], cfg["truncation"])


def _laser(cfg, total_cycles):
    return field.reference_laser(cfg["k_l"], cfg["xi"], cfg["xi_prime"], total_cycles=total_cycles,
                             ramp_cycles=cfg["ramp_cycles"])


def _stride(total_cycles, samples):
    return max(1, int(total_cycles // samples))


def _fit_summary(times, probs):
    try:
        fit = analysis.fit_rabi(times, probs)
    except (PoorFit, PreconditionError) as exc:
        return None, {"omega_fit": None, "fit_error": str(exc),
                      "r_squared": getattr(exc, "r_squared", None)}
    return fit, {"omega_fit": fit.omega, "r_squared": fit.r_squared, "fit_residual": fit.residual,
                 "omega_fit_over_reference": fit.omega / analysis.REFERENCE_RABI_FREQUENCY}


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_simulate(cfg, out):
    p_z = _p_z(cfg)
    ladder = _ladder(cfg, p_z)
    total = _total_cycles(cfg)
    laser = _laser(cfg, total)
    spin = analysis.tilted_spinor(cfg["initial_spin"])
    result = evolution.propagate(
        evolution.basis_state(ladder, 0, dirac.PLUS, spin), laser, ladder,
        steps_per_cycle=cfg["steps_per_cycle"], sample_stride=_stride(total, cfg["samples"]))
    report = analysis.channel_report(result, cfg["initial_spin"])
    analysis.write_csv(os.path.join(out, "simulate.csv"), report)
    fit, fit_info = _fit_summary(report.times, report.diffracted)
    omega_pert = perturbation.perturbative_rabi_frequency(laser, ladder)
    summary = {
        "mode": "simulate",
        "p_z": p_z,
        "total_cycles": total,
        "duration_fs": float(natural_to_fs(laser.duration)),
        "samples": len(report.times),
        "omega_perturbative": omega_pert,
        "reference_omega": analysis.REFERENCE_RABI_FREQUENCY,
        "max_diffracted": float(report.diffracted.max()),
        "max_pair_sum_residual": float(report.pair_sum_residual.max()),
        "channel_maxima": report.max_deviation,
        "spin_purity": analysis.spin_purity(result, 2, "nw" if cfg["initial_spin"] == "se" else "se"),
        "max_norm_drift": result.max_norm_drift,
        "max_antiparticle": float(result.antiparticle.max()),
        "cycle_map_defect": result.meta.get("cycle_map_defect"),
        **fit_info,
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    if cfg["figures"]:
        from . import plotting

        plotting.plot_channels(report, os.path.join(out, "channels.png"), fit)
        plotting.plot_norm(report, os.path.join(out, "norm.png"))
    return summary


def run_perturbation(cfg, out):
    p_z = _p_z(cfg)
    ladder = _ladder(cfg, p_z)
    total = _total_cycles(cfg)
    laser = _laser(cfg, total)
    kin = perturbation.ScaledKinematics.from_ladder(ladder)
    fa, fb, fc, fd = perturbation.prefactors(ladder.momentum(0), ladder.momentum(1), cfg["k_l"])
    contracted = perturbation.contracted_spin_propagation(laser, kin)
    lam, filt_err = perturbation.filter_deviation(contracted)
    omega = perturbation.perturbative_rabi_frequency(laser, ladder)
    s_se, _ = dirac.tilted_spin_basis()
    t = laser.duration
    short = perturbation.short_time_probability(cfg["xi"], cfg["xi_prime"], cfg["k_l"], t)
    summary = {
        "mode": "perturbation",
        "p_z": p_z,
        "prefactors": {"F_a": fa, "F_b": fb, "F_c": fc, "F_d": fd},
        "omega_perturbative": omega,
        "omega_over_reference": omega / analysis.REFERENCE_RABI_FREQUENCY,
        "filter_relative_error": filt_err,
        "filter_scale_abs": abs(lam),
        "spin_preserving_fraction": abs(dirac.braket(s_se, contracted, s_se)) / np.linalg.norm(contracted),
        "t": t,
        "short_time_probability": short,
        "rabi_short_time_probability": (omega * t / 2) ** 2,
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_tune(cfg, out):
    k_l = cfg.get("k_l", DEFAULTS["k_l"])
    p_z = perturbation.tune_longitudinal_momentum(k_l)
    summary = {"mode": "tune", "k_l": k_l, "p_z": p_z, "p_z_minus_1": p_z - 1.0}
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_compton(cfg, out):
    k_l = cfg.get("k_l", DEFAULTS["k_l"])
    p_z = _p_z({"k_l": k_l, "p_z": cfg.get("p_z", "tuned")})
    kins = compton.quasi_random_on_shell(cfg.get("n", 100))
    s_se, s_nw = dirac.tilted_spin_basis()
    res = [compton.identity_residuals(kins, a, b) for a in (s_se, s_nw) for b in (s_se, s_nw)]
    gauge = max(compton.gauge_residual(k, s_se, s_nw) for k in kins)
    rows = compton.channel_amplitudes(k_l, p_z)
    summary = {
        "mode": "compton-check",
        "n": len(kins),
        "max_relative_residual": float(np.max(res)),
        "max_gauge_residual": float(gauge),
        "p_z": p_z,
        "channels": [{"initial": r.initial, "final": r.final, "helicity": r.helicity,
                      "abs_amplitude": abs(r.amplitude), "weight": r.weight} for r in rows],
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_experiment(cfg, out):
    try:
        exp = (experiment.ExperimentConfig.from_dict(cfg["experiment"])
               if "experiment" in cfg else experiment.reference_config())
    except (InvalidArgument, TypeError) as exc:
        raise ConfigError(f"field 'experiment': {exc}") from exc
    report = experiment.count_rate(exp).to_dict()
    report["mode"] = "experiment"
    report["natural_unit_probability"] = experiment.natural_unit_probability(
        report["intensity_1"], report["intensity_2"], exp.pulse_duration, exp.photon_energy)
    _write_json(os.path.join(out, "summary.json"), report)
    return report


def sweep_point(cfg, axis, value, half_periods):
    """One sweep row; failures become a row with ``status = "failed"``.

    Along ``xi`` the spin-resolved channel ``|<s_nw|c_2>|^2`` is fitted. Along
    ``q_2`` the diffracted spin is mixed and the dynamics beat, so the total
    n=2 occupation is fitted and a poor fit only marks the row ``fit_failed``;
    the purity at the first diffraction maximum is still reported.
    """
    row = {"value": value, "status": "failed"}
    try:
        point = dict(cfg)
        point[axis] = value
        if axis == "xi":
            point["xi_prime"] = value
        resolved = axis == "xi"
        p_z = _p_z(point)
        ladder = _ladder(point, p_z)
        omega = perturbation.perturbative_rabi_frequency(_laser(point, None), ladder, resolved)
        if omega == 0:
            raise PreconditionError("no two-photon coupling at this point")
        half_cycles = 0.5 * point["k_l"] / omega
        if half_periods * half_cycles > MAX_SWEEP_CYCLES:
            raise PreconditionError(
                f"{half_periods * half_cycles:.3g} cycles exceeds the sweep limit {MAX_SWEEP_CYCLES:.0e}")
        cycles = half_periods * half_cycles + 2 * point["ramp_cycles"]
        laser = _laser(point, cycles)
        result = evolution.propagate(
            evolution.basis_state(ladder, 0, dirac.PLUS, analysis.tilted_spinor("se")), laser,
            ladder, steps_per_cycle=point["steps_per_cycle"],
            sample_stride=_stride(cycles, point["samples"]))
        purity = analysis.purity_at_first_maximum(
            result, (half_cycles + point["ramp_cycles"]) * laser.period)
        row.update(omega_perturbative=omega, purity=purity, cycles=cycles,
                   max_norm_drift=result.max_norm_drift)
        probs = (result.projection(2, analysis.tilted_spinor("nw")) if resolved
                 else result.occupation(2))
        try:
            fit = analysis.fit_rabi(result.times, probs)
        except PoorFit as exc:
            if resolved:
                raise
            row.update(status="fit_failed", error=f"PoorFit: {exc}")
            return row
        row.update(status="ok", omega_fit=fit.omega, ratio=fit.omega / omega,
                   r_squared=fit.r_squared)
    except KDSpinError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_FIELDS = ("value", "status", "omega_fit", "omega_perturbative", "ratio", "r_squared",
                "purity", "cycles", "max_norm_drift", "error")


def run_sweep(cfg, out, jobs=1):
    spec = cfg["sweep"]
    axis, values = spec["axis"], [float(v) for v in spec["values"]]
    if len(set(values)) < 2:
        raise ConfigError("field 'sweep/values': need at least two distinct points")
    half = spec.get("half_periods", 6.2)
    args = [(cfg, axis, v, half) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_point, *zip(*args)))
    else:
        rows = [sweep_point(*a) for a in args]
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in SWEEP_FIELDS})
    ok = [r for r in rows if r["status"] == "ok"]
    measured = [r for r in rows if r["status"] != "failed"]
    summary = {"mode": "sweep", "axis": axis, "rows": rows,
               "failed": len(rows) - len(measured)}
    if axis == "xi" and len(ok) >= 2:
        x = np.log([r["value"] for r in ok])
        summary["log_slope_fit"] = float(np.polyfit(x, np.log([r["omega_fit"] for r in ok]), 1)[0])
        summary["log_slope_perturbative"] = float(
            np.polyfit(x, np.log([r["omega_perturbative"] for r in ok]), 1)[0])
    if axis == "q_2" and len(measured) >= 2:
        # purity should fall as |q_2| grows
        by_dist = sorted(measured, key=lambda r: abs(r["value"]))
        pur = [r["purity"] for r in by_dist]
        summary["purity_monotonic"] = bool(all(a >= b for a, b in zip(pur, pur[1:])))
    _write_json(os.path.join(out, "summary.json"), summary)
    if cfg["figures"]:
        from . import plotting

        plotting.plot_sweep(axis, rows, os.path.join(out, "sweep.png"))
    return summary


def _epilog():
    lines = ["modes: " + ", ".join(MODES), "", "config defaults (units of m):"]
    lines += [f"  {k} = {v}" for k, v in DEFAULTS.items()]
    lines += ["  sweep.half_periods = 6.2", "  compton-check n = 100", "",
              "exit codes: 0 ok, 2 config error, 3 physics error"]
    return "\n".join(lines)


def build_parser():
    p = argparse.ArgumentParser(
        prog="kdspin", description="Spin-dependent Kapitza-Dirac scattering runs.",
        epilog=_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", default="kdspin_out", help="output directory (default: %(default)s)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps (default: 1)")
    p.add_argument("--steps-per-cycle", type=int, default=None,
                   help=f"override RK4 steps per optical cycle (default {evolution.DEFAULT_STEPS_PER_CYCLE})")
    p.add_argument("--truncation", type=int, default=None,
                   help=f"override ladder truncation N (default {field.DEFAULT_TRUNCATION})")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(config, out, jobs=1):
    """Execute a validated config; returns the summary dict."""
    os.makedirs(out, exist_ok=True)
    mode = config["mode"]
    if mode == "tune":
        return run_tune(config, out)
    if mode == "compton-check":
        return run_compton(config, out)
    if mode == "experiment":
        return run_experiment(config, out)
    cfg = _resolved(config)
    if mode == "simulate":
        return run_simulate(cfg, out)
    if mode == "perturbation":
        return run_perturbation(cfg, out)
    summary = run_sweep(cfg, out, jobs)
    if summary["failed"] == len(summary["rows"]):
        raise PreconditionError("every sweep point failed: " + summary["rows"][0].get("error", ""))
    return summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        config = load_config(args.config)
        for flag, key in ((args.steps_per_cycle, "steps_per_cycle"), (args.truncation, "truncation")):
            if flag is not None:
                if config["mode"] in ("tune", "compton-check", "experiment"):
                    raise ConfigError(f"--{key.replace('_', '-')} does not apply to mode {config['mode']}")
                config[key] = flag
                err = jsonschema.exceptions.best_match(
                    jsonschema.Draft7Validator(_schema(config["mode"])).iter_errors(config))
                if err is not None:
                    raise ConfigError(f"--{key.replace('_', '-')}: {err.message}")
        summary = run(config, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgument as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KDSpinError as exc:
        print(f"physics error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    print(json.dumps({k: v for k, v in summary.items() if not isinstance(v, (list, dict))},
                     sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
