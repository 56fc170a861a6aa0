"""``latticeinv`` command line: one subcommand per experiment.

Parameters come from an optional TOML config (flat keys, or keys under a
table named after the subcommand) and are overridden by command-line flags.
Exit codes: 0 success, 2 invalid input, 3 a tolerance check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import tomli

from latticeinv import __version__
from latticeinv import experiments as ex
from latticeinv.errors import LatticeInvError
from latticeinv.evolve import decompose
from latticeinv.lattice import Displacement, LatticeShape, ParitySpec, Sector, SpinBasis, parity_vector
from latticeinv.oracles import open_chain_spectrum
from latticeinv.operators import HoppingTerm, TfimSpec, nearest_neighbor_hamiltonian
from latticeinv.report import ExperimentReport, Table, write_report

log = logging.getLogger("latticeinv")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TOLERANCE = 3

REQUIRED = object()


class ConfigError(Exception):
    pass


def _float_list(value) -> list[float]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list):
        raise ValueError(f"expected a list of numbers, got {value!r}")
    return [float(v) for v in value]


def _int_list(value) -> list[int]:
    out = []
    for v in _float_list(value):
        if v != int(v):
            raise ValueError(f"expected integers, got {v!r}")
        out.append(int(v))
    return out


def _int(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    f = float(value)
    if f != int(f):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(f)


def _float(value) -> float:
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _optional_float(value) -> Optional[float]:
    if value is None or (isinstance(value, str) and value.lower() in ("", "none")):
        return None
    return _float(value)


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "1", "yes", "false", "0", "no"):
        return value.lower() in ("true", "1", "yes")
    raise ValueError(f"expected true/false, got {value!r}")


def _choice(*options) -> Callable[[Any], str]:
    def parse(value):
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return value
    return parse


@dataclass(frozen=True)
class Param:
    parse: Callable[[Any], Any]
    default: Any
    help: str


COMMON = {
    "out": Param(str, None, "output directory (default: latticeinv-out/<subcommand>)"),
    "jobs": Param(_int, None, "worker processes for sweeps (default: available cores)"),
    "figures": Param(_bool, True, "render PNG figures next to the CSV files"),
}
# Keys that do not influence results and are left out of the config echo.
RUNTIME_KEYS = ("out", "jobs", "figures")

SECTORS = tuple(s.value for s in Sector)

SCHEMAS: dict[str, dict[str, Param]] = {
    "verify": {
        "seed": Param(_int, REQUIRED, "random seed for the randomised suites"),
        "trials": Param(_int, 200, "configurations in the theorem suite"),
        "necessity_trials": Param(_int, 100, "trials in the necessity suite"),
        "t_max": Param(_float, 5.0, "last sample time"),
        "n_times": Param(_int, 11, "sample times in [0, t_max]"),
        "tolerance": Param(_float, ex.THEOREM_TOL, "max allowed probability deviation"),
        "necessity_threshold": Param(_float, ex.NECESSITY_THRESHOLD, "deviation that counts as a violation"),
        "necessity_rate": Param(_float, 0.95, "required fraction of violating trials"),
    },
    "electronium": {
        "sites": Param(_int, REQUIRED, "sites per dimension"),
        "v_over_g": Param(_float_list, REQUIRED, "Coulomb strengths in units of g (comma separated)"),
        "xr0": Param(_int, REQUIRED, "initial separation in sites"),
        "g": Param(_float, 1.0, "hopping strength"),
        "dims": Param(_int, 1, "lattice dimension (1 or 2)"),
        "v_ons": Param(_optional_float, None, "onsite energy (default: v)"),
        "sector": Param(_choice(*SECTORS), "antisymmetric", "exchange sector"),
        "t_max": Param(_float, 500.0, "end of the time series"),
        "n_times": Param(_int, 500, "samples in [0, t_max]"),
        "sat_start": Param(_float, ex.SATURATION_WINDOW[0], "start of the saturation window"),
        "sat_end": Param(_float, ex.SATURATION_WINDOW[1], "end of the saturation window"),
        "sat_samples": Param(_int, ex.SATURATION_SAMPLES, "samples in the saturation window"),
    },
    "sweep": {
        "sites": Param(_int, REQUIRED, "sites per dimension"),
        "v_over_g": Param(_float_list, REQUIRED, "Coulomb strengths in units of g"),
        "xr0": Param(_int_list, REQUIRED, "initial separations in sites"),
        "g": Param(_float, 1.0, "hopping strength"),
        "dims": Param(_int, 1, "lattice dimension (1 or 2)"),
        "v_ons": Param(_optional_float, None, "onsite energy (default: v)"),
        "sector": Param(_choice(*SECTORS), "antisymmetric", "exchange sector"),
        "sat_start": Param(_float, ex.SATURATION_WINDOW[0], "start of the saturation window"),
        "sat_end": Param(_float, ex.SATURATION_WINDOW[1], "end of the saturation window"),
        "sat_samples": Param(_int, ex.SATURATION_SAMPLES, "samples in the saturation window"),
    },
    "scatter": {
        "sites": Param(_int, REQUIRED, "lattice sites"),
        "k": Param(_float_list, REQUIRED, "packet wavenumbers"),
        "delta_e": Param(_float_list, REQUIRED, "barrier depths (units set by delta_e_units)"),
        "delta_x": Param(_float_list, REQUIRED, "barrier widths"),
        "delta_e_units": Param(_choice("k2", "absolute"), "k2", "delta_e in multiples of k^2 or absolute"),
        "sigma_k": Param(_float, 10.0, "packet width times k"),
        "a": Param(_float, 1.0, "lattice spacing"),
        "g": Param(_float, 1.0, "hopping strength"),
        "tolerance": Param(_float, ex.THEOREM_TOL, "max symmetry residual"),
    },
    "spin": {
        "spins": Param(_int, REQUIRED, "number of spins"),
        "J": Param(_float_list, [-2.0, -1.0, 0.0, 1.0, 2.0], "couplings"),
        "h": Param(_float_list, [-1.5, -0.75, 0.0, 0.75, 1.5], "transverse fields"),
        "beta": Param(_float_list, [-1.0, -0.1, 0.1, 1.0], "inverse temperatures"),
        "seed": Param(_int, 0, "seed for the random parity-eigenstate initial states"),
        "t_max": Param(_float, 10.0, "last sample time for the dynamic check"),
        "n_times": Param(_int, 21, "sample times in [0, t_max]"),
        "z_tolerance": Param(_float, 1e-10, "max relative partition-function residual"),
        "tolerance": Param(_float, ex.THEOREM_TOL, "max expectation / probability residual"),
    },
    "spectrum": {
        "sites": Param(_int, REQUIRED, "largest chain length checked"),
        "g": Param(_float, 1.0, "hopping strength"),
        "tolerance": Param(_float, ex.THEOREM_TOL, "max eigenvalue residual"),
    },
}


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def load_config(path) -> dict:
    """Read a TOML file (or a ``report.json`` whose ``config`` echo is reused)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return data.get("config", data)
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def resolve(kind: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults, file values and flags (flags win), validating every key."""
    schema = {**SCHEMAS[kind], **COMMON}
    if isinstance(file_values.get(kind), dict):
        nested = file_values[kind]
        file_values = {k: v for k, v in file_values.items() if k != kind}
        file_values.update(nested)
    unknown = sorted(set(file_values) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for '{kind}': {', '.join(unknown)}")
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    config = {}
    for key, param in schema.items():
        if key in merged:
            try:
                config[key] = param.parse(merged[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value for '{key}': {exc}") from exc
        elif param.default is REQUIRED:
            raise ConfigError(f"missing required key '{key}' (set it in the config or pass {_flag(key)})")
        else:
            config[key] = param.default
    return config


# --- runners --------------------------------------------------------------------------------


def _meta(**extra) -> dict:
    return {"version": __version__, **extra}


def run_verify(cfg: dict) -> ExperimentReport:
    times = np.linspace(0.0, cfg["t_max"], cfg["n_times"])
    rep = ExperimentReport("verify", {}, metadata=_meta(times=times))
    theorem = Table("theorem_suite", ["index", "extents", "transformation", "max_deviation", "amplitude_residual"])
    cases = ex.theorem_suite(cfg["trials"], cfg["seed"], times)
    for c in cases:
        theorem.add(c.index, "x".join(map(str, c.extents)), c.transformation, c.max_deviation,
                    -1.0 if c.amplitude_residual is None else c.amplitude_residual)
    worst = max(cases, key=lambda c: c.max_deviation)
    rep.check("theorem_max_deviation", worst.max_deviation, cfg["tolerance"],
              index=worst.index, extents=worst.extents, transformation=worst.transformation)
    amps = [c for c in cases if c.amplitude_residual is not None]
    if amps:
        worst_amp = max(amps, key=lambda c: c.amplitude_residual)
        rep.check("amplitude_relation", worst_amp.amplitude_residual, ex.AMPLITUDE_TOL,
                  index=worst_amp.index, extents=worst_amp.extents)

    necessity = Table("necessity_suite", ["index", "extents", "transformation", "max_deviation"])
    ncases = ex.necessity_suite(cfg["necessity_trials"], cfg["seed"] + 1, times)
    for c in ncases:
        necessity.add(c.index, "x".join(map(str, c.extents)), c.transformation, c.max_deviation)
    rate = float(np.mean([c.max_deviation > cfg["necessity_threshold"] for c in ncases])) if ncases else 1.0
    rep.check("necessity_violation_rate", rate, cfg["necessity_rate"], ">=")
    rep.tables += [theorem, necessity]
    rep.scalars.update(theorem_max_deviation=worst.max_deviation, necessity_violation_rate=rate,
                       configurations=len(cases))
    return rep


def run_electronium(cfg: dict, jobs: int) -> ExperimentReport:
    times = np.linspace(0.0, cfg["t_max"], cfg["n_times"])
    results = ex.saturation_sweep(
        cfg["sites"], cfg["v_over_g"], [cfg["xr0"]], g=cfg["g"], D=cfg["dims"], v_ons=cfg["v_ons"],
        sector=Sector(cfg["sector"]), times=times, window=(cfg["sat_start"], cfg["sat_end"]),
        samples=cfg["sat_samples"], jobs=jobs)
    rep = ExperimentReport("electronium", {}, metadata=_meta(basis_size=results[0].spec.basis().size))
    summary = Table("summary", ["v_over_g", "x_r_sat"])
    for ratio, res in zip(cfg["v_over_g"], results):
        series = Table(f"series_v_over_g={ratio:g}", ["t", "E_xr"])
        for t, x in zip(res.times, res.expected_distance):
            series.add(float(t), float(x))
        rep.tables.append(series)
        summary.add(ratio, res.x_r_sat)
        bound, critical = ex.bound_state_criterion(ratio * cfg["g"], cfg["g"], cfg["dims"], cfg["xr0"])
        rep.scalars[f"v_over_g={ratio:g}"] = {"x_r_sat": res.x_r_sat, "criterion_bound": bound,
                                              "critical_distance": critical, "sites": list(res.sites)}
    summary.rows.sort(key=lambda r: r[0])
    rep.tables.append(summary)
    return rep


def run_sweep(cfg: dict, jobs: int) -> ExperimentReport:
    results = ex.saturation_sweep(
        cfg["sites"], cfg["v_over_g"], cfg["xr0"], g=cfg["g"], D=cfg["dims"], v_ons=cfg["v_ons"],
        sector=Sector(cfg["sector"]), window=(cfg["sat_start"], cfg["sat_end"]),
        samples=cfg["sat_samples"], jobs=jobs)
    rep = ExperimentReport("sweep", {}, metadata=_meta(basis_size=results[0].spec.basis().size))
    table = Table("sweep", ["v_over_g", "x_r0", "x_r_sat"])
    for res in results:
        table.add(res.v_over_g, res.x_r0, res.x_r_sat)
    table.rows.sort(key=lambda r: (r[0], r[1]))
    rep.tables.append(table)
    return rep


def run_scatter(cfg: dict) -> ExperimentReport:
    results = ex.scattering_sweep(cfg["sites"], cfg["k"], cfg["delta_e"], cfg["delta_x"],
                                  sigma_k=cfg["sigma_k"], a=cfg["a"], g=cfg["g"],
                                  delta_e_in_k2=cfg["delta_e_units"] == "k2")
    rep = ExperimentReport("scatter", {}, metadata=_meta(basis_size=cfg["sites"]))
    table = Table("scattering", ["k", "delta_e", "delta_x", "sigma", "t_star", "R", "R_mirror",
                                 "symmetry_residual", "density_residual"])
    for r in results:
        table.add(r.packet.k, r.barrier.delta_e, r.barrier.delta_x, r.packet.sigma, r.t_star, r.R,
                  r.R_mirror, r.symmetry_residual, r.density_residual)
    worst = max(results, key=lambda r: r.symmetry_residual)
    rep.check("symmetry_residual", worst.symmetry_residual, cfg["tolerance"],
              k=worst.packet.k, delta_e=worst.barrier.delta_e, delta_x=worst.barrier.delta_x)
    best = max(results, key=lambda r: r.R)
    dens = Table("density", ["x", "potential", "probability", "probability_mirror"])
    mirror = ex.scattering_run(best.L, best.packet, best.barrier, best.a, best.g, sign=-1)
    for x in range(best.L):
        dens.add(x * best.a, best.potential[x], best.density[x], mirror.density[x])
    rep.tables += [table, dens]
    rep.scalars.update(max_R=best.R, max_symmetry_residual=worst.symmetry_residual)
    return rep


def run_spin(cfg: dict) -> ExperimentReport:
    n = cfg["spins"]
    rows = ex.thermal_suite(n, cfg["J"], cfg["h"], cfg["beta"])
    rep = ExperimentReport("spin", {}, metadata=_meta(basis_size=2**n))
    thermal = Table("thermal", ["J", "h", "beta", "z_field_residual", "magnetization_residual",
                                "correlation_residual", "z_coupling_residual"])
    for r in rows:
        thermal.add(r.J, r.h, r.beta, r.z_field_residual, r.magnetization_residual,
                    r.correlation_residual, r.z_coupling_residual)
    for col, tol in (("z_field_residual", cfg["z_tolerance"]), ("z_coupling_residual", cfg["z_tolerance"]),
                     ("magnetization_residual", cfg["tolerance"]), ("correlation_residual", cfg["tolerance"])):
        worst = max(rows, key=lambda r: getattr(r, col))
        rep.check(col, getattr(worst, col), tol, J=worst.J, h=worst.h, beta=worst.beta)

    rng = np.random.default_rng(cfg["seed"])
    signs = parity_vector(SpinBasis(n), ParitySpec.spin_z())
    times = np.linspace(0.0, cfg["t_max"], cfg["n_times"])
    dynamic = Table("dynamic", ["J", "h", "max_deviation"])
    worst_dev, worst_at = 0.0, None
    for J in cfg["J"]:
        for h in cfg["h"]:
            psi = ex.random_parity_state(rng, signs, real=False)
            dev = ex.spin_invariance_check(TfimSpec(n, J, h), psi, ex.Transformation.FLIP_FIELD,
                                           times).max_abs_probability_deviation
            dynamic.add(J, h, dev)
            if worst_at is None or dev > worst_dev:
                worst_dev, worst_at = dev, (J, h)
    rep.check("dynamic_field_flip", worst_dev, cfg["tolerance"], J=worst_at[0], h=worst_at[1])
    rep.tables += [thermal, dynamic]
    return rep


def run_spectrum(cfg: dict) -> ExperimentReport:
    g = cfg["g"]
    rep = ExperimentReport("spectrum", {}, metadata=_meta())
    residuals = Table("residuals", ["L", "analytic_residual", "pairing_residual", "preservation_residual"])
    rng = np.random.default_rng(0)
    worst = {"analytic_residual": (0.0, 0), "pairing_residual": (0.0, 0), "preservation_residual": (0.0, 0)}
    for length in range(1, cfg["sites"] + 1):
        shape = LatticeShape((length,))
        e = decompose(nearest_neighbor_hamiltonian(shape, g)).eigenvalues
        analytic = float(np.max(np.abs(e - open_chain_spectrum(length, g))))
        pairing = ex.verify_spectrum_pairing(ex.SingleParticleModel.nearest_neighbor(shape, g))
        model = ex.SingleParticleModel(shape, (HoppingTerm(Displacement((1,)), g),
                                               HoppingTerm(Displacement((2,)), 0.5 * g),
                                               HoppingTerm(Displacement((3,)), 0.25 * g)),
                                       rng.uniform(-5 * g, 5 * g, length))
        preservation = ex.spectrum_preservation_residual(model)
        residuals.add(length, analytic, pairing, preservation)
        for key, val in (("analytic_residual", analytic), ("pairing_residual", pairing),
                         ("preservation_residual", preservation)):
            if val > worst[key][0]:
                worst[key] = (val, length)
    for key, (val, length) in worst.items():
        rep.check(key, val, cfg["tolerance"], L=length)
    spectrum = Table("spectrum", ["n", "energy", "analytic"])
    e = decompose(nearest_neighbor_hamiltonian(LatticeShape((cfg["sites"],)), g)).eigenvalues
    for n, (x, y) in enumerate(zip(e, open_chain_spectrum(cfg["sites"], g)), 1):
        spectrum.add(n, x, y)
    rep.tables += [residuals, spectrum]
    return rep


def execute(kind: str, cfg: dict) -> ExperimentReport:
    jobs = cfg.get("jobs") or os.cpu_count() or 1
    if kind == "verify":
        rep = run_verify(cfg)
    elif kind == "electronium":
        rep = run_electronium(cfg, jobs)
    elif kind == "sweep":
        rep = run_sweep(cfg, jobs)
    elif kind == "scatter":
        rep = run_scatter(cfg)
    elif kind == "spin":
        rep = run_spin(cfg)
    else:
        rep = run_spectrum(cfg)
    rep.config = {k: v for k, v in cfg.items() if k not in RUNTIME_KEYS}
    return rep


# --- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="latticeinv", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, schema in SCHEMAS.items():
        p = sub.add_parser(kind, parents=[common])
        p.add_argument("--config", help="TOML config file (or a previous report.json)")
        for key, param in {**schema, **COMMON}.items():
            default = "" if param.default in (REQUIRED, None) else f" [default: {param.default}]"
            p.add_argument(_flag(key), dest=key, default=None, help=param.help + default)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = args.kind
    flags = {k: v for k, v in vars(args).items() if k not in ("kind", "config", "verbose")}
    try:
        file_values = load_config(args.config) if args.config else {}
        cfg = resolve(kind, file_values, flags)
    except ConfigError as exc:
        print(f"latticeinv {kind}: {exc}", file=sys.stderr)
        return EXIT_INVALID

    outdir = Path(cfg["out"] or Path("latticeinv-out") / kind)
    start = time.perf_counter()
    try:
        report = execute(kind, cfg)
    except LatticeInvError as exc:
        print(f"latticeinv {kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    log.info("%s finished in %.2f s", kind, time.perf_counter() - start)

    for path in write_report(report, outdir):
        log.info("wrote %s", path)
    if cfg["figures"]:
        from latticeinv.plotting import render
        for path in render(report, outdir):
            log.info("wrote %s", path)

    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.value:.3e} (required {check.comparison} {check.tolerance:.3e})")
    failed = report.failed_checks
    if failed:
        for check in failed:
            print(f"tolerance failure in {check.name}: max deviation {check.value:.6e} at {check.context}",
                  file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
