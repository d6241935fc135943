"""``qensemble`` command line: one subcommand per figure or table.

Every run writes at least one CSV into the output directory, prints a
one-line summary to stdout and, with ``--svg``, a line plot next to each CSV.
Failures print one JSON object on stderr and exit with a code from
:data:`EXIT_CODES`.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qensemble import constants as qc
from qensemble import diffraction as dif
from qensemble import ensemble as ens
from qensemble import interferometry as itf
from qensemble import local_nlse as nl
from qensemble import square_well as sw
from qensemble import wavepacket as wp
from qensemble.io import write_csv

ENV_OUT = "QENSEMBLE_OUT"
DEFAULT_OUT = "qensemble-out"

EXIT_CODES = {
    "ok": 0,
    "usage": 2,
    "config": 3,
    "parameter": 4,
    "output": 5,
    "domain": 6,
}

GLOBAL_KEYS = {"out", "seed", "svg", "subcommand"}


class CliError(Exception):
    kind = "domain"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UsageError(CliError):
    kind = "usage"


class ConfigError(CliError):
    kind = "config"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ParameterError(CliError):
    kind = "parameter"


class OutputError(CliError):
    kind = "output"


class UnknownKeyWarning(UserWarning):
    pass


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output_dir: Path = Path(DEFAULT_OUT)
    seed: int = 0
    emit_svg: bool = False


# ---------------------------------------------------------------------------
# configuration files


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value or "=" in value or not key.replace("_", "").replace("-", "").isalnum():
            raise ConfigError(f"malformed line {raw.strip()!r}", line=lineno)
        out[key.replace("-", "_")] = _parse_scalar(value)
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text)


# ---------------------------------------------------------------------------
# helpers


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"expected comma-separated numbers, got {text!r}") from exc


def _svg(path: Path, x, ys: dict, xlabel: str, ylabel: str) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "qensemble"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, label=label, lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    out = path.with_suffix(".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


class Output:
    def __init__(self, cfg: RunConfig):
        self.dir = cfg.output_dir
        self.svg = cfg.emit_svg
        self.files: list[Path] = []

    def csv(self, name, header, columns, plot=None):
        path = write_csv(self.dir / name, header, columns)
        self.files.append(path)
        if self.svg and plot is not None:
            x, ys, xl, yl = plot
            self.files.append(_svg(path, x, ys, xl, yl))
        return path


# ---------------------------------------------------------------------------
# subcommands: each takes (params, cfg, out) and returns the summary line


def cmd_constants(p, cfg, out):
    c = qc.derived_constants()
    names = ["hbar", "m_electron", "r_hydrogen", "v_electron", "beta_el", "norm_coefficient"]
    values = [c.hbar, c.m_electron, c.r_hydrogen, c.v_electron, c.beta_el,
              qc.norm_integral_coefficient(c.m_electron, c.hbar)]
    out.csv("constants.csv", ["index (1)", "value (SI)"], [np.arange(len(values)), values])
    return "beta_el=%.6e " % c.beta_el + " ".join(f"{n}={v:.6e}" for n, v in zip(names, values) if n != "beta_el")


def cmd_ensemble_density(p, cfg, out):
    edges = _floats(p["edges"])
    values = _floats(p["values"])
    V = ens.PotentialField1D.from_steps(edges, values)
    grid = np.linspace(edges[0], edges[-1], p["n"])
    d = ens.ensemble_density(V, p["e_t"], grid)
    path = d.to_csv(out.dir / "ensemble_density.csv")
    out.files.append(path)
    if out.svg:
        out.files.append(_svg(path, grid, {"w": d.w}, "x (m)", "w (1/m)"))
    total = float(np.trapezoid(d.w, grid))
    return f"rho_bar={d.rho_bar:.6e} integral={total:.6f}"


def cmd_square_well(p, cfg, out):
    g = sw.WellGeometry(p["x0"], p["v0"], p["m"], p["hbar"])
    half = p["extent"] * g.x0
    grid = np.linspace(-half, half, p["n"])
    d = sw.well_ensemble_density(g, p["e_t"], grid, mode=p["mode"])
    out.csv("square_well_density.csv", ["x (m)", "w (1/m)"], [grid, d.w],
            plot=(grid, {"w": d.w}, "x (m)", "w (1/m)"))
    k0 = math.sqrt(g.m * p["e_t"]) / g.hbar
    ks = np.linspace(0.0, k0, p["members"])
    ks = ks[np.abs(np.cos(ks * g.x0)) > sw.SINGULAR_TOL]
    path = sw.write_member_dump(out.dir / "square_well_members.csv", sw.member_table(g, ks))
    out.files.append(path)
    return f"mode={p['mode']} rho_bar={d.rho_bar:.6e} w(0)={float(d.w[np.argmin(np.abs(grid))]):.6e}"


def cmd_spread(p, cfg, out):
    par = wp.GaussianPacketParams(p["b"], p["k0"], p["m"], p["hbar"])
    kg = wp.default_k_grid(par, n=p["nk"])
    sp = wp.gaussian_spectrum(par, kg)
    scale = wp.gaussian_density_scale(par)
    worst = 0.0
    for t in _floats(p["times"]):
        centre = par.group_velocity * t
        x = np.linspace(centre - p["half_width"], centre + p["half_width"], p["n"])
        psi = wp.evolve(sp, t, x)
        ref = wp.gaussian_norm_schrodinger(par, x, t)
        worst = max(worst, float(np.max(np.abs(psi.density * scale - ref))))
        path = psi.to_csv(out.dir / f"spread_t{t:g}.csv", scale=scale)
        out.files.append(path)
        if out.svg:
            out.files.append(_svg(path, x, {"numeric": psi.density * scale, "free evolution": ref},
                                  "x (m)", "|psi|^2 (1)"))
    mono = wp.SpectralPacket.monochromatic(par.k0, par.m, par.hbar)
    xs = np.linspace(-p["half_width"], p["half_width"], p["n"])
    flat = wp.evolve(mono, max(_floats(p["times"])), xs)
    out.csv("spread_plane_wave.csv", ["x (m)", "|psi|^2 (1)", "Re psi (1)", "Im psi (1)"],
            [xs, flat.density, flat.values.real, flat.values.imag],
            plot=(xs, {"|psi|^2": flat.density}, "x (m)", "|psi|^2 (1)"))
    return f"max_dev_free_evolution={worst:.3e} plane_wave_dev={float(np.max(np.abs(flat.density - 1))):.3e}"


def cmd_nlse(p, cfg, out):
    beta, u, a = p["beta"], p["u"], p["amplitude"]
    w = nl.LocalPlaneWave.on_shell(a, u, phi=p["phi"], beta=beta)
    n = p["n"]
    # whole number of wavelengths on the periodic box
    length = p["wavelengths"] * 2 * math.pi / w.k
    f = nl.LocalField1D.periodic(length, n, lambda x: w(x, 0.0), phi=p["phi"], beta=beta)
    end = nl.evolve_local(f, p["dt"], p["steps"])
    exact = w(end.grid, p["dt"] * p["steps"])
    drift = float(np.max(np.abs(np.abs(end.psi) - abs(a))))
    out.csv("nlse.csv", ["x (1)", "|psi| (1)", "Re psi (1)", "Im psi (1)", "Re exact (1)", "Im exact (1)"],
            [end.grid, np.abs(end.psi), end.psi.real, end.psi.imag, exact.real, exact.imag],
            plot=(end.grid, {"Re psi": end.psi.real, "Re exact": exact.real}, "x (1)", "psi (1)"))
    return f"amplitude_drift={drift:.3e} steps={p['steps']}"


def cmd_gamma(p, cfg, out):
    d = np.linspace(0.0, 2 * math.pi, p["n"])
    den = 4.0 * (1.0 + np.cos(d)) ** 2 - 2.0
    keep = np.abs(den) > p["pole_gap"]
    d = d[keep]
    g = nl.interference_gamma(d, p["beta"])
    out.csv("gamma.csv", ["delta_phi (rad)", "gamma (beta units)"], [d, g / p["beta"]],
            plot=(d, {"Gamma/beta": g / p["beta"]}, "delta_phi (rad)", "Gamma / beta"))
    g0 = nl.interference_gamma(0.0, p["beta"]) / p["beta"]
    return f"gamma(0)/beta={g0:.12f} poles={nl.GAMMA_CRITICAL_PHASES[0]:.6f},{nl.GAMMA_CRITICAL_PHASES[1]:.6f}"


def _aperture(p):
    if p["slits"] == 2:
        return dif.SlitAperture.double(p["width"], p["separation"], p["distance"])
    if p["slits"] == 1:
        return dif.SlitAperture.single(p["width"], p["distance"])
    raise ParameterError("slits must be 1 or 2")


def _pattern(p):
    a = _aperture(p)
    k = 2 * math.pi / p["wavelength"]
    x = np.linspace(-p["screen"], p["screen"], p["n"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dif.NearFieldWarning)
        intensity = dif.intensity_pattern(a, k, x)
    return a, x, intensity


def cmd_diffract(p, cfg, out):
    a, x, intensity = _pattern(p)
    out.csv("diffraction.csv", ["x (m)", "I (1/m)"], [x, intensity],
            plot=(x, {"I": intensity}, "x (m)", "I (1/m)"))
    half = 3 * p["wavelength"] * p["distance"] / (p["separation"] if p["slits"] == 2 else 20 * p["width"])
    c = dif.fringe_contrast(x, intensity, 0.0, min(half, p["screen"]))
    return f"slits={p['slits']} contrast={c:.6f}"


def cmd_sample(p, cfg, out):
    a, x, intensity = _pattern(p)
    rec = dif.sample_hits(x, intensity, p["count"], seed=cfg.seed)
    path = rec.to_csv(out.dir / "hits.csv")
    out.files.append(path)
    if out.svg:
        counts, _ = np.histogram(rec.positions, bins=x)
        mids = 0.5 * (x[1:] + x[:-1])
        out.files.append(_svg(path, mids, {"hits": counts / counts.sum(),
                                           "cell mass": dif.cell_probabilities(x, intensity)},
                              "x (m)", "fraction (1)"))
    return f"seed={cfg.seed} count={p['count']} l1={dif.histogram_l1(rec, x, intensity):.6f}"


def cmd_magnetic(p, cfg, out):
    ref = math.sqrt(p["rho_bar"]) * p["u0"]
    b = np.linspace(0.0, p["b_max"], p["n"])
    unwrapped = np.array([itf.unwrapped_phase(p["l"], p["lam"], bb, p["rho_bar"], p["u0"]) for bb in b])
    alpha = np.array([itf.magnetic_phase_shift(p["l"], p["lam"], bb, p["rho_bar"], p["u0"])[0] for bb in b])
    out.csv("magnetic_phase.csv", ["B_ext (T)", "alpha_unwrapped (rad)", "alpha (rad)"], [b, unwrapped, alpha],
            plot=(b, {"unwrapped": unwrapped, "principal": alpha}, "B_ext (T)", "phase (rad)"))
    f = itf.EmFieldState.plane_wave(p["b0"], 1.0, p["u0"])
    th = np.linspace(0.0, 2 * math.pi, 37)[:-1]
    pot = np.array([itf.em_potential(itf.apply_uniform_field(f, p["b_max"], t, 0.0, 0.0), p["u0"]) for t in th])
    out.csv("magnetic_theta.csv", ["theta (rad)", "phi_em (T^2)"], [th, pot],
            plot=(th, {"phi_em": pot}, "theta (rad)", "phi_em (T^2)"))
    alpha_max, turns = itf.magnetic_phase_shift(p["l"], p["lam"], p["b_max"], p["rho_bar"], p["u0"])
    return (f"alpha={alpha_max:.6f} n={turns} ratio={p['b_max'] / ref:.3e} "
            f"theta_spread={float(np.ptp(pot)):.3e}")


def cmd_eraser(p, cfg, out):
    phi = np.linspace(0.0, 2 * math.pi, p["n"])
    cols, contrasts = {}, []
    for stage in itf.ERASER_STAGES:
        vals = np.array([itf.eraser_intensity(itf.EraserConfig(stage, f, p["base"])) for f in phi])
        cols[stage] = vals
        contrasts.append(itf.contrast(vals))
    out.csv("eraser.csv", ["phi (rad)"] + [f"{s} (intensity)" for s in itf.ERASER_STAGES],
            [phi, *cols.values()], plot=(phi, cols, "phi (rad)", "phi_em (intensity)"))
    return "contrast=" + ",".join(f"{c:.6f}" for c in contrasts)


def cmd_zeno(p, cfg, out):
    if p["n"] < 1:
        raise ParameterError("n must be at least 1")
    ns = np.arange(1, p["n"] + 1)
    surv = np.array([itf.zeno_repeated_measurement(p["dh2"], p["t"], int(k)) for k in ns])
    out.csv("zeno.csv", ["n (1)", "survival (1)"], [ns, surv],
            plot=(ns, {"survival": surv}, "n (1)", "survival (1)"))
    return f"survival={surv[-1]:.12g} n={p['n']}"


def cmd_chain(p, cfg, out):
    if p["n"] < 1:
        raise ParameterError("n must be at least 1")
    ns = np.arange(1, p["n"] + 1)
    tr = np.array([itf.polarizer_chain_transmission(int(k), p["element_transmission"]) for k in ns])
    out.csv("chain.csv", ["n (1)", "transmission (1)"], [ns, tr],
            plot=(ns, {"transmission": tr}, "n (1)", "transmission (1)"))
    return f"transmission={tr[-1]:.12g} n={p['n']}"


def cmd_ifm(p, cfg, out):
    rs = np.linspace(0.0, 1.0, p["n"])
    res = [itf.ifm_figure_of_merit(r) for r in rs]
    out.csv("ifm.csv", ["R (1)", "p_detect (1)", "p_trigger (1)", "merit (1)"],
            [rs, [r.p_detect for r in res], [r.p_trigger for r in res], [r.merit for r in res]],
            plot=(rs, {"merit": [r.merit for r in res]}, "R (1)", "merit (1)"))
    r = itf.ifm_figure_of_merit(p["r"])
    return f"merit={r.merit:.12g} p_detect={r.p_detect:.12g} p_trigger={r.p_trigger:.12g}"


# name -> (handler, help, {param: (type, default, help)})
_M = qc.M_ELECTRON
SUBCOMMANDS = {
    "constants": (cmd_constants, "print the derived constants", {}),
    "ensemble-density": (cmd_ensemble_density, "ensemble density for a step potential", {
        "e_t": (float, 3.2e-19, "total energy E_T (J)"),
        "edges": (str, "0,1e-9,2e-9,3e-9", "segment edges (m), comma separated"),
        "values": (str, "0,1.6e-19,0", "segment potentials (J), comma separated"),
        "n": (int, 601, "grid points"),
    }),
    "square-well": (cmd_square_well, "square-well ensemble density and member table", {
        "x0": (float, 1e-10, "half width x0 (m)"),
        "v0": (float, 1.6e-18, "well depth V0 (J)"),
        "e_t": (float, 4.8e-19, "total energy E_T (J)"),
        "m": (float, _M, "mass (kg)"),
        "hbar": (float, qc.HBAR, "reduced Planck constant (J s)"),
        "mode": (str, "printed", "integration mode: printed or paired"),
        "extent": (float, 4.0, "grid half width in units of x0"),
        "n": (int, 401, "grid points"),
        "members": (int, 41, "rows in the member table"),
    }),
    "spread": (cmd_spread, "Gaussian and plane-wave packet densities", {
        "b": (float, 1.0, "packet width b"),
        "k0": (float, 5.0, "central wave number"),
        "m": (float, 1.0, "mass"),
        "hbar": (float, 1.0, "reduced Planck constant"),
        "times": (str, "0,0.5,1,2", "times, comma separated"),
        "half_width": (float, 12.0, "half width of the x window around the packet centre"),
        "n": (int, 481, "x points"),
        "nk": (int, 2001, "k points"),
    }),
    "nlse": (cmd_nlse, "evolve an on-shell plane wave with the local equation", {
        "amplitude": (float, 1.0, "plane-wave amplitude"),
        "u": (float, 1.0, "velocity"),
        "phi": (float, 0.0, "intrinsic potential"),
        "beta": (float, 1.0, "local constant beta"),
        "wavelengths": (int, 2, "wavelengths in the periodic box"),
        "n": (int, 32, "grid points"),
        "dt": (float, 0.01, "time step"),
        "steps": (int, 100, "number of steps"),
    }),
    "gamma": (cmd_gamma, "interference factor Gamma over the phase difference", {
        "beta": (float, qc.BETA_EL, "local constant beta"),
        "n": (int, 721, "phase samples"),
        "pole_gap": (float, 1e-3, "drop samples whose denominator is below this"),
    }),
    "diffract": (cmd_diffract, "Kirchhoff intensity on the screen", {
        "wavelength": (float, 5e-7, "wavelength (m)"),
        "width": (float, 2e-6, "slit width (m)"),
        "separation": (float, 4e-5, "slit separation (m)"),
        "distance": (float, 1.0, "screen distance D (m)"),
        "slits": (int, 2, "1 or 2"),
        "screen": (float, 0.05, "screen half width (m)"),
        "n": (int, 2001, "screen points"),
    }),
    "sample": (cmd_sample, "sample detection events from the intensity", {
        "wavelength": (float, 5e-7, "wavelength (m)"),
        "width": (float, 2e-6, "slit width (m)"),
        "separation": (float, 4e-5, "slit separation (m)"),
        "distance": (float, 1.0, "screen distance D (m)"),
        "slits": (int, 2, "1 or 2"),
        "screen": (float, 0.05, "screen half width (m)"),
        "n": (int, 501, "screen points"),
        "count": (int, 10000, "number of events"),
    }),
    "magnetic": (cmd_magnetic, "magnetic phase shift and theta sweep", {
        "l": (float, 1e-2, "path length in the field (m)"),
        "lam": (float, 1e-8, "wavelength (m)"),
        "b_max": (float, 2.5e-3, "largest B_ext (T)"),
        "rho_bar": (float, 1.0, "beam density"),
        "u0": (float, 1e3, "propagation speed (m/s)"),
        "b0": (float, 1e-3, "intrinsic field amplitude B0 (T)"),
        "n": (int, 101, "B_ext samples"),
    }),
    "eraser": (cmd_eraser, "recombined intensity for the three eraser stages", {
        "base": (float, 1.0, "base intensity"),
        "n": (int, 361, "phase samples"),
    }),
    "zeno": (cmd_zeno, "survival under n repeated checks", {
        "dh2": (float, 0.01, "energy variance dH^2 (hbar = 1)"),
        "t": (float, 1.0, "total time"),
        "n": (int, 10, "number of checks"),
    }),
    "chain": (cmd_chain, "transmission through a rotator/polarizer chain", {
        "n": (int, 200, "number of rotators"),
        "element_transmission": (float, 1.0, "transmission of each element"),
    }),
    "ifm": (cmd_ifm, "interaction-free measurement figure of merit", {
        "r": (float, 0.5, "beam-splitter reflectivity R"),
        "n": (int, 101, "R samples in the sweep"),
    }),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help=f"output directory (default ${ENV_OUT} or ./{DEFAULT_OUT})")
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--svg", action="store_const", const=True, default=None, help="also write SVG plots")
    p.add_argument("--config", default=None, help="flat key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qensemble", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, (_, help_, params) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        for key, (_typ, default, phelp) in params.items():
            # typing happens in _coerce so that file and flag values share one path
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            help=f"{phelp} (default {default})")
    return parser


def _coerce(key, value, typ):
    if typ is str:
        return str(value)
    if isinstance(value, bool):
        raise ParameterError(f"parameter {key!r} expects {typ.__name__}, got a boolean")
    try:
        if typ is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value) if not isinstance(value, str) else int(value, 10)
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"parameter {key!r} expects {typ.__name__}, got {value!r}") from exc


def _as_bool(key, value) -> bool:
    if isinstance(value, bool):
        return value
    raise ParameterError(f"parameter {key!r} expects a boolean, got {value!r}")


def make_config(argv=None) -> RunConfig:
    """Merge defaults, the optional config file and command-line flags."""
    ns = build_parser().parse_args(argv)
    name = ns.subcommand
    params = SUBCOMMANDS[name][2]
    file_vals = load_config(ns.config) if ns.config else {}

    if "subcommand" in file_vals and file_vals["subcommand"] != name:
        raise ConfigError(f"config is for {file_vals['subcommand']!r}, not {name!r}")
    for key in file_vals:
        if key not in params and key not in GLOBAL_KEYS:
            warnings.warn(f"unknown config key {key!r} ignored", UnknownKeyWarning, stacklevel=2)

    values = {}
    for key, (typ, default, _h) in params.items():
        flag = getattr(ns, key)
        raw = flag if flag is not None else file_vals.get(key, default)
        values[key] = _coerce(key, raw, typ)

    out = ns.out or file_vals.get("out") or os.environ.get(ENV_OUT) or DEFAULT_OUT
    seed = _coerce("seed", ns.seed if ns.seed is not None else file_vals.get("seed", 0), int)
    svg = _as_bool("svg", ns.svg if ns.svg is not None else file_vals.get("svg", False))
    return RunConfig(name, values, Path(str(out)), seed, svg)


def _prepare_output(path: Path):
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".qensemble-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {str(path)!r} is not writable: {exc.strerror}") from exc


def run(cfg: RunConfig) -> tuple[str, list[Path]]:
    """Execute ``cfg``; return the summary line and the files written."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise UsageError(f"unknown subcommand {cfg.subcommand!r}")
    _prepare_output(cfg.output_dir)
    handler = SUBCOMMANDS[cfg.subcommand][0]
    out = Output(cfg)
    try:
        summary = handler(cfg.parameters, cfg, out)
    except CliError:
        raise
    except ValueError as exc:  # DomainError and friends
        raise CliError(f"{type(exc).__name__}: {exc}") from exc
    except ArithmeticError as exc:
        raise CliError(f"{type(exc).__name__}: {exc}") from exc
    except OSError as exc:
        raise OutputError(f"writing output failed: {exc}") from exc
    return f"{cfg.subcommand}: {summary}", out.files


def _fail(err: CliError) -> int:
    code = EXIT_CODES[err.kind]
    record = {"error": err.kind, "exit": code, "message": err.message}
    if isinstance(err, ConfigError) and err.line is not None:
        record["line"] = err.line
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = make_config(argv)
        summary, _ = run(cfg)
    except CliError as err:
        return _fail(err)
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
