"""Command-line entry point ``qhdlab``.

Subcommands: classify, symbol, check, linear-decay, simulate, accept.
Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 accuracy failure,
5 solver abort.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linear, solver, symbol
from .errors import AccuracyError, DomainError, QHDError, SolverAbort, UnsupportedRegimeError
from .kernels import BACKEND
from .model import ModelParams, classify_equilibrium

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_ACCURACY = 4
EXIT_ABORT = 5


class InvalidInput(QHDError):
    """Bad flags or configuration content."""


def format_float(v) -> str:
    return "%.17g" % v


def csv_text(columns: dict) -> str:
    names = list(columns)
    cols = [np.asarray(columns[n]).ravel() for n in names]
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: dict):
    solver.atomic_write_text(path, csv_text(columns))


# Configuration

# section -> key -> (type, default); a None default is filled in later (dt from the CFL bound, center = L/2)
CONFIG_SCHEMA = {
    "equilibrium": {"gamma": (float, 2.0), "rho_star": (float, 1.0), "m_star": (float, 1.0),
                    "mu": (float, 1.0), "k": (float, 1.0)},
    "grid": {"L": (float, 400.0), "N": (int, 4096)},
    "time": {"dt": (float, None), "t_end": (float, 50.0), "output_stride": (int, 10)},
    "diagnostics": {"s": (float, 3.0), "fit_window": (str, "100,1000")},
    "initial": {"rho_amp": (float, 1e-3), "rho_width": (float, 10.0), "m_amp": (float, 0.0),
                "m_width": (float, 10.0), "center": (float, None)},
    "run": {"seed": (int, 20240607), "dealias": (str, "on")},
}


@dataclass
class RunConfig:
    values: dict

    def get(self, section, key):
        return self.values[section][key]


def _key_line(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip().lower() == key.lower():
            return i
    return None


def load_run_config(path: Optional[str], overrides: dict) -> RunConfig:
    """Parse an INI file (optional) and apply flag overrides.

    Unknown sections or keys and unparsable values are rejected with the
    file name, line and ``section.key`` in the message.
    """
    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in CONFIG_SCHEMA.items()}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise InvalidInput(f"{path}: {exc}") from None
        for sec in cp.sections():
            if sec not in CONFIG_SCHEMA:
                raise InvalidInput(f"{path}: unknown section [{sec}]")
            lower = {k.lower(): k for k in CONFIG_SCHEMA[sec]}
            for raw_key, raw in cp.items(sec):
                key = lower.get(raw_key.lower())
                line = _key_line(text, sec, raw_key)
                where = f"{path}:{line}" if line else path
                if key is None:
                    raise InvalidInput(f"{where}: unknown key {sec}.{raw_key}")
                typ = CONFIG_SCHEMA[sec][key][0]
                try:
                    values[sec][key] = typ(raw.strip())
                except ValueError:
                    raise InvalidInput(
                        f"{where}: {sec}.{key} = {raw.strip()!r} is not a valid {typ.__name__}"
                    ) from None
    for (sec, key), v in overrides.items():
        if v is not None:
            values[sec][key] = v
    return RunConfig(values)


def parse_window(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise InvalidInput(f"fit window must be 'lo,hi', got {text!r}") from None
    if not 0 <= lo < hi:
        raise InvalidInput(f"fit window needs 0 <= lo < hi, got {text!r}")
    return lo, hi


# Shared flag groups

def add_state_flags(p, defaults=True):
    g = p.add_argument_group("equilibrium")
    d = (lambda v: v) if defaults else (lambda v: None)
    g.add_argument("--gamma", type=float, default=d(2.0))
    g.add_argument("--rho-star", type=float, default=d(1.0))
    g.add_argument("--m-star", type=float, default=d(1.0))
    g.add_argument("--mu", type=float, default=d(1.0))
    g.add_argument("--k", type=float, default=d(1.0))


def state_from_args(args):
    params = ModelParams(args.gamma, args.mu, args.k)
    return classify_equilibrium(params, args.rho_star, args.m_star)


# Commands

def cmd_classify(args):
    eq = state_from_args(args)
    print(f"{eq.regime.value}, alpha*={eq.alpha_star:.17g}")
    print(f"regime: {eq.regime.value}")
    print(f"alpha_star: {eq.alpha_star:.17g}")
    print(f"beta_star: {eq.beta_star:.17g}")
    print(f"p_prime_star: {eq.p_prime_star:.17g}")
    if eq.is_subsonic:
        eps, theta = symbol.compensating_constants(eq)
        print(f"epsilon_star: {eps:.17g}")
        print(f"theta: {theta:.17g}")
    return EXIT_OK


def symbol_grid(args):
    if args.points < 1:
        raise InvalidInput("--points must be at least 1")
    if args.points == 1:
        if args.xi_min != args.xi_max:
            raise InvalidInput("a one-point grid needs --xi-min equal to --xi-max")
        return np.array([args.xi_min])
    if not args.xi_min < args.xi_max:
        raise InvalidInput("--xi-min must be below --xi-max")
    if args.spacing == "linear":
        return np.linspace(args.xi_min, args.xi_max, args.points)
    if args.xi_min <= 0:
        raise InvalidInput("log spacing needs 0 < xi-min; use --symmetric for both signs")
    pos = np.geomspace(args.xi_min, args.xi_max, args.points)
    return np.concatenate([-pos[::-1], pos]) if args.symmetric else pos


def cmd_symbol(args):
    eq = state_from_args(args)
    xi = symbol_grid(args)
    table = symbol.symbol_table(eq, xi)
    write_csv(args.output, table)
    positive = int(np.count_nonzero(np.maximum(table["re_lambda_plus"], table["re_lambda_minus"]) > 0))
    print(f"{eq.regime.value}: wrote {xi.size} rows to {args.output}; rows with Re lambda > 0: {positive}")
    return EXIT_OK


def cmd_check(args):
    eq = state_from_args(args)
    what = args.what
    if what in ("dissipativity", "all"):
        rep = symbol.dissipativity_scan(eq)
        print(f"dissipativity: {rep.verdict.value}")
        if rep.omega0_estimate is not None:
            print(f"  omega0_estimate: {rep.omega0_estimate:.17g}")
        if rep.unstable_window is not None:
            lo, hi = rep.unstable_window
            print(f"  unstable_window: [{lo:.17g}, {hi:.17g}]")
    if what in ("coupling", "all") and not eq.is_subsonic:
        edge = 2.0 * eq.beta_star / eq.k ** 2
        print(f"genuine coupling: no (alpha(xi) <= 0 for xi^2 <= {edge:.17g})")
    elif what in ("coupling", "all"):
        xi = symbol.default_scan_grid(200)
        ok = all(symbol.genuine_coupling_check(eq, x) for x in xi)
        print(f"genuine coupling on {xi.size} wavenumbers: {'yes' if ok else 'no'}")
    if what in ("compensator", "all"):
        if not eq.is_subsonic:
            print("compensator: not defined for non-subsonic states")
        else:
            eps, theta = symbol.compensating_constants(eq)
            xi = np.concatenate([[0.0], symbol.default_scan_grid()])
            lam = symbol.quadratic_form_min_eig(eq, xi, check=False)
            print(f"compensator: epsilon_star={eps:.17g}, theta={theta:.17g}")
            print(f"  min eigenvalue over grid: {float(lam.min()):.17g} "
                  f"({'>=' if lam.min() >= theta - symbol.MIN_EIG_TOL else '<'} theta)")
    if what in ("pointwise", "all") and eq.is_subsonic:
        rep = linear.pointwise_bound_check(eq, trials=args.trials, seed=args.seed)
        print("pointwise bound report:")
        print(rep.as_text())
        if rep.violations:
            print(f"  worst draw: {rep.worst}")
            return EXIT_ACCURACY
    return EXIT_OK


def cmd_linear_decay(args):
    eq = state_from_args(args)
    if not eq.is_subsonic:
        raise UnsupportedRegimeError("linear decay needs a subsonic state")
    for ell in args.ell:
        if ell not in (0, 1, 2):
            raise InvalidInput(f"--ell must be 0, 1 or 2, got {ell}")
    if args.points < 2:
        raise InvalidInput("fit refused: the time grid needs at least 2 points")
    if not 0 < args.t_min < args.t_max:
        raise InvalidInput("need 0 < t-min < t-max")
    window = parse_window(args.window)
    prof = linear.FourierProfile(args.profile, args.width, args.rho_amp, args.m_amp)
    times = np.geomspace(args.t_min, args.t_max, args.points)
    curves = linear.decay_curve(eq, prof, times, ells=tuple(args.ell))
    f0 = prof.hat_at_zero()
    print(f"profile {args.profile} width {args.width:g}: f_hat(0) = ({f0[0]:.17g}, {f0[1]:.17g})")
    cols = {"t": times}
    fits = {}
    for ell in args.ell:
        try:
            fits[ell] = linear.decay_rate_fit(times, curves[ell], window=window, ell=ell)
        except DomainError as exc:
            raise InvalidInput(f"fit refused: {exc}") from None
    for ell in args.ell:
        cols[f"norm_ell{ell}"] = curves[ell]
    for ell in args.ell:
        cols[f"fit_ell{ell}"] = fits[ell].model(times)
        print(f"ell={ell}: exponent {fits[ell].exponent:.6f} (expected {ell / 2 + 0.25:g}), "
              f"prefactor {fits[ell].prefactor:.6g}, max relative residual {fits[ell].residual:.3e}")
    write_csv(args.output, cols)
    return EXIT_OK


SIM_FLAG_MAP = {
    "gamma": ("equilibrium", "gamma"), "rho_star": ("equilibrium", "rho_star"),
    "m_star": ("equilibrium", "m_star"), "mu": ("equilibrium", "mu"), "k": ("equilibrium", "k"),
    "L": ("grid", "L"), "N": ("grid", "N"),
    "dt": ("time", "dt"), "t_end": ("time", "t_end"), "output_stride": ("time", "output_stride"),
    "s": ("diagnostics", "s"), "fit_window": ("diagnostics", "fit_window"),
    "rho_amp": ("initial", "rho_amp"), "rho_width": ("initial", "rho_width"),
    "m_amp": ("initial", "m_amp"), "m_width": ("initial", "m_width"),
    "center": ("initial", "center"), "seed": ("run", "seed"), "dealias": ("run", "dealias"),
}


def cmd_simulate(args):
    overrides = {SIM_FLAG_MAP[name]: getattr(args, name) for name in SIM_FLAG_MAP}
    cfg = load_run_config(args.config, overrides)
    v = cfg.values
    e = v["equilibrium"]
    eq = classify_equilibrium(ModelParams(e["gamma"], e["mu"], e["k"]), e["rho_star"], e["m_star"])
    if not eq.is_subsonic and not args.allow_supersonic:
        raise InvalidInput(
            f"the state is {eq.regime.value} (alpha*={eq.alpha_star:g}); its linearization has "
            "growing modes, so simulations are refused unless --allow-supersonic is given"
        )
    dealias = str(v["run"]["dealias"]).lower()
    if dealias not in ("on", "off", "true", "false", "1", "0"):
        raise InvalidInput(f"run.dealias must be on or off, got {dealias!r}")
    window = parse_window(v["diagnostics"]["fit_window"])
    grid = solver.Grid1D(v["grid"]["N"], v["grid"]["L"])
    ini = v["initial"]
    init = solver.gaussian_state(grid, ini["rho_amp"], ini["rho_width"], ini["m_amp"],
                                 ini["m_width"], ini["center"])
    t_end = v["time"]["t_end"]
    dt = v["time"]["dt"]
    if dt is None:
        dt = solver.max_stable_dt(eq, init)
        if t_end > 0:
            dt = t_end / math.ceil(t_end / dt)
    sconf = solver.SolverConfig(dt=dt, t_end=t_end, dealias=dealias in ("on", "true", "1"),
                                s=v["diagnostics"]["s"], output_stride=v["time"]["output_stride"])
    hist = solver.run_simulation(eq, init, sconf, allow_supersonic=args.allow_supersonic)
    write_csv(args.output, hist.columns())
    if hist.final_state is not None:
        solver.write_snapshot(args.snapshot, eq, hist.final_state, sconf.s)
    if hist.aborted:
        t_abort = hist.final_state.t if hist.final_state is not None else float("nan")
        print(f"solver aborted at t={t_abort:.6g}: {hist.abort_reason}", file=sys.stderr)
        return EXIT_ABORT
    mass = float(np.max(np.abs(hist.mass_defect)))
    mom = float(np.max(np.abs(hist.momentum_defect)))
    print(f"steps of dt={dt:.6g} to t={t_end:g}; sup G_s = {hist.G_s[-1]:.17g}")
    print(f"max |mass defect| = {mass:.3e}, max |momentum defect| = {mom:.3e}")
    try:
        fit = linear.decay_rate_fit(hist.times, hist.envelope, window=window)
    except DomainError as exc:
        print(f"envelope fit skipped: {exc}")
    else:
        print(f"envelope decay exponent over [{window[0]:g}, {window[1]:g}]: {fit.exponent:.6f}")
    return EXIT_OK


def cmd_accept(args):
    from .acceptance import run_acceptance

    print(f"kernel backend: {BACKEND}")
    results = run_acceptance(args.filter, report=lambda r: print(r.row(), flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="qhdlab", description="Decay-structure lab for 1D viscous quantum hydrodynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="regime and derived constants of an equilibrium")
    add_state_flags(c)
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("symbol", help="dispersion roots and quadratic-form CSV over a wavenumber grid")
    add_state_flags(s)
    s.add_argument("--xi-min", type=float, default=1e-3)
    s.add_argument("--xi-max", type=float, default=50.0)
    s.add_argument("--points", type=int, default=2000)
    s.add_argument("--spacing", choices=("log", "linear"), default="log")
    s.add_argument("--symmetric", action="store_true", help="mirror a log grid to negative xi")
    s.add_argument("--output", "-o", default="symbol.csv")
    s.set_defaults(func=cmd_symbol)

    k = sub.add_parser("check", help="dissipativity, coupling, compensator and pointwise checks")
    add_state_flags(k)
    k.add_argument("--what", choices=("dissipativity", "coupling", "compensator", "pointwise", "all"),
                   default="all")
    k.add_argument("--trials", type=int, default=1000)
    k.add_argument("--seed", type=int, default=20240607)
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("linear-decay", help="semigroup norms on the line and fitted decay rates")
    add_state_flags(d)
    d.add_argument("--profile", choices=linear.FourierProfile.SHAPES, default="gaussian")
    d.add_argument("--width", type=float, default=1.0)
    d.add_argument("--rho-amp", type=float, default=1.0)
    d.add_argument("--m-amp", type=float, default=0.0)
    d.add_argument("--ell", type=int, nargs="+", default=[0, 1])
    d.add_argument("--t-min", type=float, default=1.0)
    d.add_argument("--t-max", type=float, default=1000.0)
    d.add_argument("--points", type=int, default=40)
    d.add_argument("--window", default="100,1000")
    d.add_argument("--output", "-o", default="decay.csv")
    d.set_defaults(func=cmd_linear_decay)

    m = sub.add_parser("simulate", help="nonlinear periodic run with energy bookkeeping")
    m.add_argument("--config", help="INI file; flags override its values")
    add_state_flags(m, defaults=False)
    m.add_argument("--L", type=float)
    m.add_argument("--N", type=int)
    m.add_argument("--dt", type=float)
    m.add_argument("--t-end", type=float)
    m.add_argument("--output-stride", type=int)
    m.add_argument("--s", type=float)
    m.add_argument("--fit-window")
    m.add_argument("--rho-amp", type=float)
    m.add_argument("--rho-width", type=float)
    m.add_argument("--m-amp", type=float)
    m.add_argument("--m-width", type=float)
    m.add_argument("--center", type=float)
    m.add_argument("--seed", type=int)
    m.add_argument("--dealias", choices=("on", "off"))
    m.add_argument("--allow-supersonic", action="store_true")
    m.add_argument("--output", "-o", default="history.csv")
    m.add_argument("--snapshot", default="final_snapshot.txt")
    m.set_defaults(func=cmd_simulate)

    a = sub.add_parser("accept", help="run the acceptance suite")
    a.add_argument("--filter", choices=("symbol", "linear", "solver", "oracle"))
    a.set_defaults(func=cmd_accept)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InvalidInput, DomainError, UnsupportedRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except SolverAbort as exc:
        print(f"solver aborted at t={exc.t}: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
