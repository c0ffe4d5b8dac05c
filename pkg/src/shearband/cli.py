"""Command-line entry point.

Exit status: 0 on success, 2 for invalid input, 3 for numerical failure. On
failure a single line ``error kind=<Class> exit=<code> message="..."`` is
written to standard error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import emit
from .effective import linear_symbol, operator_symbol
from .errors import ShearBandError, ValidationError
from .heteroclinic import ORBIT_CONFIG, build_translated_orbit
from .linstab import eigenvalues_array, turing_bound
from .model import params_from_mapping
from .pqr import equilibria

log = logging.getLogger("shearband")

FIGURE_DEFAULTS = {3: {"n": 0.3, "lambda": 2.0}, 4: {"n": 0.05, "lambda": 10.0}}
FIG4_TIMES = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f'error kind=UsageError exit=2 message="{message}"\n')
        raise SystemExit(2)


def _times(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty time list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--rtol", type=float, help="integrator relative tolerance")
    common.add_argument("--atol", type=float, help="integrator absolute tolerance")
    common.add_argument("--hmax", type=float, help="largest integrator step")
    common.add_argument("--max-steps", type=int, help="integrator step budget")
    common.add_argument("--config", help="flat key = value parameter file")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--n", type=float)
    model.add_argument("--lambda", dest="lam", type=float)
    model.add_argument("--gamma-bar0", type=float)
    model.add_argument("--u-bar0", type=float)
    model.add_argument("--gamma0", type=float)

    orbit_opts = argparse.ArgumentParser(add_help=False)
    orbit_opts.add_argument("--seed-delta", type=float, default=1e-6)
    orbit_opts.add_argument("--method", choices=("auto", "backward", "forward"), default="auto")

    p = _Parser(prog="shearband", description="Shear-band localization laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="closed-form mode spectrum")
    s.add_argument("--n", type=float)
    s.add_argument("--jmax", type=int, default=50)

    s = sub.add_parser("effective", parents=[common], help="effective-equation dispersion")
    s.add_argument("--n", type=float)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--ximax", type=float, required=True)
    s.add_argument("--num", type=int, default=201)
    s.add_argument("--symbol", choices=("published", "operator"), default="published")

    sub.add_parser("equilibria", parents=[common, model], help="equilibria and eigenpairs")
    sub.add_parser("orbit", parents=[common, model, orbit_opts], help="heteroclinic orbit")

    s = sub.add_parser("profiles", parents=[common, model, orbit_opts], help="self-similar profiles")
    s.add_argument("--num", type=int, default=400)

    s = sub.add_parser("fields", parents=[common, model, orbit_opts], help="physical fields at given times")
    s.add_argument("--times", type=_times, required=True)
    s.add_argument("--half-width", type=float, default=1.0)
    s.add_argument("--num", type=int, default=401)
    s.add_argument("--svg", action="store_true", help="also write line plots")

    s = sub.add_parser("pde-linrate", parents=[common], help="measured linear growth rate")
    s.add_argument("--n", type=float)
    s.add_argument("--j", type=int, default=1)
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--tau-end", type=float, default=0.25)

    s = sub.add_parser("pde-residual", parents=[common, model, orbit_opts], help="PDE residual of the solution")
    s.add_argument("--times", type=_times, default=[0.1, 0.2])
    s.add_argument("--cells", type=int, default=1000)
    s.add_argument("--half-width", type=float, help="x window half width (default: from the profile)")
    s.add_argument("--dt-rel", type=float, default=1e-4)

    s = sub.add_parser("reproduce-figures", parents=[common, model, orbit_opts], help="figure data")
    s.add_argument("--figure", type=int, choices=(3, 4), required=True)
    s.add_argument("--times", type=_times, default=list(FIG4_TIMES))
    s.add_argument("--half-width", type=float, default=1.0)
    s.add_argument("--num", type=int, default=401)
    return p


# -- configuration -----------------------------------------------------------------


def _resolved(args, defaults=None) -> dict:
    """Model inputs with precedence CLI flag > config file > defaults."""
    merged = dict(defaults or {})
    if getattr(args, "config", None):
        merged.update(emit.read_config(args.config))
    flags = {
        "n": getattr(args, "n", None),
        "lambda": getattr(args, "lam", None),
        "gamma_bar0": getattr(args, "gamma_bar0", None),
        "u_bar0": getattr(args, "u_bar0", None),
        "gamma0": getattr(args, "gamma0", None),
    }
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def _params(args, defaults=None):
    return params_from_mapping(_resolved(args, defaults))


def _integrator(args):
    changes = {}
    if args.rtol is not None:
        changes["rel_tol"] = args.rtol
    if args.atol is not None:
        changes["abs_tol"] = args.atol
    if args.hmax is not None:
        changes["h_max"] = args.hmax
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    return ORBIT_CONFIG.replace(**changes) if changes else ORBIT_CONFIG


def _require_n(args) -> float:
    merged = _resolved(args)
    if merged.get("n") is None:
        raise ValidationError("missing rate sensitivity: pass --n or set n in --config")
    return float(merged["n"])


def _run_config(args, params=None, extra=None) -> dict:
    cfg = _integrator(args)
    out = {
        "command": args.command,
        "integrator": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "h_max": cfg.h_max,
                       "max_steps": cfg.max_steps},
        "config_file": args.config,
        "out": str(args.out),
        "random_free": True,
    }
    if params is not None:
        out["params"] = params.as_dict()
    for k in ("seed_delta", "method"):
        if hasattr(args, k):
            out[k] = getattr(args, k)
    out.update(extra or {})
    return out


# -- commands ------------------------------------------------------------------------


def cmd_spectrum(args, out: Path):
    n = _require_n(args)
    if args.jmax < 1:
        raise ValidationError("jmax must be >= 1")
    j = np.arange(1, args.jmax + 1)
    lp, lm = eigenvalues_array(j, n)
    if n == 0:
        bound = math.inf
    elif 0 < n < 1:
        bound = turing_bound(n)
    else:
        bound = math.nan
    rows = [(0, 0.0, -1.0, bound)] + [(int(a), float(b), float(c), bound) for a, b, c in zip(j, lp, lm)]
    path = emit.write_csv(out / "spectrum.csv", ("j", "lambda_plus", "lambda_minus", "bound"), rows)
    return [path], {"n": n, "jmax": args.jmax}


def cmd_effective(args, out: Path):
    n = _require_n(args)
    if args.eps <= 0 or args.ximax <= 0 or args.num < 2:
        raise ValidationError("need eps > 0, ximax > 0 and num >= 2")
    xi = np.linspace(0.0, args.ximax, args.num)
    fn = linear_symbol if args.symbol == "published" else operator_symbol
    path = emit.write_csv(out / "effective.csv", ("xi", "symbol"), zip(xi, fn(xi, n, args.eps)))
    return [path], {"n": n, "eps": args.eps, "ximax": args.ximax, "symbol": args.symbol}


def cmd_equilibria(args, out: Path):
    params = _params(args)
    eqs = equilibria(params.n, params.lam)
    payload = {
        "n": params.n,
        "lambda": params.lam,
        "equilibria": {
            e.label: {
                "point": e.point,
                "eigenvalues": e.eigenvalues,
                "eigenvectors": e.vectors,
                "classification": e.kind,
            }
            for e in eqs
        },
    }
    return [emit.write_json(out / "equilibria.json", payload)], {"params": params.as_dict()}


def _orbit(args, params):
    return build_translated_orbit(params, method=args.method, delta_seed=args.seed_delta, cfg=_integrator(args))


def _orbit_summary(orbit, params) -> dict:
    d = orbit.diagnostics
    keys = ("method", "exponent_m0", "exponent_m1", "exponent_m1_distance", "endpoint_residual_m0",
            "endpoint_residual_m1", "p_min_interior", "r_min", "q_end", "r_end", "r_start")
    summary = {k: d.get(k) for k in keys}
    summary.update(
        kappa2=d.get("kappa2_raw"),
        kappa=params.kappa,
        eta0=orbit.eta0,
        eta_min=orbit.eta_min,
        eta_max=orbit.eta_max,
        samples=int(orbit.eta.size),
        n=params.n,
        **{"lambda": params.lam},
        gamma_bar0=params.gamma_bar0,
    )
    return summary


def _write_orbit(out: Path, stem: str, orbit, params):
    rows = np.column_stack((orbit.eta, orbit.points))
    csv_path = emit.write_csv(out / f"{stem}.csv", ("eta", "p", "q", "r"), rows)
    json_path = emit.write_json(out / f"{stem}.json", _orbit_summary(orbit, params))
    return [csv_path, json_path]


def cmd_orbit(args, out: Path):
    params = _params(args)
    orbit = _orbit(args, params)
    return _write_orbit(out, "orbit", orbit, params), {"params": params.as_dict()}


def _profile(args, params):
    from .reconstruct import profile_from_orbit

    return profile_from_orbit(_orbit(args, params), params)


def cmd_profiles(args, out: Path):
    params = _params(args)
    prof = _profile(args, params)
    xi = np.geomspace(prof.xi_min, prof.xi_max, max(args.num, 2))
    vals = prof.evaluate(xi)
    path = emit.write_csv(out / "profiles.csv", ("xi", "v_bar", "gamma_bar", "sigma_bar", "u_bar"),
                          np.column_stack((xi, *vals)))
    return [path], {"params": params.as_dict()}


def _frames(prof, times, half_width, num):
    from .reconstruct import fields_at

    x = np.linspace(-half_width, half_width, num)
    return [fields_at(prof, x, t) for t in times]


def _write_frames(out: Path, frames, svg: bool, stem: str = "fields"):
    paths = []
    for fr in frames:
        paths.append(
            emit.write_csv(out / f"{stem}_t{fr.t:g}.csv", ("x", "v", "gamma", "sigma", "u"), fr.as_array())
        )
    if svg:
        for name, logy in (("gamma", True), ("u", True), ("sigma", True), ("v", False)):
            series = [(f"t={fr.t:g}", fr.x, getattr(fr, name)) for fr in frames]
            doc = emit.svg_line_plot(series, title=f"{name}(x, t)", xlabel="x", ylabel=name, logy=logy)
            paths.append(emit.write_svg(out / f"{stem}_{name}.svg", doc))
    return paths


def cmd_fields(args, out: Path):
    params = _params(args)
    if any(t < 0 for t in args.times):
        raise ValidationError("times must be non-negative")
    prof = _profile(args, params)
    frames = _frames(prof, args.times, args.half_width, args.num)
    return _write_frames(out, frames, args.svg), {"params": params.as_dict(), "times": args.times}


def cmd_pde_linrate(args, out: Path):
    from .pdecheck import run_linearized

    n = _require_n(args)
    res = run_linearized(args.j, n, tau_end=args.tau_end, N=args.N)
    payload = res.as_dict()
    return [emit.write_json(out / "pde_linrate.json", payload)], {"n": n, "j": args.j, "N": args.N}


def cmd_pde_residual(args, out: Path):
    from .pdecheck import default_window, selfsimilar_residual

    params = _params(args)
    if any(t <= 0 for t in args.times):
        raise ValidationError("residual times must be positive")
    prof = _profile(args, params)
    window = (-args.half_width, args.half_width) if args.half_width else default_window(prof, args.times)
    rows = selfsimilar_residual(prof, args.times, window, cells=args.cells, dt_rel=args.dt_rel)
    path = emit.write_csv(
        out / "pde_residual.csv",
        ("t", "res_mom_Linf", "res_mom_L2", "res_kin_Linf", "res_kin_L2"),
        (r.as_tuple() for r in rows),
    )
    return [path], {"params": params.as_dict(), "window": list(window), "cells": args.cells}


def cmd_reproduce(args, out: Path):
    defaults = dict(FIGURE_DEFAULTS[args.figure])
    params = _params(args, defaults)
    if args.figure == 3:
        orbit = _orbit(args, params)
        paths = _write_orbit(out, "figure3_orbit", orbit, params)
        e = orbit.eta
        series = [(name, e, orbit.points[:, k]) for k, name in enumerate("pqr")]
        doc = emit.svg_line_plot(series, title=f"heteroclinic orbit n={params.n:g} lambda={params.lam:g}",
                                 xlabel="eta", ylabel="p, q, r")
        paths.append(emit.write_svg(out / "figure3_orbit.svg", doc))
        return paths, {"params": params.as_dict(), "figure": 3}

    from .reconstruct import fit_growth_exponent, time_exponents

    prof = _profile(args, params)
    frames = _frames(prof, args.times, args.half_width, args.num)
    paths = _write_frames(out, frames, svg=True, stem="figure4")
    mid = args.num // 2
    times = [fr.t for fr in frames]
    expected = time_exponents(params)
    fitted = {}
    if len(times) >= 2:
        for name in ("gamma", "u", "sigma"):
            fitted[name] = fit_growth_exponent(times, [getattr(fr, name)[mid] for fr in frames], params.gamma0)
    summary = {
        "figure": 4,
        "times": times,
        "x_center": float(frames[0].x[mid]),
        "fitted_exponents": fitted,
        "expected_exponents": {k: expected[k] for k in ("gamma", "u", "sigma")},
        "peak_at_center": {
            name: all(int(np.argmax(getattr(fr, name))) == mid for fr in frames) for name in ("gamma", "u")
        },
        "stress_min_at_center": all(int(np.argmin(fr.sigma)) == mid for fr in frames[1:]),
        "params": params.as_dict(),
    }
    paths.append(emit.write_json(out / "figure4_summary.json", summary))
    return paths, {"params": params.as_dict(), "figure": 4, "times": times}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "effective": cmd_effective,
    "equilibria": cmd_equilibria,
    "orbit": cmd_orbit,
    "profiles": cmd_profiles,
    "fields": cmd_fields,
    "pde-linrate": cmd_pde_linrate,
    "pde-residual": cmd_pde_residual,
    "reproduce-figures": cmd_reproduce,
}


def _fail(exc: BaseException, code: int) -> int:
    msg = str(exc).replace("\n", " ").replace('"', "'")
    sys.stderr.write(f'error kind={type(exc).__name__} exit={code} message="{msg}"\n')
    return code


def run(argv=None) -> int:
    """Execute one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        out = emit.ensure_dir(args.out)
        paths, extra = COMMANDS[args.command](args, out)
        cfg = _run_config(args, extra=extra)
        paths.append(emit.write_manifest(out, args.command, cfg, paths))
    except ShearBandError as exc:
        return _fail(exc, exc.exit_code)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        return _fail(exc, 2)
    for pth in paths:
        log.info("wrote %s", pth)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
