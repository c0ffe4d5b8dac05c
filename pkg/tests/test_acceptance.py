"""Acceptance criteria, one test each, each printing a PASS/FAIL line.

Tolerances are pinned here; nothing is tuned at run time.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from shearband.cli import run as cli_run
from shearband.heteroclinic import build_translated_orbit, near_m0_exponent, near_m1_exponents
from shearband.linstab import characteristic, eigenvalues_array, hadamard_asymptotics
from shearband.model import lambda_upper_bound, validate
from shearband.pdecheck import REFINEMENT_LADDER, default_window, refinement_study, run_linearized, selfsimilar_residual
from shearband.pqr import closed_form_pairs, degenerate_lambda, eigen_oracle, equilibrium_point, jacobian, vector_field
from shearband.reconstruct import (
    origin_second_differences,
    profile_from_orbit,
    rescale_profile,
    tail_slopes,
    taylor_coefficients,
    time_exponents,
)

# pinned tolerances
EIG_RESIDUAL = 1e-9
HADAMARD_J10 = 1e-4
EQ_RESIDUAL = 1e-12
PAIR_RESIDUAL = 1e-9
ORACLE_TOL = 1e-10
ENDPOINT_TOL = 1e-5
EXPONENT_REL = 0.02
LIMIT_TOL = 1e-4
ORBIT_SECONDS = 30.0
TAYLOR_REL = 1e-2
RATIO_TOL = 1e-6
TAIL_REL = 0.02
RATE_REL = 1e-2
LINRATE_SECONDS = 60.0
RESIDUAL_LINF = 1e-3
ORDER_TARGET, ORDER_TOL = 2.0, 0.2
PROFILE_REL = 1e-4
SHIFT_TOL = 1e-3
FIG_EXPONENT_REL = 0.03


@pytest.fixture
def report(capsys):
    def emit(tag: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{tag}] {detail}")
        assert ok, detail

    return emit


def admissible_grid(k=10):
    out = []
    for n in np.linspace(0.05, 0.9, k):
        for f in np.linspace(0.05, 0.95, k):
            lam = float(f * lambda_upper_bound(n))
            if abs(lam - degenerate_lambda(n)) < 1e-3:
                lam *= 1.01
            out.append((float(n), lam))
    return out


def test_c1_eigenvalue_closed_forms(report):
    t0 = time.perf_counter()
    j = np.arange(1, 1001)
    worst, lemma = 0.0, True
    for n in (0.0, 0.05, 0.3, 0.5, 0.9):
        lp, lm = eigenvalues_array(j, n)
        for lam in (lp, lm):
            res = np.abs(characteristic(lam, j, n)) / np.maximum(1.0, lam * lam)
            worst = max(worst, float(res.max()))
        lemma &= bool(np.all(np.diff(lp) > 0))  # (i) monotone in j
        if n > 0:
            bound = (1 - n) / n
            gap = bound - lp
            lemma &= bool(np.all(lp < bound))  # (ii)
            lemma &= bool(gap[999] < gap[9])  # (iii)
    had = abs(eigenvalues_array(np.array([10]), 0.0)[0][0] - hadamard_asymptotics(10)[0])
    dt = time.perf_counter() - t0
    ok = worst < EIG_RESIDUAL and lemma and had < HADAMARD_J10 and dt < 1.0
    report("C1", ok, f"max scaled residual {worst:.2e}, lemma checks {lemma}, j=10 expansion err {had:.2e}, {dt:.3f}s")


def test_c2_equilibria_and_eigenpairs(report):
    t0 = time.perf_counter()
    eq_res = pair_res = oracle_err = 0.0
    grid = admissible_grid()
    for n, lam in grid:
        for label in ("M0", "M1", "M2", "M3"):
            x = equilibrium_point(label, n, lam)
            eq_res = max(eq_res, float(np.linalg.norm(vector_field(x, n, lam))))
            J = jacobian(x, n, lam)
            for mu, X in closed_form_pairs(label, n, lam):
                pair_res = max(pair_res, float(np.linalg.norm(J @ X - mu * X) / np.linalg.norm(X)))
        mus = [mu for mu, _ in eigen_oracle(jacobian(equilibrium_point("M0", n, lam), n, lam))]
        oracle_err = max(oracle_err, min(abs(m - 1) for m in mus), min(abs(m - 2) for m in mus))
    dt = time.perf_counter() - t0
    ok = eq_res < EQ_RESIDUAL and pair_res < PAIR_RESIDUAL and oracle_err <= ORACLE_TOL and dt < 1.0
    report("C2", ok, f"{len(grid)} grid points: equilibrium residual {eq_res:.1e}, "
           f"eigenpair residual {pair_res:.1e}, oracle mu01/mu02 err {oracle_err:.1e}, {dt:.3f}s")


def test_c3_heteroclinic_fig3(report):
    params = validate(0.3, lam=2.0)
    t0 = time.perf_counter()
    orbit = build_translated_orbit(params, cache=False)
    dt = time.perf_counter() - t0
    d = orbit.diagnostics
    e0 = near_m0_exponent(orbit)
    e1, _ = near_m1_exponents(orbit)
    q_err = abs(orbit.q[-1] - 0.85)
    r_err = abs(orbit.r[-1] - (1 - 0.3 * 2 / (1.7 * 0.7)))
    ok = (
        d["endpoint_residual_m0"] < ENDPOINT_TOL
        and d["endpoint_residual_m1"] < ENDPOINT_TOL
        and abs(e0 / 2 - 1) < EXPONENT_REL
        and abs(e1 / (-3 / 7) - 1) < EXPONENT_REL
        and q_err < LIMIT_TOL
        and r_err < LIMIT_TOL
        and dt < ORBIT_SECONDS
    )
    report("C3", ok, f"endpoints {d['endpoint_residual_m0']:.1e}/{d['endpoint_residual_m1']:.1e}, "
           f"M0 exponent {e0:.5f}, M1 exponent {e1:.5f} (-3/7={-3 / 7:.5f}), q err {q_err:.1e}, "
           f"r err {r_err:.1e}, {dt:.1f}s")


def test_c4_taylor_at_origin(report, fig3_profile, fig4_profile):
    parts, ok = [], True
    for prof in (fig3_profile, fig4_profile):
        p = prof.params
        g2, u2 = taylor_coefficients(p)
        dg, du = origin_second_differences(prof)
        closed_ratio_err = abs((u2 / g2) / (p.r0 + 2 * p.lam) - 1)
        fd_ratio_err = abs((du / dg) / (p.r0 + 2 * p.lam) - 1)
        eg, eu = abs(dg / g2 - 1), abs(du / u2 - 1)
        ok &= eg < TAYLOR_REL and eu < TAYLOR_REL and closed_ratio_err < RATIO_TOL
        parts.append(f"n={p.n:g}: FD rel err G {eg:.1e} U {eu:.1e}, closed-form ratio err "
                     f"{closed_ratio_err:.1e}, FD ratio err {fd_ratio_err:.1e}")
    report("C4", ok, "; ".join(parts))


def test_c5_tails(report, fig3_profile, fig4_profile):
    parts, ok = [], True
    for prof in (fig3_profile, fig4_profile):
        n = prof.params.n
        s = tail_slopes(prof)
        target = -1 / (1 - n)
        errs = (abs(s["gamma_bar"] / target - 1), abs(s["u_bar"] / target - 1), abs(s["sigma_bar"] - 1))
        ok &= max(errs) < TAIL_REL
        parts.append(f"n={n:g}: G {s['gamma_bar']:.5f} U {s['u_bar']:.5f} (target {target:.5f}), "
                     f"S {s['sigma_bar']:.5f}")
    report("C5", ok, "; ".join(parts))


def test_c6_linear_rates(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for j, n in ((1, 0.3), (3, 0.3), (1, 0.05)):
        res = run_linearized(j, n)
        ok &= res.rel_err < RATE_REL
        parts.append(f"(n={n},j={j}) {res.measured:.6f} vs {res.predicted:.6f} rel {res.rel_err:.1e}")
    decays = [run_linearized(j, 1.2, N=128).measured for j in (1, 2, 3)]
    ok &= all(r < 0 for r in decays)
    dt = time.perf_counter() - t0
    ok &= dt < LINRATE_SECONDS
    parts.append("n=1.2 rates " + ", ".join(f"{r:.4f}" for r in decays))
    report("C6", ok, "; ".join(parts) + f"; {dt:.1f}s")


def test_c7_selfsimilar_residual(report, fig4_profile):
    times = [0.05, 0.1]
    window = default_window(fig4_profile, times)
    rows = selfsimilar_residual(fig4_profile, times, window, cells=1000, dt_rel=1e-4)
    worst = max(max(r.res_mom_Linf, r.res_kin_Linf) for r in rows)
    study = refinement_study(fig4_profile, times, window)
    orders = [min(o["res_mom_Linf"], o["res_kin_Linf"]) for o in study["orders"]]
    ok = worst < RESIDUAL_LINF and all(abs(o - ORDER_TARGET) < ORDER_TOL for o in orders)
    report("C7", ok, f"L-inf residual {worst:.2e} at 1000 cells, dt=1e-4 t; orders under "
           f"{[c for c, _ in REFINEMENT_LADDER]} cells: {', '.join(f'{o:.3f}' for o in orders)}")


def _level_crossing(orbit, level):
    r = orbit.r
    k = int(np.nonzero((r[:-1] - level) * (r[1:] - level) <= 0)[0][0])
    return brentq(lambda e: orbit(e)[2] - level, orbit.eta[k], orbit.eta[k + 1], xtol=1e-14)


def test_c8_scaling_equivariance(report, fig3_profile, fig3_orbit):
    A = 2.0
    params_a = fig3_profile.params.rescaled(A)
    # independent construction: different seed distance
    orbit_a = build_translated_orbit(params_a, delta_seed=5e-7)
    prof_a = profile_from_orbit(orbit_a, params_a)
    scaled = rescale_profile(fig3_profile, A)
    lo = max(fig3_profile.xi_min / A, prof_a.xi_min)
    hi = min(fig3_profile.xi_max / A, prof_a.xi_max)
    xi = np.geomspace(lo, hi, 600)
    got, ref = np.array(scaled(xi)), np.array(prof_a.evaluate(xi))
    mask = np.abs(ref) > 0
    prof_err = float(np.max(np.abs(got - ref)[mask] / np.abs(ref)[mask]))
    shifts = [_level_crossing(fig3_orbit, lv) - _level_crossing(orbit_a, lv) for lv in (3.0, 2.0, 1.0)]
    shift_err = max(abs(s - math.log(A)) for s in shifts)
    ok = prof_err < PROFILE_REL and shift_err < SHIFT_TOL
    report("C8", ok, f"A=2 profile rel err {prof_err:.1e}, orbit shift {np.mean(shifts):.9f} "
           f"(log 2 = {math.log(A):.9f}), err {shift_err:.1e}")


def test_c9_figure4_exponents(report, tmp_path, fig4_orbit):
    assert cli_run(["reproduce-figures", "--figure", "4", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "figure4_summary.json").read_text())
    times = summary["times"]
    centre = {}
    for t in times:
        data = np.loadtxt(tmp_path / f"figure4_t{t:g}.csv", delimiter=",", skiprows=1)
        row = data[np.argmin(np.abs(data[:, 0]))]
        centre[t] = row
    s = np.log1p(np.array(times) / summary["params"]["gamma0"])
    expected = time_exponents(validate(0.05, lam=10.0))
    fitted, errs = {}, {}
    for name, col in (("gamma", 2), ("sigma", 3), ("u", 4)):
        vals = np.log([centre[t][col] for t in times])
        fitted[name] = float(np.polyfit(s, vals, 1)[0])
        errs[name] = abs(fitted[name] / expected[name] - 1)
    maxima_at_centre = summary["peak_at_center"]["gamma"] and summary["peak_at_center"]["u"]
    ok = max(errs.values()) < FIG_EXPONENT_REL and maxima_at_centre and summary["stress_min_at_center"]
    report("C9", ok, ", ".join(f"{k} {fitted[k]:.4f} (expected {expected[k]:.4f})" for k in fitted)
           + f"; maxima at x=0 {maxima_at_centre}, stress minimum at x=0 {summary['stress_min_at_center']}")
