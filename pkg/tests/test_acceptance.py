"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import math
import time
from functools import lru_cache

import numpy as np

from cubiccrit.curve import (CurveParam, alpha_from_tau, branch_points, eval_discriminant,
                             solve_xi_unlabeled, vieta_residuals)
from cubiccrit.measures import example_fixture
from cubiccrit.sheets import Regime, find_a_star_from_trajectory, find_a_star_supercritical
from cubiccrit.tracer import TraceConfig, seeds_at, special_points, trace
from cubiccrit.variational import ExternalField, verify_equilibrium, variation_Dhz
from cubiccrit.widths import critical_taus

from oracles import cuts, golden, graph, measure, off_support_points, param

REFERENCE_TAUS = (0.12487351, 0.1913565, 0.2289555)
MASS_TAUS = [0.02, 0.05, 0.08, 0.11, 0.14, 0.17, 0.195, 0.21, 0.227, 0.245]
PHASE_TAUS = [0.04, 0.10, 0.15, 0.21, 0.24]


@lru_cache(maxsize=None)
def _critical():
    t0 = time.perf_counter()
    ct = critical_taus()
    return ct, time.perf_counter() - t0


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def test_critical_parameter_values():
    ct, elapsed = _critical()
    got = (ct.tau1, ct.tau_c, ct.tau2)
    errs = [abs(g - r) for g, r in zip(got, REFERENCE_TAUS)]
    ok = max(errs) < 1e-4 and elapsed < 60.0
    report("critical parameter values", ok,
           "computed " + ", ".join(f"{g:.8f}" for g in got)
           + "; errors " + ", ".join(f"{e:.2e}" for e in errs)
           + f"; {elapsed:.1f} s")


def test_tau0_geometry():
    bp = branch_points(CurveParam(0.0))
    c = 3 ** (2 / 3) / 4
    errs = [abs(bp.a1 - c), abs(bp.b1 - c), abs(bp.b_star - 3 ** (-1 / 3)),
            abs(bp.b2 - 3 ** (-1 / 3) * (-1 + 1j * math.sqrt(2)))]
    x = find_a_star_from_trajectory(cuts(0.0).param, cuts(0.0).delta2)
    ok = max(errs) < 1e-10 and abs(x + 0.441782) < 1e-4
    report("tau = 0 geometry", ok,
           f"max branch point error {max(errs):.1e}; crossing {x:.7f}")


def _trace_to_axis(tau, name):
    p = param(tau)
    bp = branch_points(p)
    z0 = {"a2": bp.a2, "b2": bp.b2}[name]
    sp = special_points(p, {name: z0}, {name: True})[0]
    cfg = TraceConfig(stop_on_real_axis=True)
    hits = []
    for z, xi, e in seeds_at(p, sp, "single"):
        tr = trace(p, z, xi, e, cfg, specials=[sp], start_point=name)
        if tr.termination.kind == "real_axis":
            hits.append(tr)
    return min(hits, key=lambda t: t.length).termination.x


def test_short_trajectory_existence():
    details, ok = [], True
    for tau in (0.04, 0.10, 0.15):
        es = graph(tau).edges_between("a2^(2)", "b2^(2)")
        bp = branch_points(param(tau))
        # the last vertex is snapped onto the branch point; the gap is measured
        # from the last integrated point before the snap
        gap = min(abs(e.trajectory.z[-2] - (bp.b2 if e.start == "a2^(2)" else bp.a2))
                  for e in es) if es else math.inf
        ok &= gap < 5e-3
        details.append(f"{tau}: gap {gap:.1e}")
    for tau in (0.20, 0.227):
        xb, xa = _trace_to_axis(tau, "b2"), _trace_to_axis(tau, "a2")
        x_int = find_a_star_supercritical(param(tau))
        err = max(abs(xb - x_int), abs(xa - x_int))
        ok &= err < 1e-4
        details.append(f"{tau}: axis error {err:.1e}")
    report("short-trajectory existence", ok, "; ".join(details))


def test_algebraic_invariants():
    rng = np.random.default_rng(2024)
    taus = rng.uniform(0.0, 0.25, 1000)
    zs = rng.uniform(-3, 3, 1000) + 1j * rng.uniform(-3, 3, 1000)
    worst_v, worst_d = 0.0, 0.0
    for tau, z in zip(taus, zs):
        p = CurveParam(float(tau))
        xi = solve_xi_unlabeled(p, z)
        s1, s2, s3 = vieta_residuals(p, z, xi)
        scale = max(1.0, float(np.abs(xi).max()))
        worst_v = max(worst_v, abs(s1) / scale, abs(s2) / max(1.0, abs(p.R(z))),
                      abs(s3) / max(1.0, abs(p.D(z))))
        disc, q1, q2 = eval_discriminant(p, z)
        dscale = abs(4 * p.R(z) ** 3) + abs(27 * p.D(z) ** 2)
        worst_d = max(worst_d, abs(disc - 243 / 256 * q1 * q2**2) / dscale)
    ok = worst_v < 1e-8 and worst_d < 1e-9
    report("algebraic invariants", ok,
           f"worst Vieta residual {worst_v:.1e}; worst factorization residual {worst_d:.1e}")


def test_mass_constraints():
    worst, ok = 0.0, True
    for tau in MASS_TAUS:
        mu = measure(tau)
        m1, m2, m3 = mu.masses()
        worst = max(worst, abs(m1 + m2 - 1), abs(m1 + m3 - alpha_from_tau(tau)))
        if mu.regime is Regime.PRECRITICAL:
            ok &= mu[3].empty and m3 == 0.0
    regimes = {measure(t).regime.value for t in MASS_TAUS}
    ok &= worst < 1e-5 and len(regimes) == 2
    report("mass constraints", ok, f"worst deviation {worst:.1e} over {len(MASS_TAUS)} taus")


def test_cauchy_identities():
    worst = 0.0
    for tau in (0.05, 0.1, 0.2, 0.227):
        mu = measure(tau)
        for z in off_support_points(mu):
            C1, C2, C3 = mu.cauchy(z)
            xi = cuts(tau).labeled_roots(z)
            worst = max(worst, abs(C1 + C2 + 2 * z**2 - xi[0]), abs(C2 - C3 + z**2 + xi[2]),
                        abs(C1 + C3 + z**2 + xi[1]))
    report("Cauchy-transform identities", worst < 1e-5, f"worst residual {worst:.1e}")


def test_criticality_identity():
    field = ExternalField.cubic()
    worst = 0.0
    for tau in (0.02, 0.08, 0.12, 0.2, 0.24):
        mu = measure(tau)
        p = param(tau)
        for z in off_support_points(mu, seed=11):
            xi = cuts(tau).labeled_roots(z)
            worst = max(worst, abs(0.5 * np.sum(xi**2) - p.R(z) - variation_Dhz(mu, field, z)))
    report("criticality identity", worst < 5e-4, f"worst residual {worst:.1e}")


def test_equilibrium_report():
    lines, ok = [], True
    for tau in (0.1, 0.2):
        r = verify_equilibrium(param(tau), cuts(tau), measure(tau))
        dev = max(r.max_equality_deviation.values())
        margin = min(r.min_inequality_margin.values())
        ok &= dev < 1e-4 and margin > 0
        text = f"{tau}: deviation {dev:.1e}, margin {margin:.2e}"
        if tau > 0.19:
            ok &= r.l3_defect is not None and r.l3_defect < 1e-4
            text += f", l3 defect {r.l3_defect:.1e}"
        lines.append(text)
    report("equilibrium report", ok, "; ".join(lines))


def test_fixture_exponents():
    ang = example_fixture("Angelesco")
    nik = example_fixture("Nikishin")
    ae = list(ang.blowup_exponents().values())
    am = ang.vector_measure().masses()
    ne = nik.blowup_exponents()["mu2"]
    nm = nik.vector_measure()[2].mass
    ok = (all(abs(v - 1 / 3) <= 0.03 for v in ae) and abs(am[0] - 0.5) < 1e-5
          and abs(am[1] - 0.5) < 1e-5 and abs(ne - 2 / 3) <= 0.03 and abs(nm - 1) < 1e-5)
    report("fixture exponents", ok,
           "Angelesco exponents " + ", ".join(f"{v:.3f}" for v in ae)
           + f", masses {am[0]:.6f} {am[1]:.6f}; Nikishin exponent {ne:.3f}, mass {nm:.6f}")


def test_phase_diagram_regression():
    ct, _ = _critical()
    bounds = [0.0, 1 / 12, ct.tau1, ct.tau_c, ct.tau2, 0.25]
    ok, bad = True, []
    for k, tau in enumerate(PHASE_TAUS):
        g = graph(tau)
        gold = golden(tau)
        checks = (bounds[k] < tau < bounds[k + 1],
                  {v: x.order for v, x in g.vertices.items()} == gold["vertices"],
                  g.labels() == gold["edges"],
                  g.failures == [] and g.prong_defects() == {},
                  g.conjugation_defect() < 10 * TraceConfig().step)
        if not all(checks):
            ok = False
            bad.append(str(tau))
    report("phase-diagram regression", ok,
           f"{len(PHASE_TAUS) - len(bad)}/{len(PHASE_TAUS)} taus match"
           + (f" (mismatch at {', '.join(bad)})" if bad else ""))
