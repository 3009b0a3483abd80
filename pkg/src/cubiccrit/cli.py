"""Command-line front end.

Exit codes: 0 on success, 1 when a verification check fails or a
computation cannot complete, 2 for invalid input or parameters outside the
supported domain.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__
from .curve import CurveParam, alpha_from_tau, branch_points
from .errors import (ContinuationError, DomainError, GeometryError, QuadratureError,
                     TopologyError)

SCHEMA = 1
THREADS_ENV = "CUBICCRIT_THREADS"


@dataclass
class RunConfig:
    """Settings shared by all commands; file values override defaults, flags override both."""

    tau: float = 0.1
    m: int = 10_000
    n: int = 1000
    nodes: int = 2000
    step: float = 1e-3
    tol: float = 1e-4
    mass_tol: float = 1e-5
    cauchy_tol: float = 1e-5
    variation_tol: float = 5e-4
    test_points: int = 20
    seed: int = 20240601
    out: Optional[str] = None
    seeds: tuple = ()
    threads: int = 1

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        cfg = cls()
        env = os.environ.get(THREADS_ENV)
        if env:
            cfg.threads = _coerce("threads", env)
        if path:
            for key, value in _read_flat(path).items():
                setattr(cfg, key, _coerce(key, value))
        return cfg

    def update(self, **kw) -> "RunConfig":
        for k, v in kw.items():
            if v is not None and v != ():
                setattr(self, k, v)
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _read_flat(path: str) -> dict:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in _FIELDS:
            raise click.BadParameter(f"{path}:{n}: unknown key {k!r}")
        out[k] = v
    return out


def _coerce(key: str, value: str):
    kind = type(getattr(RunConfig(), key))
    if key == "seeds":
        return tuple(s.strip() for s in value.split(",") if s.strip())
    if key == "tau":
        return parse_tau(value)
    if kind is int:
        return int(value)
    if kind is float:
        return float(value)
    return value


def parse_tau(text: str) -> float:
    """Accept decimals and fractions such as ``1/12``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"cannot read tau from {text!r}") from None


class TauType(click.ParamType):
    name = "tau"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            return float(Fraction(str(value).strip()))
        except (ValueError, ZeroDivisionError):
            self.fail(f"cannot read tau from {value!r}", param, ctx)


TAU = TauType()


# -- output helpers -----------------------------------------------------------

def _clean(obj):
    """JSON-ready copy with complex numbers as pairs and floats rounded to 12 digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return float(f"{x:.12g}")
    if hasattr(obj, "value") and not isinstance(obj, (str, int)):
        return obj.value
    return obj


def to_json(kind: str, payload: dict) -> str:
    doc = {"schema": f"cubiccrit/{kind}/{SCHEMA}", "version": __version__, **payload}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def csv_header(kind: str, cfg: RunConfig, extra: str = "") -> list[str]:
    line = f"cubiccrit {__version__} {kind} schema {SCHEMA}"
    return [line + (f" {extra}" if extra else "")]


def emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _run(fn):
    """Map package errors to exit codes."""
    try:
        return fn()
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (GeometryError, TopologyError, ContinuationError, QuadratureError) as exc:
        click.echo(f"failure: {exc}", err=True)
        sys.exit(1)


# -- commands -----------------------------------------------------------------

@click.group()
@click.version_option(__version__, prog_name="cubiccrit")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Flat key = value file overriding defaults.")
@click.pass_context
def main(ctx, config_path):
    """Spectral curve, critical graphs and critical measures for the cubic field."""
    ctx.obj = RunConfig.load(config_path)


def _opt_tau(f):
    return click.option("--tau", type=TAU, default=None, help="Parameter in [0, 1/4).")(f)


def _opt_out(f):
    return click.option("--out", type=click.Path(), default=None, help="Output path.")(f)


@main.command("curve-info")
@_opt_tau
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json")
@_opt_out
@click.pass_obj
def curve_info(cfg: RunConfig, tau, fmt, out):
    """Coefficient c, branch points, b_star and regime."""
    cfg.update(tau=tau, out=out)

    def go():
        from .sheets import CutSystem
        p = CurveParam(cfg.tau)
        bp = branch_points(p)
        rec = bp.as_record()
        rec.update(alpha=alpha_from_tau(cfg.tau), degenerate_merge=bp.degenerate_merge,
                   a2=bp.a2, b2=bp.b2)
        try:
            cuts = CutSystem.build(p)
            rec.update(regime=cuts.regime.value, a_star=cuts.a_star)
        except GeometryError as exc:
            rec.update(regime=None, a_star=None, note=str(exc))
        emit(to_json("curve-info", rec), cfg.out)

    _run(go)


@main.command("widths")
@click.option("--grid-n", "n", type=click.IntRange(min=1), default=None,
              help="Number of tau values k/(4(n+1)).")
@click.option("--nodes-m", "m", type=click.IntRange(min=16), default=None,
              help="Trapezoid nodes per segment.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@_opt_out
@click.pass_obj
def widths_cmd(cfg: RunConfig, n, m, fmt, out):
    """Widths omega_1..omega_4 on a uniform tau grid."""
    cfg.update(n=n, m=m, out=out)

    def go():
        from .widths import width_grid, widths_csv
        reps = width_grid(cfg.n, cfg.m)
        if fmt == "csv":
            text = widths_csv(reps, csv_header("widths", cfg, f"n={cfg.n} m={cfg.m}"))
        else:
            rows = [{"tau": r.tau, "omega1": r.omega1, "omega2": r.omega2, "omega3": r.omega3,
                     "omega4": r.omega4} for r in reps]
            text = to_json("widths", {"n": cfg.n, "m": cfg.m, "rows": rows})
        emit(text, cfg.out)

    _run(go)


@main.command("critical-taus")
@click.option("--nodes-m", "m", type=click.IntRange(min=16), default=None)
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="Root tolerance of the bracketing solver (at least 1e-9).")
@_opt_out
@click.pass_obj
def critical_taus_cmd(cfg: RunConfig, m, tol, out):
    """Zeros tau_1, tau_c, tau_2 of the widths."""
    cfg.update(m=m, out=out)

    def go():
        from .widths import critical_taus
        ct = critical_taus(tol=tol, m=cfg.m)
        emit(to_json("critical-taus", {"m": cfg.m, "tol": tol, **ct.as_dict()}), cfg.out)

    _run(go)


def _graph(tau: float, step: float):
    from .sheets import CutSystem
    from .tracer import TraceConfig, critical_graph
    p = CurveParam(tau)
    tc = TraceConfig(step=step)
    cuts = CutSystem.build(p, tc)
    return critical_graph(p, cuts, tc), cuts


@main.command("graph")
@_opt_tau
@click.option("--step", type=float, default=None, help="Tracer step.")
@click.option("--format", "fmt", type=click.Choice(["svg", "json"]), default="svg")
@_opt_out
@click.pass_obj
def graph_cmd(cfg: RunConfig, tau, step, fmt, out):
    """Critical graph on the three sheets."""
    cfg.update(tau=tau, step=step, out=out)

    def go():
        from .svg import render_graph
        g, cuts = _graph(cfg.tau, cfg.step)
        if fmt == "svg":
            text = render_graph(g, cuts)
        else:
            s = g.summary()
            s.update(prong_defects=g.prong_defects(),
                     conjugation_defect=g.conjugation_defect())
            text = to_json("graph", s)
        emit(text, cfg.out)

    _run(go)


def _sweep_one(arg):
    from .svg import render_graph
    tau, step = arg
    g, cuts = _graph(tau, step)
    return tau, render_graph(g, cuts)


@main.command("sweep")
@click.option("--tau-from", type=TAU, required=True)
@click.option("--tau-to", type=TAU, required=True)
@click.option("--count", type=click.IntRange(min=1), default=5)
@click.option("--step", type=float, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Directory receiving one SVG per tau.")
@click.pass_obj
def sweep_cmd(cfg: RunConfig, tau_from, tau_to, count, step, out):
    """Critical graphs for a range of tau, one SVG each.

    Worker processes are taken from the CUBICCRIT_THREADS variable or the
    ``threads`` config key.
    """
    cfg.update(step=step)
    taus = np.linspace(tau_from, tau_to, count) if count > 1 else np.array([tau_from])

    def go():
        Path(out).mkdir(parents=True, exist_ok=True)
        args = [(float(t), cfg.step) for t in taus]
        if cfg.threads > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
                results = list(ex.map(_sweep_one, args))
        else:
            results = [_sweep_one(a) for a in args]
        for t, text in results:
            (Path(out) / f"graph_tau_{t:.6f}.svg").write_text(text)

    _run(go)


@main.command("supports")
@_opt_tau
@click.option("--nodes", type=click.IntRange(min=64), default=None, help="Samples per arc.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for mu1.csv, mu2.csv, mu3.csv and summary.json.")
@click.pass_obj
def supports_cmd(cfg: RunConfig, tau, nodes, out):
    """Supports and sampled densities of the three components."""
    cfg.update(tau=tau, nodes=nodes, out=out)

    def go():
        from .measures import component_csv, family_measure, measure_summary
        from .sheets import CutSystem
        p = CurveParam(cfg.tau)
        mu = family_measure(p, CutSystem.build(p), n=cfg.nodes)
        summary = to_json("supports", measure_summary(mu))
        if cfg.out is None:
            click.echo(summary, nl=False)
            return
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        for c in mu.components:
            hdr = csv_header("density", cfg, f"component={c.label} tau={cfg.tau!r}")
            (d / f"{c.label}.csv").write_text(component_csv(c, hdr))
        (d / "summary.json").write_text(summary)

    _run(go)


@main.command("trace")
@_opt_tau
@click.option("--seed", "seeds", multiple=True,
              help="Vertex id such as 'a2^(2)', optionally ':k' for one direction.")
@click.option("--step", type=float, default=None)
@click.option("--orthogonal", is_flag=True, help="Trace orthogonal trajectories.")
@_opt_out
@click.pass_obj
def trace_cmd(cfg: RunConfig, tau, seeds, step, orthogonal, out):
    """Trajectories from chosen zeros; CSV polylines plus a JSON summary on stderr."""
    cfg.update(tau=tau, seeds=tuple(seeds), step=step, out=out)

    def go():
        from .sheets import CutSystem
        from .tracer import TraceConfig, critical_vertices, seeds_at, trace
        p = CurveParam(cfg.tau)
        tc = TraceConfig(step=cfg.step)
        cuts = CutSystem.build(p, tc)
        verts, sps = critical_vertices(p, cuts)
        by_point = {sp.name: sp for sp in sps}
        wanted = cfg.seeds or tuple(sorted(verts))
        lines = csv_header("trace", cfg, f"tau={cfg.tau!r}")
        rows = ["# " + lines[0], "vertex,direction,index,re_z,im_z,sheet"]
        summary = []
        for item in wanted:
            vid, _, k = item.partition(":")
            if vid not in verts:
                raise DomainError(f"unknown vertex {vid!r}; known: {', '.join(sorted(verts))}")
            vx = verts[vid]
            seeds_here = seeds_at(p, by_point[vx.point], vx.role, tc.seed_offset)
            ks = [int(k)] if k else range(len(seeds_here))
            for j in ks:
                if not 0 <= j < len(seeds_here):
                    raise DomainError(f"{vid} has {len(seeds_here)} directions")
                z0, xi0, e = seeds_here[j]
                tr = trace(p, z0, xi0, e, tc, specials=sps, cuts=cuts,
                           sheet=cuts.sheet_of(z0, xi0), orthogonal=orthogonal,
                           start_point=vx.point, seed=(vid, j))
                for i, (z, s) in enumerate(zip(tr.z, tr.sheet)):
                    rows.append(f"{vid},{j},{i},{z.real:.12e},{z.imag:.12e},{int(s)}")
                t = tr.termination
                summary.append({"vertex": vid, "direction": j, "end": t.kind, "point": t.point,
                                "role": t.role, "x": t.x, "end_z": complex(tr.z[-1]),
                                "end_sheet": int(tr.sheet[-1]), "length": tr.length})
        emit("\n".join(rows) + "\n", cfg.out)
        click.echo(to_json("trace", {"tau": cfg.tau, "trajectories": summary}), err=True, nl=False)

    _run(go)


def verification(cfg: RunConfig) -> dict:
    """All numerical checks for one tau; returns a report with an ``ok`` flag."""
    from .measures import family_measure
    from .sheets import CutSystem, Regime, pair_integral_from_b2
    from .variational import ExternalField, variation_Dhz, verify_equilibrium
    p = CurveParam(cfg.tau)
    cuts = CutSystem.build(p)
    mu = family_measure(p, cuts, n=cfg.nodes)
    checks = {}
    m1, m2, m3 = mu.masses()
    alpha = alpha_from_tau(cfg.tau)
    checks["mass_sum_1"] = (abs(m1 + m2 - 1.0), cfg.mass_tol)
    checks["mass_sum_alpha"] = (abs(m1 + m3 - alpha), cfg.mass_tol)
    if cuts.regime is not Regime.SUPERCRITICAL:
        checks["mu3_empty"] = (float(not mu[3].empty), 0.5)
    checks["min_density"] = (max(0.0, -min(c.min_density for c in mu.components)), 1e-9)
    rng = np.random.default_rng(cfg.seed)
    pts = []
    while len(pts) < cfg.test_points:
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if mu.distance(z) > 0.1:
            pts.append(z)
    pts = np.array(pts)
    C = mu.cauchy(pts)
    xi = np.array([cuts.labeled_roots(z) for z in pts])
    r1 = np.abs(C[0] + C[1] + 2 * pts**2 - xi[:, 0])
    r2 = np.abs(C[0] + C[2] + pts**2 + xi[:, 1])
    r3 = np.abs(C[1] - C[2] + pts**2 + xi[:, 2])
    checks["cauchy_identities"] = (float(max(r1.max(), r2.max(), r3.max())), cfg.cauchy_tol)
    F = ExternalField.cubic()
    dh = max(abs(variation_Dhz(mu, F, z)) for z in pts)
    checks["variation_Dhz"] = (float(dh), cfg.variation_tol)
    if cuts.regime is Regime.SUPERCRITICAL:
        val = pair_integral_from_b2(p, cuts.a_star, cuts.bp)
        checks["a_star_condition"] = (abs(float(np.real(val))), 1e-7)
    rep = verify_equilibrium(p, cuts, mu, tol=cfg.tol)
    out = {name: {"value": v, "limit": lim, "ok": bool(v < lim)} for name, (v, lim) in checks.items()}
    eq = rep.as_dict()
    ok = all(c["ok"] for c in out.values()) and rep.ok
    return {"tau": cfg.tau, "regime": cuts.regime.value, "a_star": cuts.a_star,
            "masses": [m1, m2, m3], "alpha": alpha, "checks": out, "equilibrium": eq, "ok": ok}


@main.command("verify")
@_opt_tau
@click.option("--tol", type=float, default=None, help="Equality tolerance for potentials.")
@click.option("--nodes", type=click.IntRange(min=64), default=None)
@_opt_out
@click.pass_obj
def verify_cmd(cfg: RunConfig, tau, tol, nodes, out):
    """Masses, Cauchy identities, variations and equilibrium conditions."""
    cfg.update(tau=tau, tol=tol, nodes=nodes, out=out)

    def go():
        rep = verification(cfg)
        emit(to_json("verify", rep), cfg.out)
        if not rep["ok"]:
            sys.exit(1)

    _run(go)


if __name__ == "__main__":
    main()
