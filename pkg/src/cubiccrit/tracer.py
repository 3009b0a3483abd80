"""Trajectories of the quadratic differential ``-Q^2 dz^2`` on the three-sheeted surface.

A point of the surface is represented by the pair ``(z, xi)`` where ``xi`` is
one root of the cubic at ``z``.  On the sheet carrying ``xi`` the function
``Q`` is the difference of the two other roots, so that
``Q^2 = 4 R(z) - 3 xi^2``.  Tracing therefore only needs to follow one root
continuously; sheet labels are bookkeeping layered on top.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .curve import SpectralCurve
from .errors import GeometryError

log = logging.getLogger(__name__)

# asymptotic directions at the poles of order eight
_AXIS_EPS = 1e-12

THETA_INF = tuple((2 * j - 1) * math.pi / 6 for j in range(1, 7))


@dataclass(frozen=True)
class TraceConfig:
    """Numerical settings of the tracer."""

    step: float = 1e-3
    snap: float = 5e-3
    capture: float = 2e-4
    r_max: float = 10.0
    max_steps: int = 1_000_000
    seed_offset: float = 1e-4
    stop_on_real_axis: bool = False
    conservation_tol: float = 1e-5


@dataclass(frozen=True)
class SpecialPoint:
    """Point of the plane where two roots meet.

    ``xi_pair`` is the repeated root value and ``xi_single`` the remaining
    one.  ``branch`` is False for the double point, which is a regular point
    of the surface where two sheets touch.
    """

    name: str
    z: complex
    xi_pair: complex
    xi_single: complex
    branch: bool


@dataclass
class Termination:
    kind: str  # critical | radius | real_axis | step_limit | failure
    point: Optional[str] = None
    role: Optional[str] = None  # 'single' or 'pair' root at the critical point
    angle: Optional[float] = None
    direction_index: Optional[int] = None
    x: Optional[float] = None
    message: str = ""


@dataclass
class Trajectory:
    """Polyline on the surface with per-vertex root and sheet."""

    z: np.ndarray
    xi: np.ndarray
    sheet: np.ndarray
    termination: Termination
    kind: str = "trajectory"
    seed: tuple = ()
    crossings: list = field(default_factory=list)
    drift: float = 0.0

    @property
    def length(self) -> float:
        return float(np.abs(np.diff(self.z)).sum())

    def end_sheet(self) -> int:
        return int(self.sheet[-1])


def special_points(curve: SpectralCurve, named: dict[str, complex],
                   branch: dict[str, bool]) -> list[SpecialPoint]:
    """Group the roots at each named point into a repeated pair and a single."""
    out = []
    for name, z in named.items():
        r = curve.roots_scalar(complex(z))
        pairs = [(abs(r[i] - r[j]), i, j) for i, j in ((0, 1), (0, 2), (1, 2))]
        _, i, j = min(pairs)
        k = 3 - i - j
        out.append(SpecialPoint(name, complex(z), 0.5 * (r[i] + r[j]), r[k],
                                bool(branch[name])))
    return out


def _nearest(roots, target):
    d = [abs(r - target) for r in roots]
    k = min(range(3), key=d.__getitem__)
    others = [d[j] for j in range(3) if j != k]
    return roots[k], d[k], min(others)


class _Field:
    """Unit line field of trajectories or orthogonal trajectories."""

    def __init__(self, curve: SpectralCurve, orthogonal: bool):
        self.curve = curve
        self.orthogonal = orthogonal

    def root(self, z: complex, guess: complex) -> tuple[complex, float]:
        roots = self.curve.roots_scalar(z)
        xi, d_own, d_other = _nearest(roots, guess)
        ratio = d_own / d_other if d_other > 0 else math.inf
        return xi, ratio

    def dxi(self, z: complex, xi: complex) -> complex:
        R, D, dR, dD = self.curve.rd_scalar(z)
        den = 3.0 * xi * xi - R
        if den == 0:
            return 0j
        return (dR * xi - dD) / den

    def q(self, z: complex, xi: complex) -> complex:
        R = self.curve.rd_scalar(z)[0]
        return cmath.sqrt(4.0 * R - 3.0 * xi * xi)

    def direction(self, z: complex, xi: complex, prev: complex) -> complex:
        q = self.q(z, xi)
        if q == 0:
            return prev
        v = q.conjugate() if self.orthogonal else 1j * q.conjugate()
        v /= abs(v)
        if (v * prev.conjugate()).real < 0:
            v = -v
        return v


def _real_axis_crossing(z0: complex, z1: complex) -> Optional[float]:
    y0, y1 = z0.imag, z1.imag
    if y0 * y1 < 0 or (y1 == 0 and y0 != 0):
        t = y0 / (y0 - y1)
        return z0.real + t * (z1.real - z0.real)
    return None


def trace(curve: SpectralCurve, z0: complex, xi0: complex, heading: complex,
          cfg: TraceConfig = TraceConfig(), specials: Sequence[SpecialPoint] = (),
          cuts=None, sheet: int = 0, orthogonal: bool = False,
          start_point: Optional[str] = None, seed: tuple = ()) -> Trajectory:
    """Integrate a trajectory in arc length with RK4.

    Parameters
    ----------
    curve : SpectralCurve
    z0, xi0 : complex
        Starting point and the root defining the starting sheet.
    heading : complex
        Initial direction; the sign of the line field follows it.
    cfg : TraceConfig
    specials : sequence of SpecialPoint
        Branch points and double points used for capture and step control.
    cuts : CutSystem, optional
        When given, sheet labels are updated at every cut crossing.
    sheet : int
        Sheet label at the start (0 when unknown).
    orthogonal : bool
        Trace orthogonal trajectories (``Q dz`` real) instead.
    start_point : str, optional
        Name of the special point the seed leaves; it cannot capture the
        trajectory until the trajectory has moved away from it.

    Returns
    -------
    Trajectory
    """
    fld = _Field(curve, orthogonal)
    z = complex(z0)
    xi, _ = fld.root(z, xi0)
    v = heading / abs(heading)
    v = fld.direction(z, xi, v)
    zs = [z]
    xis = [xi]
    sheets = [sheet]
    crossings = []
    q_prev = fld.q(z, xi)
    integral = 0j
    drift = 0.0
    armed = {sp.name: (sp.name != start_point) for sp in specials}
    last_sign = 0 if abs(z.imag) <= _AXIS_EPS else (1 if z.imag > 0 else -1)
    last_off = z if last_sign else None
    term = None
    n = 0
    h_min = 1e-13
    while term is None:
        if n >= cfg.max_steps:
            term = Termination("step_limit")
            break
        n += 1
        dist = math.inf
        for sp in specials:
            d = abs(z - sp.z)
            if d < dist:
                dist = d
        h = cfg.step * max(1.0, abs(z))
        h = min(h, 0.25 * dist)
        h = max(h, h_min)
        while True:
            ok = True
            d1 = fld.dxi(z, xi)
            k1 = fld.direction(z, xi, v)
            pts = []
            ks = [k1]
            for frac, kk in ((0.5, k1), (0.5, None), (1.0, None)):
                kk = ks[-1]
                zz = z + frac * h * kk
                g, ratio = fld.root(zz, xi + d1 * (zz - z))
                if ratio > 0.25:
                    ok = False
                    break
                ks.append(fld.direction(zz, g, kk))
                pts.append(zz)
            if ok:
                znew = z + h * (ks[0] + 2 * ks[1] + 2 * ks[2] + ks[3]) / 6.0
                xinew, ratio = fld.root(znew, xi + d1 * (znew - z))
                ok = ratio <= 0.25
            if ok:
                break
            h *= 0.5
            if h < h_min:
                term = Termination("failure", message=f"root tracking failed near {z!r}")
                break
        if term is not None:
            break
        vnew = fld.direction(znew, xinew, ks[3])
        zm = 0.5 * (z + znew)
        xim, _ = fld.root(zm, xi + d1 * (zm - z))
        q_mid = fld.q(zm, xim)
        if (q_mid * q_prev.conjugate()).real < 0:
            q_mid = -q_mid
        q_new = fld.q(znew, xinew)
        if (q_new * q_mid.conjugate()).real < 0:
            q_new = -q_new
        integral += (q_prev + 4.0 * q_mid + q_new) * (znew - z) / 6.0
        drift = max(drift, abs(integral.imag if orthogonal else integral.real))
        q_prev = q_new
        cur_sheet = sheets[-1]
        x_cross = None
        t_cross = 0.0
        if abs(znew.imag) > _AXIS_EPS:
            sgn = 1 if znew.imag > 0 else -1
            if last_sign and sgn != last_sign:
                x_cross = _real_axis_crossing(last_off, znew) if last_off is not None else znew.real
                if x_cross is None:
                    x_cross = znew.real
                t_cross = z.imag / (z.imag - znew.imag) if abs(z.imag) > _AXIS_EPS else 0.0
            last_sign, last_off = sgn, znew
        if cuts is not None and cur_sheet:
            events = [(float(t), "D2") for t in cuts.delta2_hits(z, znew)]
            if x_cross is not None:
                cut = cuts.real_cut(x_cross)
                if cut is not None:
                    events.append((t_cross, cut))
            for _, cut in sorted(events):
                nxt = cuts.cross_if_bordered(cur_sheet, cut)
                if nxt != cur_sheet:
                    crossings.append((len(zs), cut))
                    cur_sheet = nxt
        z, xi, v = znew, xinew, vnew
        zs.append(z)
        xis.append(xi)
        sheets.append(cur_sheet)
        if cfg.stop_on_real_axis and x_cross is not None:
            zs[-1] = complex(x_cross, 0.0)
            term = Termination("real_axis", x=x_cross)
            break
        for sp in specials:
            d = abs(z - sp.z)
            if not armed[sp.name]:
                if d > 4 * cfg.capture:
                    armed[sp.name] = True
                continue
            if d < cfg.capture:
                role = "pair" if abs(xi - sp.xi_pair) < abs(xi - sp.xi_single) else "single"
                if sp.branch or role == "single":
                    zs.append(sp.z)
                    xis.append(sp.xi_pair if role == "pair" else sp.xi_single)
                    sheets.append(cur_sheet)
                    term = Termination("critical", point=sp.name, role=role)
                    break
        if term is not None:
            break
        if abs(z) > cfg.r_max:
            ang = math.atan2(z.imag, z.real) % (2 * math.pi)
            j = min(range(6), key=lambda i: abs(cmath.exp(1j * THETA_INF[i]) - cmath.exp(1j * ang)))
            term = Termination("radius", angle=ang, direction_index=j + 1)
            break
    traj = Trajectory(z=np.array(zs), xi=np.array(xis), sheet=np.array(sheets),
                      termination=term, kind="orthogonal" if orthogonal else "trajectory",
                      seed=seed, crossings=crossings, drift=drift)
    return traj


@dataclass(frozen=True)
class LocalStructure:
    """Local data of a zero of the quadratic differential.

    ``order`` is the order ``n`` in the local uniformizer ``u`` with
    ``z - z0 = u^ram``, and ``coef`` the leading coefficient ``K`` of the
    local expansion ``Q_u^2 = K u^n``.
    """

    z: complex
    xi: complex
    order: int
    ram: int
    coef: complex


def seed_directions(local: LocalStructure) -> list[float]:
    """Angles in the ``z``-plane of the ``n + 2`` emanating trajectories.

    In the uniformizer the trajectories leave at ``(pi - arg K + 2 pi m)/(n + 2)``.
    For ``ram = 2`` the ``z``-angle is twice the ``u``-angle, so each
    ``z``-direction appears twice (once per sheet).
    """
    n = local.order
    ak = cmath.phase(local.coef)
    out = []
    for m in range(n + 2):
        phi = (math.pi - ak + 2 * math.pi * m) / (n + 2)
        out.append((local.ram * phi) % (2 * math.pi))
    return out


def local_structure(curve: SpectralCurve, sp: SpecialPoint, role: str,
                    eta: float = 1e-4) -> LocalStructure:
    """Order and leading coefficient of the zero at ``sp`` for the given root."""
    fld = _Field(curve, False)
    R0 = curve.rd_scalar(sp.z)[0]
    if sp.branch and role == "single":
        xi = sp.xi_single
        R, D, dR, dD = curve.rd_scalar(sp.z)
        k = 4.0 * dR - 6.0 * xi * fld.dxi(sp.z, xi)
        return LocalStructure(sp.z, xi, 1, 1, k)
    if sp.branch:
        q0sq = 4.0 * R0 - 3.0 * sp.xi_pair**2
        if abs(q0sq) > 1e-8 * max(1.0, abs(R0)):
            return LocalStructure(sp.z, sp.xi_pair, 2, 2, 4.0 * q0sq)
        # triple coalescence: estimate the order numerically along a ray
        vals = []
        for s in (eta, 2 * eta):
            z = sp.z + s * s
            r = curve.roots_scalar(z)
            xi = min(r, key=lambda t: abs(t - sp.xi_pair))
            vals.append((4.0 * curve.rd_scalar(z)[0] - 3.0 * xi * xi) * 4.0 * s * s)
        n = int(round(math.log(abs(vals[1] / vals[0])) / math.log(2.0)))
        return LocalStructure(sp.z, sp.xi_pair, n, 2, vals[0] / eta**n)
    # double point on the sheet of the single root
    acc = 0j
    for k in range(4):
        w = eta * 1j**k
        z = sp.z + w
        r = curve.roots_scalar(z)
        xi = min(r, key=lambda t: abs(t - sp.xi_single))
        acc += (4.0 * curve.rd_scalar(z)[0] - 3.0 * xi * xi) / (w * w)
    return LocalStructure(sp.z, sp.xi_single, 2, 1, acc / 4.0)


def seeds_at(curve: SpectralCurve, sp: SpecialPoint, role: str,
             offset: float = 1e-4) -> list[tuple[complex, complex, complex]]:
    """Seed triples ``(z, xi, heading)`` for every trajectory leaving a zero."""
    loc = local_structure(curve, sp, role)
    angles = seed_directions(loc)
    out = []
    if loc.ram == 1:
        for a in angles:
            e = cmath.exp(1j * a)
            z = sp.z + offset * e
            xi = min(curve.roots_scalar(z), key=lambda t: abs(t - loc.xi))
            out.append((z, xi, e))
        return out
    # pair sheets: each z-direction carries both nearby roots
    seen = []
    for a in angles:
        if any(abs(cmath.exp(1j * a) - cmath.exp(1j * b)) < 1e-9 for b in seen):
            continue
        seen.append(a)
        e = cmath.exp(1j * a)
        z = sp.z + offset * e
        r = sorted(curve.roots_scalar(z), key=lambda t: abs(t - loc.xi))
        out.append((z, r[0], e))
        out.append((z, r[1], e))
    return out


def asymptotic_index(angle: float) -> int:
    """Index ``j`` of the nearest direction ``(2 j - 1) pi / 6``."""
    return 1 + min(range(6), key=lambda i: abs(cmath.exp(1j * THETA_INF[i]) - cmath.exp(1j * angle)))


def polyline_real_crossing(z: np.ndarray) -> Optional[float]:
    """First crossing of the real axis by a polyline, by linear interpolation."""
    for k in range(len(z) - 1):
        x = _real_axis_crossing(complex(z[k]), complex(z[k + 1]))
        if x is not None:
            return x
    if abs(z[-1].imag) < 1e-14:
        return float(z[-1].real)
    raise GeometryError("polyline does not reach the real axis")


# -- critical graph -------------------------------------------------------------

@dataclass(frozen=True)
class Vertex:
    """Zero of ``-Q^2 dz^2`` on the surface.

    ``sheets`` has one entry for a zero on a single sheet and two entries
    for a zero at a branch point shared by two sheets.
    """

    id: str
    point: str
    z: complex
    sheets: tuple
    order: int
    role: str


@dataclass
class Edge:
    start: str
    end: str
    trajectory: Trajectory
    twin: Optional[Trajectory] = None
    direction_index: Optional[int] = None

    @property
    def is_loop(self) -> bool:
        return self.start == self.end

    def label(self) -> str:
        if self.end.startswith("inf"):
            return f"{self.start} -> {self.end} j={self.direction_index}"
        a, b = sorted((self.start, self.end))
        return f"{a} -- {b}"


def vertex_id(point: str, sheets: Sequence[int]) -> str:
    return f"{point}^({','.join(str(s) for s in sorted(sheets))})"


_CONJ_POINT = {"a1": "a1", "b1": "b1", "a2": "b2", "b2": "a2", "b*": "b*"}


def conjugate_id(vid: str) -> str:
    if vid.startswith("inf") or vid == "open":
        return vid
    point, rest = vid.split("^", 1)
    return _CONJ_POINT[point] + "^" + rest


@dataclass
class CriticalGraph:
    tau: float
    vertices: dict
    traces: list
    edges: list
    failures: list
    sheet_mismatches: int = 0
    faces: list = field(default_factory=list)

    def degree(self, vid: str) -> int:
        n = 0
        for e in self.edges:
            n += (e.start == vid) + (e.end == vid)
        return n

    def prong_defects(self) -> dict:
        """Vertices whose incident edge count differs from ``order + 2``."""
        return {v: (self.degree(v), vx.order + 2) for v, vx in self.vertices.items()
                if self.degree(v) != vx.order + 2}

    def labels(self) -> list[str]:
        return sorted(e.label() for e in self.edges)

    def edges_between(self, u: str, v: str) -> list:
        return [e for e in self.edges if {e.start, e.end} == {u, v}
                and (u != v or e.is_loop)]

    def edges_from(self, u: str) -> list:
        return [e for e in self.edges if u in (e.start, e.end)]

    def conjugation_defect(self, samples: int = 200) -> float:
        """Largest distance from an edge to the mirror image of its partner edge."""
        worst = 0.0
        for e in self.edges:
            cu, cv = conjugate_id(e.start), conjugate_id(e.end)
            cand = [f for f in self.edges
                    if {f.start, f.end} == {cu, cv} and f.direction_index == e.direction_index
                    or ({f.start, f.end} == {cu, cv} and e.end.startswith("inf")
                        and f.end == cv and f.direction_index == 7 - e.direction_index)]
            if not cand:
                return math.inf
            a = np.conj(e.trajectory.z)
            best = min(_hausdorff(a, f.trajectory.z, samples) for f in cand)
            worst = max(worst, best)
        return worst

    def summary(self) -> dict:
        return {
            "tau": self.tau,
            "vertices": {k: {"z": [v.z.real, v.z.imag], "order": v.order, "sheets": list(v.sheets)}
                         for k, v in sorted(self.vertices.items())},
            "edges": self.labels(),
            "failures": list(self.failures),
            "sheet_mismatches": self.sheet_mismatches,
        }


def _subsample(z: np.ndarray, k: int) -> np.ndarray:
    if len(z) <= k:
        return np.asarray(z)
    idx = np.linspace(0, len(z) - 1, k).round().astype(int)
    return np.asarray(z)[idx]


def _to_polyline(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to a polyline."""
    a = poly[:-1][None, :]
    e = (poly[1:] - poly[:-1])[None, :]
    w = pts[:, None] - a
    ee = np.maximum(np.abs(e) ** 2, 1e-300)
    t = np.clip((w * np.conj(e)).real / ee, 0.0, 1.0)
    return np.abs(w - t * e).min(axis=1)


def _hausdorff(a: np.ndarray, b: np.ndarray, samples: int = 200) -> float:
    if len(a) < 2 or len(b) < 2:
        return float(np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :]).min())
    da = _to_polyline(_subsample(a, samples), b).max()
    db = _to_polyline(_subsample(b, samples), a).max()
    return float(max(da, db))


def _directed_close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """Whether the middle part of ``a`` lies within ``tol`` of ``b``."""
    n = len(a)
    mids = a[[n // 4, n // 2, (3 * n) // 4]]
    bb = np.asarray(b)
    return all(np.min(np.abs(bb - m)) < tol for m in mids)


def critical_vertices(curve: SpectralCurve, cuts) -> tuple[dict, list[SpecialPoint]]:
    """Zeros on the surface, labeled by sheet, and the special points they sit on."""
    bp = cuts.bp
    named = {"a1": bp.a1, "b1": bp.b1, "a2": bp.a2, "b2": bp.b2}
    branch = {k: True for k in named}
    if not bp.degenerate_merge:
        named["b*"] = complex(bp.b_star)
        branch["b*"] = False
    sps = special_points(curve, named, branch)
    verts = {}
    for sp in sps:
        lab = cuts.labeled_roots(sp.z)
        single = int(np.argmin(np.abs(lab - sp.xi_single))) + 1
        pair = tuple(s for s in (1, 2, 3) if s != single)
        if sp.branch:
            loc = local_structure(curve, sp, "single")
            v = Vertex(vertex_id(sp.name, (single,)), sp.name, sp.z, (single,), loc.order, "single")
            verts[v.id] = v
            loc = local_structure(curve, sp, "pair")
            v = Vertex(vertex_id(sp.name, pair), sp.name, sp.z, pair, loc.order, "pair")
            verts[v.id] = v
        else:
            loc = local_structure(curve, sp, "single")
            v = Vertex(vertex_id(sp.name, (single,)), sp.name, sp.z, (single,), loc.order, "single")
            verts[v.id] = v
    return verts, sps


def critical_graph(curve: SpectralCurve, cuts=None, cfg: TraceConfig = TraceConfig(),
                   degenerate_taus: Sequence[float] = (1.0 / 12.0,),
                   degenerate_tol: float = 1e-4) -> CriticalGraph:
    """Trace every trajectory leaving every zero and assemble the graph.

    Edges between two zeros are traced from both ends and merged when the
    two polylines agree; trajectories that leave the disk ``|z| <= r_max``
    become edges to ``inf^(sheet)`` with the index of the nearest asymptotic
    direction.  Sheets at trajectory ends come from the labeling planner of
    ``cuts``; disagreement with the cut-crossing bookkeeping is counted.
    """
    if cuts is None:
        from .sheets import CutSystem
        cuts = CutSystem.build(curve)
    tau = getattr(curve, "tau", float("nan"))
    if any(abs(tau - t) < degenerate_tol for t in degenerate_taus):
        log.warning("tau=%s is close to a transition value; tracing with reduced step", tau)
        cfg = TraceConfig(**{**cfg.__dict__, "step": cfg.step / 10})
    verts, sps = critical_vertices(curve, cuts)
    by_point = {sp.name: sp for sp in sps}
    traces = []
    failures = []
    mism = 0
    for vid in sorted(verts):
        vx = verts[vid]
        sp = by_point[vx.point]
        for k, (z0, xi0, e) in enumerate(seeds_at(curve, sp, vx.role, cfg.seed_offset)):
            sh = cuts.sheet_of(z0, xi0)
            tr = trace(curve, z0, xi0, e, cfg, specials=sps, cuts=cuts, sheet=sh,
                       start_point=vx.point, seed=(vid, k))
            tr.z = np.concatenate([[vx.z], tr.z])
            tr.xi = np.concatenate([[tr.xi[0]], tr.xi])
            tr.sheet = np.concatenate([[sh], tr.sheet])
            term = tr.termination
            if term.kind == "critical":
                end_sp = by_point[term.point]
                lab = cuts.labeled_roots(end_sp.z)
                single = int(np.argmin(np.abs(lab - end_sp.xi_single))) + 1
                if term.role == "single":
                    end = vertex_id(term.point, (single,))
                else:
                    end = vertex_id(term.point, tuple(s for s in (1, 2, 3) if s != single))
            elif term.kind == "radius":
                zend = complex(tr.z[-1])
                s_end = cuts.sheet_of(zend, complex(tr.xi[-1]))
                if s_end != tr.sheet[-1]:
                    mism += 1
                    tr.sheet[-1] = s_end
                end = f"inf^({s_end})"
            else:
                end = "open"
                failures.append(f"{vid} seed {k}: {term.kind} {term.message}".strip())
            traces.append((vid, k, tr, end))
    edges = _merge(traces)
    return CriticalGraph(tau, verts, traces, edges, failures, mism)


def _merge(traces: list) -> list[Edge]:
    used = set()
    edges = []
    for n, (vid, k, tr, end) in enumerate(traces):
        if n in used:
            continue
        used.add(n)
        if end.startswith("inf") or end == "open":
            edges.append(Edge(vid, end, tr, None, tr.termination.direction_index))
            continue
        scale = max(1.0, float(np.max(np.abs(tr.z))))
        tol = 5e-3 * scale
        twin = None
        for m, (vid2, k2, tr2, end2) in enumerate(traces):
            if m in used or vid2 != end or end2 != vid:
                continue
            if _directed_close(tr.z, tr2.z, tol) and _directed_close(tr2.z, tr.z, tol):
                twin = tr2
                used.add(m)
                break
        edges.append(Edge(vid, end, tr, twin))
    return edges


def orthogonal_extension(curve: SpectralCurve, cuts, cfg: TraceConfig = TraceConfig()):
    """Orthogonal trajectories on sheet 2 from ``b2`` and ``a2`` to infinity.

    From ``b2`` the branch diverging nearest the angle ``2 pi / 3`` is kept,
    from ``a2`` the one nearest ``-2 pi / 3``.

    Returns
    -------
    (Trajectory, Trajectory, bool)
        The two polylines and whether both asymptotic headings match.
    """
    bp = cuts.bp
    named = {"a1": bp.a1, "b1": bp.b1, "a2": bp.a2, "b2": bp.b2}
    sps = special_points(curve, named, {k: True for k in named})
    out = []
    ok = True
    for name, target in (("b2", 2 * math.pi / 3), ("a2", -2 * math.pi / 3)):
        sp = next(s for s in sps if s.name == name)
        loc = local_structure(curve, sp, "single")
        best = None
        for m in range(3):
            ang = (-cmath.phase(loc.coef) + 2 * math.pi * m) / 3
            e = cmath.exp(1j * ang)
            z0 = sp.z + cfg.seed_offset * e
            xi0 = min(curve.roots_scalar(z0), key=lambda t: abs(t - sp.xi_single))
            tr = trace(curve, z0, xi0, e, cfg, specials=sps, orthogonal=True,
                       start_point=name, seed=(name, m))
            if tr.termination.kind != "radius":
                continue
            miss = abs(cmath.exp(1j * tr.termination.angle) - cmath.exp(1j * target))
            if best is None or miss < best[0]:
                best = (miss, tr)
        if best is None:
            ok = False
            raise GeometryError(f"no orthogonal trajectory from {name} reaches infinity")
        tr = best[1]
        tr.z = np.concatenate([[sp.z], tr.z])
        tr.xi = np.concatenate([[sp.xi_single], tr.xi])
        tr.sheet = np.full(len(tr.z), 2)
        ok = ok and best[0] < 0.1
        out.append(tr)
    return out[0], out[1], ok


def final_heading(tr: Trajectory, back: int = 5) -> float:
    z = tr.z
    return float(cmath.phase(z[-1] - z[-1 - back]))
