"""Sheet structure of the spectral curve: cuts, regimes and labeled branches.

The three sheets are separated by a real cut ``D1`` (sheets 1 and 2), a
conjugation-symmetric arc ``D2`` through the branch points ``a2, b2`` (sheets
1 and 3) and, in the supercritical regime, a second real cut ``D3`` (sheets 2
and 3).  Labels are fixed on the real axis to the right of every branch
point, where the roots are real and ordered ``xi_2 < xi_3 < xi_1``, and
carried to other points along paths that avoid the cuts.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .curve import (BranchPointSet, CurveParam, branch_points, continue_roots,
                    match_along, match_roots)
from .errors import DomainError, GeometryError, TopologyError
from .tracer import TraceConfig, seeds_at, special_points, trace

CUTS = ("D1", "D2", "D3")
_CUT_SHEETS = {"D1": (1, 2), "D2": (1, 3), "D3": (2, 3)}


class Regime(enum.Enum):
    PRECRITICAL = "precritical"
    SUPERCRITICAL = "supercritical"
    BOUNDARY = "boundary"


class Side(enum.Enum):
    INTERIOR = "interior"
    PLUS = "plus"
    MINUS = "minus"


def cross_cut(sheet: int, cut: str) -> int:
    """Sheet reached when crossing ``cut`` from ``sheet``.

    Raises
    ------
    TopologyError
        If ``sheet`` does not border ``cut``.
    """
    try:
        pair = _CUT_SHEETS[cut]
    except KeyError:
        raise TopologyError(f"unknown cut {cut!r}") from None
    if sheet not in pair:
        raise TopologyError(f"sheet {sheet} does not border {cut}")
    return pair[1] if sheet == pair[0] else pair[0]


def classify_regime(param: CurveParam, tau_c: float) -> Regime:
    """Regime from the parameter alone, given the critical value ``tau_c``."""
    if param.tau < tau_c:
        return Regime.PRECRITICAL
    if param.tau > tau_c:
        return Regime.SUPERCRITICAL
    return Regime.BOUNDARY


@dataclass(frozen=True)
class SheetPoint:
    """Point on a sheet; ``side`` selects a boundary value on a cut."""

    z: complex
    sheet: int
    side: Side = Side.INTERIOR

    def __post_init__(self):
        if self.sheet not in (1, 2, 3):
            raise DomainError(f"sheet must be 1, 2 or 3, got {self.sheet}")


def trace_delta2(param: CurveParam, bp: Optional[BranchPointSet] = None,
                 cfg: TraceConfig = TraceConfig()) -> np.ndarray:
    """Upper half of the arc ``D2``: trajectory from ``b2`` down to the real axis.

    The arc is the trajectory on sheet 2 leaving ``b2`` (where the root of
    sheet 2 is the single one) in the direction that reaches the real axis.

    Returns
    -------
    ndarray of complex
        Polyline from ``b2`` to the crossing point on the real axis.
    """
    bp = bp or branch_points(param)
    sps = _specials(param, bp)
    sp_b2 = next(s for s in sps if s.name == "b2")
    cfg = TraceConfig(step=cfg.step, snap=cfg.snap, capture=cfg.capture,
                      r_max=cfg.r_max, max_steps=cfg.max_steps,
                      seed_offset=cfg.seed_offset, stop_on_real_axis=True)
    best = None
    for z, xi, e in seeds_at(param, sp_b2, "single", cfg.seed_offset):
        # the arc heads into the lower half of the local picture toward the axis
        tr = trace(param, z, xi, e, cfg, specials=sps, start_point="b2")
        if tr.termination.kind == "real_axis":
            if best is None or tr.length < best.length:
                best = tr
    if best is None:
        raise GeometryError("no trajectory from b2 reaches the real axis")
    return np.concatenate([[bp.b2], best.z])


def find_a_star_from_trajectory(param: CurveParam, delta2: np.ndarray) -> float:
    """Real-axis crossing of a traced arc by bracketing and linear interpolation."""
    z = np.asarray(delta2, dtype=complex)
    y = z.imag
    for k in range(len(z) - 1):
        if y[k] == 0.0 and k > 0:
            return float(z[k].real)
        if y[k] * y[k + 1] < 0 or (y[k + 1] == 0.0 and y[k] != 0.0):
            t = y[k] / (y[k] - y[k + 1])
            return float(z[k].real + t * (z[k + 1].real - z[k].real))
    raise GeometryError("arc does not cross the real axis")


def _specials(param: CurveParam, bp: BranchPointSet):
    named = {"a1": bp.a1, "b1": bp.b1, "a2": bp.a2, "b2": bp.b2}
    branch = {k: True for k in named}
    if bp.b_star is not None and not bp.degenerate_merge:
        named["b*"] = bp.b_star
        branch["b*"] = False
    return special_points(param, named, branch)


def _segments_hit(p0: complex, p1: complex, poly: np.ndarray) -> np.ndarray:
    """Parameters ``t`` in ``[0, 1)`` where segment ``p0 p1`` meets a polyline."""
    if len(poly) < 2:
        return np.empty(0)
    a = poly[:-1]
    b = poly[1:]
    d = p1 - p0
    e = b - a
    den = (d.real * e.imag - d.imag * e.real)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = a - p0
        t = (w.real * e.imag - w.imag * e.real) / den
        s = (w.real * d.imag - w.imag * d.real) / den
    ok = (den != 0) & (t >= 0) & (t < 1) & (s >= 0) & (s < 1)
    return np.sort(t[ok])


@dataclass
class CutSystem:
    """Cut geometry, regime and a labeling planner for one parameter value."""

    param: CurveParam
    bp: BranchPointSet
    a_star: float
    regime: Regime
    delta2_upper: np.ndarray  # polyline from b2 to a_star
    snap: float = 1e-9
    r_big: float = field(init=False)

    def __post_init__(self):
        pts = [abs(v) for v in self.bp.points().values() if v is not None]
        self.r_big = 10.0 * (1.0 + max(pts))
        up = np.asarray(self.delta2_upper, dtype=complex)
        self.delta2_upper = up
        self._box = (up.real.min(), up.real.max(), min(0.0, up.imag.min()), up.imag.max())

    @classmethod
    def build(cls, param: CurveParam, cfg: TraceConfig = TraceConfig(),
              refine: bool = True) -> "CutSystem":
        """Trace ``D2``, locate ``a_star`` and classify the regime.

        With ``refine`` the crossing point is sharpened by the vanishing real
        part of the segment integral, bracketed around the traced crossing.
        """
        bp = branch_points(param)
        arc = trace_delta2(param, bp, cfg)
        x0 = find_a_star_from_trajectory(param, arc)
        a_star = x0
        if refine:
            try:
                a_star = _refine_a_star(param, bp, arc, x0)
            except (GeometryError, ValueError):
                a_star = x0
        arc = arc.copy()
        arc[-1] = complex(a_star, 0.0)
        regime = Regime.SUPERCRITICAL if a_star > bp.a1.real else Regime.PRECRITICAL
        return cls(param, bp, a_star, regime, arc)

    # -- geometry -----------------------------------------------------------
    @property
    def delta1(self) -> tuple[float, float]:
        lo = self.a_star if self.regime is Regime.SUPERCRITICAL else self.bp.a1.real
        return (lo, self.bp.b1.real)

    @property
    def delta3(self) -> Optional[tuple[float, float]]:
        if self.regime is Regime.SUPERCRITICAL:
            return (self.bp.a1.real, self.a_star)
        return None

    @cached_property
    def delta2(self) -> np.ndarray:
        """Full arc from ``a2`` through ``a_star`` to ``b2``."""
        up = self.delta2_upper[::-1]
        return np.concatenate([np.conj(self.delta2_upper), up[1:]])

    def real_cut(self, x: float) -> Optional[str]:
        lo, hi = self.delta1
        if lo <= x <= hi:
            return "D1"
        d3 = self.delta3
        if d3 is not None and d3[0] <= x <= d3[1]:
            return "D3"
        return None

    def delta2_hits(self, z0: complex, z1: complex) -> np.ndarray:
        """Parameters along ``z0 z1`` where the segment crosses ``D2``."""
        xmin, xmax, _, ymax = self._box
        if (max(z0.real, z1.real) < xmin or min(z0.real, z1.real) > xmax
                or (z0.imag * z1.imag > 0 and min(abs(z0.imag), abs(z1.imag)) > ymax)):
            return np.empty(0)
        t_up = _segments_hit(z0, z1, self.delta2_upper)
        t_lo = _segments_hit(z0, z1, np.conj(self.delta2_upper))
        return np.sort(np.concatenate([t_up, t_lo]))

    def cross_if_bordered(self, sheet: int, cut: str) -> int:
        a, b = _CUT_SHEETS[cut]
        if sheet == a:
            return b
        if sheet == b:
            return a
        return sheet

    def on_cut(self, z: complex) -> Optional[str]:
        """Name of the cut containing ``z`` within the snap tolerance."""
        scale = self.snap * max(1.0, abs(z))
        if abs(z.imag) <= scale:
            c = self.real_cut(z.real)
            if c is not None:
                return c
        w = complex(z.real, abs(z.imag))
        poly = self.delta2_upper
        a, b = poly[:-1], poly[1:]
        e = b - a
        t = np.clip(((w - a) * np.conj(e)).real / np.maximum(np.abs(e) ** 2, 1e-300), 0, 1)
        if np.min(np.abs(a + t * e - w)) <= scale:
            return "D2"
        return None

    def _delta2_normal(self, z: complex) -> complex:
        """Unit normal to the left of ``D2`` oriented from ``a2`` to ``b2``."""
        w = complex(z.real, abs(z.imag))
        poly = self.delta2_upper
        k = int(np.argmin(np.abs(poly - w)))
        k = min(max(k, 1), len(poly) - 1)
        tang = poly[k - 1] - poly[k]  # upper arc stored from b2 downward
        tang /= abs(tang)
        if z.imag < 0:
            tang = -np.conj(tang)
        return 1j * tang

    # -- labeling -----------------------------------------------------------
    def _anchor(self) -> np.ndarray:
        x = self.r_big
        r = np.sort(np.real(self.param.roots(complex(x))))
        # xi_2 < xi_3 < xi_1 to the right of every branch point
        return np.array([r[2], r[0], r[1]], dtype=complex)

    def _path_upper(self, z: complex) -> np.ndarray:
        """Cut-free path from the anchor to ``z`` in the closed upper half plane."""
        rb = self.r_big
        for phi in (np.pi / 2, np.pi / 3, 2 * np.pi / 3, np.pi / 6, 5 * np.pi / 6,
                    np.pi / 12, 11 * np.pi / 12, 5 * np.pi / 12, 7 * np.pi / 12):
            w = rb * cmath.exp(1j * phi)
            hits = _segments_hit(w, z, self.delta2_upper)
            if hits.size == 0:
                arc = rb * np.exp(1j * np.linspace(0.0, phi, 33))
                seg = w + (z - w) * np.linspace(0.0, 1.0, 65)[1:]
                return np.concatenate([arc, seg])
        raise GeometryError(f"no cut-free path to {z!r}")

    def labeled_roots(self, z: complex, side: Side = Side.INTERIOR) -> np.ndarray:
        """Labeled triple ``(xi_1, xi_2, xi_3)`` at ``z``.

        On a cut ``side`` selects the boundary value: on the real cuts
        ``plus`` is the limit from the upper half plane; on ``D2`` it is the
        limit from the left of the orientation ``a2 -> b2``.
        """
        z = complex(z)
        cut = self.on_cut(z) if side is not Side.INTERIOR else None
        if side is not Side.INTERIOR and cut is None:
            raise DomainError(f"{z!r} is not on a cut; side must be interior")
        if cut == "D2":
            n = self._delta2_normal(z)
            delta = 1e-7 * max(1.0, abs(z))
            zz = z + (delta if side is Side.PLUS else -delta) * n
            lab = self.labeled_roots(zz)
            return match_roots(lab, self.param.roots(z))
        if cut in ("D1", "D3"):
            x = complex(z.real, 0.0)
            up = self._upper(x)
            return up if side is Side.PLUS else np.conj(up)
        if z.imag < 0:
            return np.conj(self._upper(z.conjugate()))
        return self._upper(z)

    def _upper(self, z: complex) -> np.ndarray:
        path = self._path_upper(z)
        out = continue_roots(self.param, path, self._anchor(), terminal=True)
        return out[-1]

    def labeled_roots_many(self, z: np.ndarray) -> np.ndarray:
        """Labels along a fine, cut-free polyline by continuation from its first point."""
        z = np.asarray(z, dtype=complex)
        start = self.labeled_roots(complex(z[0]))
        return match_along(self.param.roots(z), start)

    def xi_on_sheet(self, p: SheetPoint) -> complex:
        for name, bz in self.bp.points().items():
            if bz is not None and abs(p.z - bz) < 1e-9:
                raise DomainError(f"{p.z!r} is the branch point {name}")
        return complex(self.labeled_roots(p.z, p.side)[p.sheet - 1])

    def sheet_of(self, z: complex, xi: complex) -> int:
        lab = self.labeled_roots(z, Side.PLUS if self.on_cut(z) else Side.INTERIOR)
        return int(np.argmin(np.abs(lab - xi))) + 1

    def as_record(self) -> dict:
        return {
            "tau": self.param.tau,
            "regime": self.regime.value,
            "a_star": self.a_star,
            "delta1": list(self.delta1),
            "delta3": list(self.delta3) if self.delta3 else None,
            "delta2": [[float(w.real), float(w.imag)] for w in self.delta2],
            "delta2_plus_side": "left of orientation a2 -> b2",
        }


def xi_on_sheet(param: CurveParam, p: SheetPoint, cuts: CutSystem) -> complex:
    """Value of the branch ``xi_sheet`` at ``p``."""
    if cuts.param.tau != param.tau:
        raise DomainError("cut system belongs to another parameter")
    return cuts.xi_on_sheet(p)


# -- segment integral from b2 ---------------------------------------------------

def _gl_cos(m: int):
    u, w = roots_legendre(m)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    s = 0.5 * (1.0 - np.cos(np.pi * u))
    ds = 0.5 * np.pi * np.sin(np.pi * u) * w
    return s, ds


def pair_integral_from_b2(param: CurveParam, x: float, bp: Optional[BranchPointSet] = None,
                          m: int = 400) -> complex:
    """Integral along the segment ``b2 -> x`` of the difference of the roots
    that coincide at ``b2``.

    The two roots are followed continuously along the segment.  Near ``b2``
    the difference behaves like ``k sqrt(z - b2)``; the sign is fixed by the
    principal square root of ``k`` and of ``x - b2``, which keeps the value
    continuous in ``x`` as long as ``x - b2`` stays off the negative axis.
    """
    bp = bp or branch_points(param)
    b2 = bp.b2
    s, ds = _gl_cos(m)
    path = b2 + (x - b2) * s
    lab = match_along(param.roots(path))
    first = lab[0]
    d = [(abs(first[i] - first[j]), i, j) for i, j in ((0, 1), (0, 2), (1, 2))]
    _, i, j = min(d)
    f = lab[:, i] - lab[:, j]
    h = path[0] - b2
    k = cmath.sqrt(f[0] ** 2 / h)
    if (f[0] / (k * cmath.sqrt(h))).real < 0:
        f = -f
    return complex(np.sum(f * ds) * (x - b2))


def _refine_a_star(param: CurveParam, bp: BranchPointSet, arc: np.ndarray,
                   x0: float, width: float = 5e-3) -> float:
    def g(x):
        return pair_integral_from_b2(param, x, bp).real
    lo, hi = x0 - width, x0 + width
    if bp.a1.real > x0 - width and bp.a1.real < x0:
        lo = bp.a1.real + 1e-9
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise GeometryError("no sign change near the traced crossing")
    return brentq(g, lo, hi, xtol=1e-13, rtol=1e-14)


def find_a_star_supercritical(param: CurveParam) -> float:
    """Zero in ``(a1, b1)`` of the real part of the segment integral from ``b2``.

    Raises
    ------
    TopologyError
        If there is no sign change on ``(a1, b1)``, i.e. the parameter is
        not in the supercritical regime.
    """
    bp = branch_points(param)
    a1, b1 = bp.a1.real, bp.b1.real

    def g(x):
        return pair_integral_from_b2(param, x, bp).real
    eps = 1e-9 * (b1 - a1)
    xs = np.linspace(a1 + eps, b1 - eps, 41)
    vals = np.array([g(x) for x in xs])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size == 0:
        raise TopologyError(f"no supercritical crossing on (a1, b1) for tau={param.tau}")
    k = idx[0]
    return brentq(g, xs[k], xs[k + 1], xtol=1e-13, rtol=1e-14)
