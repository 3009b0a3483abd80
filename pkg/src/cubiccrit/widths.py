"""Width parameters: real parts of periods of ``Q dz`` between zeros.

All four widths are integrals along straight segments starting at the
branch point ``b2`` in the upper half plane.  The roots are computed at
equally spaced nodes, matched into continuous branches, and the branches
are named by which roots coincide at the two endpoints:

* ``A`` is the root that is single at ``b2`` (the branch of sheet 2),
* ``X`` is the root that meets ``A`` at ``a1`` and ``D`` the remaining one,
* ``Y`` is the root that meets ``A`` at the double point ``b_star``.

With these names the widths are::

    w2 = Re int (X - D)                     changes sign at tau_c
    w1 = Re int (A - D)  if w2 < 0   else   Re int (A - X)
    w3 = Re int (X - A)  if w2 < 0   else   Re int (D - A)
    w4 = Re int_{b2}^{b_star} (A - Y)       for tau >= 1/12
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .curve import (TAU_MAX, CurveParam, branch_points, coefficient_c, cubic_roots,
                    match_along)
from .errors import DomainError, QuadratureError
from .sheets import CutSystem

log = logging.getLogger(__name__)

TAU_GENUS = 1.0 / 12.0
DETOUR_TRIGGER = 1e-6
DETOUR_RADIUS = 1e-3


@dataclass(frozen=True)
class WidthReport:
    tau: float
    omega1: float
    omega2: float
    omega3: float
    omega4: Optional[float]
    m: int

    def as_row(self) -> list:
        return [self.tau, self.omega1, self.omega2, self.omega3,
                "" if self.omega4 is None else self.omega4]


@dataclass(frozen=True)
class SegmentForms:
    """The real parts of all labeled differences on the segment ``b2 -> a1``."""

    tau: np.ndarray
    ad: np.ndarray
    ax: np.ndarray
    xd: np.ndarray
    ay: np.ndarray  # along b2 -> b_star; nan below 1/12

    @property
    def omega2(self) -> np.ndarray:
        return self.xd

    @property
    def supercritical(self) -> np.ndarray:
        return self.xd > 0

    @property
    def omega1(self) -> np.ndarray:
        return np.where(self.supercritical, self.ax, self.ad)

    @property
    def omega3(self) -> np.ndarray:
        # X - A = -(A - X); D - A = -(A - D)
        return np.where(self.supercritical, -self.ad, -self.ax)

    @property
    def omega4(self) -> np.ndarray:
        return self.ay


def _roots_batch(tau: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Roots at nodes ``z`` of shape ``(T, N)`` for parameters ``tau`` of shape ``(T,)``."""
    c = np.array([coefficient_c(t) for t in tau])[:, None]
    t = np.asarray(tau, dtype=float)[:, None]
    z2 = z * z
    z3 = z2 * z
    R = 3.0 * z3 * z - 3.0 * z - c
    D = -2.0 * z3 * z3 + 3.0 * z3 + c * z2 - 3.0 * t
    return cubic_roots(-R, D)


def _nodes(z0: np.ndarray, z1: np.ndarray, m: int,
           avoid: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Equally spaced nodes on each segment, bent around nearby singular points."""
    s = np.linspace(0.0, 1.0, m + 1)
    nodes = z0[:, None] + (z1 - z0)[:, None] * s[None, :]
    for p in avoid:
        d = z1 - z0
        t = np.clip(((p - z0) * np.conj(d)).real / np.abs(d) ** 2, 0.0, 1.0)
        gap = np.abs(z0 + t * d - p)
        inner = (t > 0) & (t < 1)
        for row in np.nonzero(inner & (gap < DETOUR_TRIGGER))[0]:
            w = nodes[row] - p[row]
            near = np.abs(w) < DETOUR_RADIUS
            u = d[row] / abs(d[row])
            # project onto a semicircle on the left of the direction of travel
            along = (w[near] * np.conj(u)).real
            ang = np.arccos(np.clip(along / DETOUR_RADIUS, -1.0, 1.0))
            nodes[row, near] = p[row] + DETOUR_RADIUS * u * np.exp(1j * (np.pi - ang))
            log.info("segment bent around a singular point at tau row %d", row)
    return nodes


def _trapezoid(f: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    dz = np.diff(nodes, axis=-1)
    return np.sum(0.5 * (f[..., 1:] + f[..., :-1]) * dz, axis=-1)


def _pair(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices (i, j) of the closest pair and k of the single root, per row."""
    d01 = np.abs(xi[:, 0] - xi[:, 1])
    d02 = np.abs(xi[:, 0] - xi[:, 2])
    d12 = np.abs(xi[:, 1] - xi[:, 2])
    k = np.argmin(np.stack([d12, d02, d01], axis=1), axis=1)  # index of the single root
    i = np.where(k == 0, 1, 0)
    j = np.where(k == 2, 1, 2)
    return i, j, k


def _check_pair(xi: np.ndarray, i, j, k, where: str) -> None:
    rows = np.arange(len(xi))
    d_pair = np.abs(xi[rows, i] - xi[rows, j])
    d_sep = np.minimum(np.abs(xi[rows, i] - xi[rows, k]), np.abs(xi[rows, j] - xi[rows, k]))
    bad = d_pair > 0.1 * d_sep
    if np.any(bad):
        raise QuadratureError(f"no coincident pair at {where} (rows {np.nonzero(bad)[0].tolist()})")


def segment_forms(taus: Iterable[float], m: int = 10_000, chunk: int = 64) -> SegmentForms:
    """All labeled difference integrals for a batch of parameter values."""
    taus = np.atleast_1d(np.asarray(list(taus), dtype=float))
    if np.any((taus < 0) | (taus > TAU_MAX)):
        raise DomainError(f"tau must lie in [0, {TAU_MAX}]")
    out = {k: np.full(len(taus), np.nan) for k in ("ad", "ax", "xd", "ay")}
    for lo in range(0, len(taus), chunk):
        sl = slice(lo, lo + chunk)
        tt = taus[sl]
        bps = [branch_points(CurveParam(float(t))) for t in tt]
        b2 = np.array([b.b2 for b in bps])
        a1 = np.array([b.a1 for b in bps], dtype=complex)
        bs = np.array([b.b_star for b in bps], dtype=complex)
        b1 = np.array([b.b1 for b in bps], dtype=complex)
        nodes = _nodes(b2, a1, m, avoid=(bs, b1))
        xi = match_along(_roots_batch(tt, nodes))
        rows = np.arange(len(tt))
        i0, j0, A = _pair(xi[:, 0, :])
        _check_pair(xi[:, 0, :], i0, j0, A, "b2")
        i1, j1, Dn = _pair(xi[:, -1, :])
        _check_pair(xi[:, -1, :], i1, j1, Dn, "a1")
        if np.any((i1 != A) & (j1 != A)):
            raise QuadratureError("root single at b2 does not meet a partner at a1")
        X = np.where(i1 == A, j1, i1)
        fa = xi[rows, :, A]
        fx = xi[rows, :, X]
        fd = xi[rows, :, Dn]
        out["ad"][sl] = _trapezoid(fa - fd, nodes).real
        out["ax"][sl] = _trapezoid(fa - fx, nodes).real
        out["xd"][sl] = _trapezoid(fx - fd, nodes).real
        sel = tt >= TAU_GENUS
        if np.any(sel):
            idx = np.nonzero(sel)[0]
            nodes4 = _nodes(b2[idx], bs[idx], m, avoid=(b1[idx], a1[idx]))
            xi4 = match_along(_roots_batch(tt[idx], nodes4))
            r4 = np.arange(len(idx))
            i0, j0, A4 = _pair(xi4[:, 0, :])
            end = xi4[:, -1, :]
            i1, j1, K1 = _pair(end)
            # at tau = 1/12 all three roots meet at b_star; the partner is then
            # the one continuing the labeling from slightly larger tau
            spread = np.abs(end - end.mean(axis=1, keepdims=True)).max(axis=1)
            triple = spread < 1e-4 * np.maximum(1.0, np.abs(end).max(axis=1))
            if np.any((i1 != A4) & (j1 != A4) & ~triple):
                raise QuadratureError("root single at b2 does not meet a partner at b_star")
            Y = np.where(i1 == A4, j1, i1)
            val = _trapezoid(xi4[r4, :, A4] - xi4[r4, :, Y], nodes4).real
            for r in np.nonzero(triple)[0]:
                ref = segment_forms([tt[idx[r]] + 1e-9], m).ay[0]
                cands = [_trapezoid(xi4[r, :, A4[r]] - xi4[r, :, y], nodes4[r]).real
                         for y in range(3) if y != A4[r]]
                val[r] = min(cands, key=lambda v: abs(v - ref))
            ay = out["ay"][sl]
            ay[idx] = val
            out["ay"][sl] = ay
    return SegmentForms(taus, out["ad"], out["ax"], out["xd"], out["ay"])


def widths_batch(taus: Iterable[float], m: int = 10_000) -> list[WidthReport]:
    f = segment_forms(taus, m)
    reports = []
    for k, t in enumerate(f.tau):
        w4 = None if np.isnan(f.omega4[k]) else float(f.omega4[k])
        reports.append(WidthReport(float(t), float(f.omega1[k]), float(f.omega2[k]),
                                   float(f.omega3[k]), w4, m))
    return reports


def width_omega(param: CurveParam, k: int, m: int = 10_000) -> float:
    """Width ``omega_k`` by the composite trapezoid rule with ``m + 1`` nodes.

    Raises
    ------
    DomainError
        For ``k`` outside 1..4, or ``k = 4`` below ``tau = 1/12``.
    QuadratureError
        If the roots cannot be labeled from the endpoint coincidences.
    """
    if k not in (1, 2, 3, 4):
        raise DomainError(f"k must be 1..4, got {k}")
    if k == 4 and param.tau < TAU_GENUS:
        raise DomainError("omega4 is defined only for tau >= 1/12")
    f = segment_forms([param.tau], m)
    return float({1: f.omega1, 2: f.omega2, 3: f.omega3, 4: f.omega4}[k][0])


def width_grid(n: int, m: int = 10_000) -> list[WidthReport]:
    """Widths on ``tau_k = k / (4 (n + 1))``, ``k = 1..n``."""
    taus = [k / (4.0 * (n + 1)) for k in range(1, n + 1)]
    taus = [min(t, TAU_MAX) for t in taus]
    return widths_batch(taus, m)


def widths_csv(reports: Sequence[WidthReport], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "omega1", "omega2", "omega3", "omega4"])
    for r in reports:
        w.writerow([f"{r.tau:.10g}", f"{r.omega1:.12g}", f"{r.omega2:.12g}", f"{r.omega3:.12g}",
                    "" if r.omega4 is None else f"{r.omega4:.12g}"])
    return buf.getvalue()


@dataclass(frozen=True)
class CriticalTaus:
    tau1: float
    tau_c: float
    tau2: float

    def as_dict(self) -> dict:
        return {"tau1": self.tau1, "tau_c": self.tau_c, "tau2": self.tau2}


def critical_taus(tol: float = 1e-9, m: int = 10_000, grid: int = 512) -> CriticalTaus:
    """Zeros of ``omega1`` (two) and ``omega2`` (one) on ``(1/12, 1/4)``.

    A uniform scan locates sign changes; each is refined by Brent's method on
    the analytic form that is active there (the precritical form of
    ``omega1`` for the first zero, the supercritical form for the second).

    Raises
    ------
    QuadratureError
        If the scan does not show the expected sign changes.
    """
    if tol < 1e-9:
        raise DomainError("tol must be at least 1e-9")
    lo, hi = TAU_GENUS + 1e-4, 0.25 - 1e-4
    grid_t = np.linspace(lo, min(hi, TAU_MAX), grid)
    f = segment_forms(grid_t, m)

    def brackets(v):
        s = np.sign(v)
        return [(grid_t[k], grid_t[k + 1]) for k in np.nonzero(s[:-1] * s[1:] < 0)[0]]

    b1 = brackets(f.omega1)
    b2 = brackets(f.omega2)
    if len(b1) != 2 or len(b2) != 1:
        raise QuadratureError(
            f"scan found {len(b1)} sign changes of omega1 and {len(b2)} of omega2")

    def solve(attr, br):
        g = lambda t: float(getattr(segment_forms([t], m), attr)[0])
        return brentq(g, br[0], br[1], xtol=tol)

    return CriticalTaus(solve("ad", b1[0]), solve("xd", b2[0]), solve("ax", b1[1]))


def h_width(param: CurveParam, x: float, y: float, cut: str, m: int = 2000,
            cuts: Optional[CutSystem] = None) -> float:
    """Integral from ``x`` to ``y`` of the real part of the boundary difference on a real cut.

    On ``D1`` the integrand is ``Re xi_1+ - xi_3`` and on ``D3`` it is
    ``xi_1 - Re xi_2+``.  In both cases it is the real part of the nonreal
    pair minus the real root, up to sign, so no sheet labels are needed.
    """
    cuts = cuts or CutSystem.build(param)
    if cut == "D1":
        lo, hi = cuts.delta1
        sign = 1.0
    elif cut == "D3":
        if cuts.delta3 is None:
            raise DomainError("D3 is empty in the precritical regime")
        lo, hi = cuts.delta3
        sign = -1.0
    else:
        raise DomainError(f"cut must be D1 or D3, got {cut!r}")
    tol = 1e-12 * max(1.0, abs(hi))
    if not (lo - tol <= x <= hi + tol and lo - tol <= y <= hi + tol):
        raise DomainError(f"({x}, {y}) not inside [{lo}, {hi}]")
    if x == y:
        return 0.0
    s = np.linspace(x, y, m + 1)
    xi = param.roots(s.astype(complex))
    k = np.argmin(np.abs(xi.imag), axis=1)
    real = xi[np.arange(len(s)), k].real
    pair_re = (xi.real.sum(axis=1) - real) / 2.0
    f = sign * (pair_re - real)
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(s)))


def loop_period_real_part(param: CurveParam, sheet: int, radius: float,
                          n: int = 4096) -> float:
    """Real part of the integral of ``Q dz`` around ``|z| = radius`` on a sheet.

    ``Q`` is ``xi_2 - xi_3``, ``xi_1 - xi_3`` or ``xi_1 - xi_2`` on sheets 1, 2, 3.
    Labels are fixed at ``z = radius`` from the real ordering to the right of
    every branch point.
    """
    bp = branch_points(param)
    big = max(abs(v) for v in bp.points().values() if v is not None)
    if radius <= big:
        raise DomainError(f"radius {radius} does not enclose the branch points")
    th = np.linspace(0.0, 2 * np.pi, n + 1)
    z = radius * np.exp(1j * th)
    r0 = np.sort(param.roots(np.array([complex(radius)]))[0].real)
    start = np.array([r0[2], r0[0], r0[1]], dtype=complex)
    xi = match_along(param.roots(z), start)
    i, j = {1: (1, 2), 2: (0, 2), 3: (0, 1)}[sheet]
    f = xi[:, i] - xi[:, j]
    dz = 1j * z
    val = np.sum((f * dz)[:-1]) * (2 * np.pi / n)
    return float(val.real)
