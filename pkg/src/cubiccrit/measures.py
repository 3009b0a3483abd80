"""Components of the critical vector measure and the worked example measures.

Each component is stored as one or more sampled arcs.  Between consecutive
nodes the density (per unit arclength) is taken linear along the chord, and
logarithmic potentials, and Cauchy transforms near the support, are
integrated exactly for that piecewise-linear model.  Away from the support
the Cauchy transform uses the node quadrature itself.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .curve import CurveParam, PolyCurve, alpha_from_tau, continue_roots, match_along, match_roots
from .errors import DomainError, TopologyError
from .sheets import CutSystem, Regime, Side

DEFAULT_NODES = 2000
FIT_WINDOW = 30
FIT_SKIP = 3
SUPPORT_TOL = 1e-7
NEAR_SPACINGS = 10.0


class AccuracyWarning(UserWarning):
    """Evaluation point too close to a sampled support."""


# -- node placement -----------------------------------------------------------

def chebyshev_nodes(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First-kind Chebyshev points in ``(0, 1)``, complements ``1 - t`` and weights.

    The weights are the midpoint rule in the angle variable.
    """
    th = (np.arange(n) + 0.5) * np.pi / n
    return np.sin(0.5 * th) ** 2, np.cos(0.5 * th) ** 2, 0.5 * np.sin(th) * np.pi / n


def graded_nodes(n: int, grade) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Points in ``(0, 1)`` clustered like ``t**p`` at 0 and ``(1-t)**q`` at 1.

    ``grade`` is ``p`` or a pair ``(p, q)``.  Returns points, complements and
    midpoint-rule weights of the mapping.
    """
    p, q = (grade, grade) if np.isscalar(grade) else grade
    t = (np.arange(n) + 0.5) / n
    a, b = t**p, (1.0 - t) ** q
    jac = (p * t ** (p - 1) * b + q * a * (1.0 - t) ** (q - 1)) / (a + b) ** 2
    return a / (a + b), b / (a + b), jac / n


def unit_nodes(n: int, grade):
    return chebyshev_nodes(n) if grade is None else graded_nodes(n, grade)


def place(lo: float, hi: float, n: int, grade) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on ``[lo, hi]`` and quadrature weights.

    Nodes are measured from the nearer endpoint to keep relative accuracy.
    """
    g, gc, wq = unit_nodes(n, grade)
    L = hi - lo
    return np.where(g <= 0.5, lo + L * g, hi - L * gc), L * wq


# -- sampled measures ---------------------------------------------------------

@dataclass(frozen=True)
class SupportArc:
    """Density samples along one analytic arc.

    Attributes
    ----------
    nodes : complex nodes ordered from ``start`` to ``end``
    density : real density per unit arclength
    residual : imaginary part discarded when forming ``density``
    start, end : endpoint locations
    weights : arclength quadrature weights of the nodes; the chord trapezoid
        rule is used when absent
    """

    nodes: np.ndarray
    density: np.ndarray
    residual: np.ndarray
    start: complex
    end: complex
    start_name: str = ""
    end_name: str = ""
    weights: Optional[np.ndarray] = None

    @property
    def arc_position(self) -> np.ndarray:
        steps = np.abs(np.diff(self.nodes))
        return np.concatenate([[abs(self.nodes[0] - self.start)],
                               abs(self.nodes[0] - self.start) + np.cumsum(steps)])

    @property
    def quad_weights(self) -> np.ndarray:
        if self.weights is not None:
            return self.weights
        h = np.abs(np.diff(self.nodes))
        w = np.zeros(self.nodes.size)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w

    @property
    def mass(self) -> float:
        return float(np.sum(self.density * self.quad_weights))

    def endpoint_slopes(self) -> dict[str, float]:
        out = {}
        if self.start_name:
            out[self.start_name] = fit_exponent(self.nodes, self.density, self.start)
        if self.end_name:
            out[self.end_name] = fit_exponent(self.nodes[::-1], self.density[::-1], self.end)
        return out


def fit_exponent(nodes: np.ndarray, density: np.ndarray, endpoint: complex,
                 window: int = FIT_WINDOW, skip: int = FIT_SKIP) -> float:
    """Least-squares slope of ``log density`` against ``log distance``.

    ``nodes`` must be ordered starting at ``endpoint``.  A density vanishing
    like a square root gives ``0.5``; a blow-up like ``|s - p|**-nu`` gives
    ``-nu``.
    """
    d = np.abs(nodes[skip:skip + window] - endpoint)
    w = np.abs(density[skip:skip + window])
    ok = (d > 0) & (w > 0)
    if ok.sum() < 3:
        return float("nan")
    slope, _ = np.polyfit(np.log(d[ok]), np.log(w[ok]), 1)
    return float(slope)


# series below |u| = 0.02 (truncation < 1e-18); closed forms lose at most eps/|u|**2
_SERIES_U = 0.02
_SERIES_K = np.arange(1, 12)


def _panel_frame(arc: SupportArc, z: np.ndarray):
    """Per panel and point: length, base density, slope, ``v0`` and ``u``.

    The base endpoint is the one farther from ``z``; ``t`` runs from the base
    (``t = 0``) to the other endpoint and ``u = (s_other - s_base) / v0`` with
    ``v0 = s_base - z``, so ``|u| <= 2`` and ``1 + t u`` vanishes only when
    ``z`` lies on the panel.
    """
    sa, sb = arc.nodes[:-1], arc.nodes[1:]
    wa, wb = arc.density[:-1], arc.density[1:]
    length = np.abs(sb - sa)
    va, vb = sa - z, sb - z
    flip = np.abs(vb) > np.abs(va)
    v0 = np.where(flip, vb, va)
    w0 = np.where(flip, wb, wa)
    w1 = np.where(flip, wa, wb)
    u = np.where(flip, sa - sb, sb - sa) / v0
    return length, w0, w1 - w0, v0, u


def _series(u: np.ndarray, denom: np.ndarray, sign_start: int) -> np.ndarray:
    """``sum_k (-1)**(k + sign_start) u**k / denom_k`` for small ``u``."""
    out = np.zeros(u.shape, dtype=complex)
    for k, d in zip(_SERIES_K[::-1], denom[::-1]):
        out = out * u + ((-1.0) ** (k + sign_start)) / d
    return out * u


def _cauchy_kernels(u: np.ndarray):
    """``K0 = int dt/(1+tu)`` and ``K1 = int t dt/(1+tu)`` over ``[0, 1]``."""
    small = np.abs(u) < _SERIES_U
    K0 = np.empty(u.shape, dtype=complex)
    K1 = np.empty(u.shape, dtype=complex)
    us = u[small]
    k = _SERIES_K
    # K0 = sum_{k>=0} (-u)^k/(k+1), K1 = sum_{k>=0} (-u)^k/(k+2)
    K0[small] = 1.0 + _series(us, k + 1.0, 0)
    K1[small] = 0.5 + _series(us, k + 2.0, 0)
    ub = u[~small]
    lg = np.log(1.0 + ub)
    K0[~small] = lg / ub
    K1[~small] = (1.0 - K0[~small]) / ub
    return K0, K1


def _log_kernels(u: np.ndarray):
    """Real parts of ``int log(1+tu) dt`` and ``int t log(1+tu) dt`` over ``[0, 1]``."""
    small = np.abs(u) < _SERIES_U
    I0 = np.empty(u.shape)
    I1 = np.empty(u.shape)
    us = u[small]
    k = _SERIES_K
    I0[small] = _series(us, k * (k + 1.0), 1).real
    I1[small] = _series(us, k * (k + 2.0), 1).real
    ub = u[~small]
    p = 1.0 + ub
    with np.errstate(divide="ignore", invalid="ignore"):
        plog = np.where(p == 0, 0.0, p * np.log(np.where(p == 0, 1.0, p)))
    I0[~small] = ((plog - ub) / ub).real
    I1[~small] = ((plog * (0.5 * p - 1.0) - 0.25 * p * p + p - 0.75) / (ub * ub)).real
    return I0, I1


@dataclass(frozen=True)
class MeasureComponent:
    """One component ``mu_j`` of the vector measure."""

    index: int
    arcs: tuple[SupportArc, ...] = ()
    label: str = ""

    @property
    def empty(self) -> bool:
        return len(self.arcs) == 0

    @property
    def mass(self) -> float:
        return float(sum(a.mass for a in self.arcs))

    @property
    def support(self) -> list[np.ndarray]:
        return [np.concatenate([[a.start], a.nodes, [a.end]]) for a in self.arcs]

    @property
    def density_samples(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(a.arc_position, a.density) for a in self.arcs]

    @property
    def endpoint_exponents(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for a in self.arcs:
            out.update(a.endpoint_slopes())
        return out

    @property
    def min_density(self) -> float:
        if self.empty:
            return 0.0
        return float(min(a.density.min() for a in self.arcs))

    @property
    def max_residual(self) -> float:
        if self.empty:
            return 0.0
        return float(max(np.abs(a.residual).max() for a in self.arcs))

    def cauchy(self, z, warn: bool = True):
        """Cauchy transform ``int d mu(s) / (s - z)``.

        Points farther than ``NEAR_SPACINGS`` node spacings from an arc use
        the node quadrature directly (spectrally accurate for the graded
        nodes); closer points use the exact piecewise-linear panel integrals.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        out = np.zeros(flat.shape, dtype=complex)
        for arc in self.arcs:
            if warn:
                _proximity_warning(arc, flat)
            w = arc.density * arc.quad_weights
            reach = NEAR_SPACINGS * float(np.abs(np.diff(arc.nodes)).max())
            for lo in range(0, flat.size, 256):
                zz = flat[lo:lo + 256, None]
                d = arc.nodes[None, :] - zz
                near = np.abs(d).min(axis=1) < reach
                val = np.sum(w / d, axis=1)
                if np.any(near):
                    length, w0, dw, v0, u = _panel_frame(arc, zz[near])
                    K0, K1 = _cauchy_kernels(u)
                    val[near] = np.sum(length / v0 * (w0 * K0 + dw * K1), axis=1)
                out[lo:lo + 256] += val
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    def potential(self, z):
        """Logarithmic potential ``int log(1/|s - z|) d mu(s)``."""
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        out = np.zeros(flat.shape)
        for arc in self.arcs:
            for lo in range(0, flat.size, 256):
                zz = flat[lo:lo + 256, None]
                length, w0, dw, v0, u = _panel_frame(arc, zz)
                I0, I1 = _log_kernels(u)
                mean = w0 + 0.5 * dw
                val = mean * np.log(np.abs(v0)) + w0 * I0 + dw * I1
                out[lo:lo + 256] -= np.sum(length * val, axis=1)
        return out.reshape(z.shape) if z.ndim else float(out[0])

    def moment(self, k: int) -> complex:
        """``int s**k d mu(s)``."""
        z, w = self.quadrature()
        return complex(np.sum(w * z**k))

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and point masses representing the measure."""
        zs = [a.nodes for a in self.arcs]
        ws = [a.density * a.quad_weights for a in self.arcs]
        if not zs:
            return np.zeros(0, dtype=complex), np.zeros(0)
        return np.concatenate(zs), np.concatenate(ws)

    def contains(self, z: complex, tol: float = SUPPORT_TOL) -> bool:
        return self.distance(z) <= tol

    def distance(self, z: complex) -> float:
        best = math.inf
        for poly in self.support:
            a, b = poly[:-1], poly[1:]
            e = b - a
            t = np.clip(((z - a) * np.conj(e)).real / np.maximum(np.abs(e) ** 2, 1e-300), 0, 1)
            best = min(best, float(np.min(np.abs(a + t * e - z))))
        return best


def _proximity_warning(arc: SupportArc, z: np.ndarray) -> None:
    h = np.abs(np.diff(arc.nodes))
    for w in z:
        d = np.abs(arc.nodes - w)
        k = int(np.argmin(d))
        if d[k] < 10.0 * h[min(k, h.size - 1)]:
            warnings.warn(f"{w!r} lies within ten sample spacings of the support",
                          AccuracyWarning, stacklevel=3)
            return


# -- the family measure -------------------------------------------------------

@dataclass(frozen=True)
class VectorMeasure:
    """The triple ``(mu_1, mu_2, mu_3)`` for one parameter value."""

    tau: float
    components: tuple[MeasureComponent, MeasureComponent, MeasureComponent]
    regime: Optional[Regime] = None
    a_star: Optional[float] = None

    def __getitem__(self, j: int) -> MeasureComponent:
        return self.components[j - 1]

    def cauchy(self, z) -> np.ndarray:
        """Stack of the three Cauchy transforms, shape ``(3, ...)``."""
        return np.stack([np.asarray(c.cauchy(z)) for c in self.components])

    def potentials(self, z) -> np.ndarray:
        return np.stack([np.asarray(c.potential(z)) for c in self.components])

    def masses(self) -> tuple[float, float, float]:
        return tuple(c.mass for c in self.components)  # type: ignore[return-value]

    def distance(self, z: complex) -> float:
        ds = [c.distance(z) for c in self.components if not c.empty]
        return min(ds) if ds else math.inf


@dataclass(frozen=True)
class Supports:
    """Support geometry of the three components."""

    regime: Regime
    mu1: Optional[tuple[float, float]]
    mu2: tuple[np.ndarray, ...]
    mu3: Optional[tuple[float, float]]


def compute_supports(param: CurveParam, cuts: CutSystem) -> Supports:
    """Supports of ``mu_1, mu_2, mu_3`` read off the cut system."""
    if abs(cuts.param.tau - param.tau) > 0:
        raise TopologyError("cut system built for a different parameter")
    a1, b1 = cuts.bp.a1.real, cuts.bp.b1.real
    supercritical = cuts.a_star > a1
    if supercritical != (cuts.regime is Regime.SUPERCRITICAL):
        raise TopologyError("regime does not match the position of a_star")
    up = cuts.delta2_upper[::-1]  # a_star -> b2
    lo = np.conj(cuts.delta2_upper)  # a2 -> a_star
    mu1 = cuts.delta1 if b1 - cuts.delta1[0] > 1e-12 else None
    mu3 = cuts.delta3 if supercritical else None
    return Supports(cuts.regime, mu1, (lo, up), mu3)


def _real_arc(cuts: CutSystem, lo: float, hi: float, pair: tuple[int, int], n: int,
              names: tuple[str, str], grade: Optional[int]) -> SupportArc:
    x, wq = place(lo, hi, n, grade)
    roots = cuts.param.roots(x.astype(complex))
    k = n // 2
    mid = cuts.labeled_roots(complex(x[k]), Side.PLUS)
    lab = _label_from(roots, match_roots(mid, roots[k]), k)
    i, j = pair
    val = (lab[:, i - 1] - lab[:, j - 1]) / (2j * np.pi)
    return SupportArc(x.astype(complex), val.real, val.imag, complex(lo), complex(hi), *names,
                      weights=wq)


def _label_from(roots: np.ndarray, start: np.ndarray, k: int) -> np.ndarray:
    left = match_along(roots[k::-1], start)[::-1]
    right = match_along(roots[k:], start)
    return np.concatenate([left[:-1], right])


def _spline_arc(poly: np.ndarray, n: int, grade: Optional[int]):
    """Resample a polyline at graded arclength positions.

    Returns nodes, unit tangents, arclength weights and endpoints.
    """
    poly = np.asarray(poly, dtype=complex)
    keep = np.concatenate([[True], np.abs(np.diff(poly)) > 1e-14])
    poly = poly[keep]
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(poly)))])
    sx = CubicSpline(s, poly.real)
    sy = CubicSpline(s, poly.imag)
    t, wq = place(0.0, s[-1], n, grade)
    z = sx(t) + 1j * sy(t)
    tan = sx(t, 1) + 1j * sy(t, 1)
    speed = np.abs(tan)
    return z, tan / speed, wq * speed, poly[0], poly[-1]


def _delta2_arc(cuts: CutSystem, poly: np.ndarray, n: int, names: tuple[str, str],
                grade: Optional[int]) -> SupportArc:
    """``mu_2`` on one arc of ``D2``; ``poly`` oriented as ``a2 -> b2``."""
    z, u, wq, z0, z1 = _spline_arc(poly, n, grade)
    roots = cuts.param.roots(z)
    k = n // 2
    # plus side lies to the left of the orientation a2 -> b2
    delta = 1e-7 * max(1.0, abs(z[k]))
    side = cuts.labeled_roots(complex(z[k] + 1j * u[k] * delta))
    lab = _label_from(roots, match_roots(side, roots[k]), k)
    val = (lab[:, 0] - lab[:, 2]) * u / (2j * np.pi)
    return SupportArc(z, val.real, val.imag, complex(z0), complex(z1), *names, weights=wq)


def family_measure(param: CurveParam, cuts: Optional[CutSystem] = None, n: int = DEFAULT_NODES,
                   grade: Optional[int] = None) -> VectorMeasure:
    """Sampled critical vector measure of the cubic family.

    ``grade`` selects the node clustering: ``None`` gives Chebyshev points on
    real intervals and Chebyshev positions in arclength on ``D2``.
    """
    cuts = cuts or CutSystem.build(param)
    sup = compute_supports(param, cuts)
    supercritical = sup.regime is Regime.SUPERCRITICAL
    arcs1: tuple[SupportArc, ...] = ()
    if sup.mu1 is not None:
        lo_name = "a_star" if supercritical else "a1"
        arcs1 = (_real_arc(cuts, *sup.mu1, (1, 2), n, (lo_name, "b1"), grade),)
    arcs3: tuple[SupportArc, ...] = ()
    if sup.mu3 is not None:
        arcs3 = (_real_arc(cuts, *sup.mu3, (3, 2), n, ("a1", "a_star"), grade),)
    lo, up = sup.mu2
    if supercritical:
        arcs2 = (_delta2_arc(cuts, lo, n, ("a2", "a_star_lower"), grade),
                 _delta2_arc(cuts, up, n, ("a_star_upper", "b2"), grade))
    else:
        # the arc crosses the axis smoothly; omit the shared vertex so the
        # spline is fitted through conjugate-symmetric points only
        full = np.concatenate([lo[:-1], up[1:]])
        arcs2 = (_delta2_arc(cuts, full, 2 * n, ("a2", "b2"), grade),)
    comps = (MeasureComponent(1, arcs1, "mu1"), MeasureComponent(2, arcs2, "mu2"),
             MeasureComponent(3, arcs3, "mu3"))
    return VectorMeasure(param.tau, comps, sup.regime, cuts.a_star)


def density(param: CurveParam, cuts: CutSystem, component: int, s: complex) -> float:
    """Density of ``mu_component`` per unit arclength at an interior support point."""
    s = complex(s)
    sup = compute_supports(param, cuts)
    bp = cuts.bp
    tol = SUPPORT_TOL * max(1.0, abs(s))
    if component in (1, 3):
        iv = sup.mu1 if component == 1 else sup.mu3
        if iv is None or abs(s.imag) > tol or not (iv[0] < s.real < iv[1]):
            raise DomainError(f"{s!r} is not interior to the support of mu{component}")
        lab = cuts.labeled_roots(complex(s.real), Side.PLUS)
        i, j = (0, 1) if component == 1 else (2, 1)
        return float(((lab[i] - lab[j]) / (2j * np.pi)).real)
    if component != 2:
        raise DomainError("component must be 1, 2 or 3")
    w = complex(s.real, abs(s.imag))
    poly = cuts.delta2_upper
    a, b = poly[:-1], poly[1:]
    e = b - a
    t = np.clip(((w - a) * np.conj(e)).real / np.abs(e) ** 2, 0, 1)
    d = np.abs(a + t * e - w)
    k = int(np.argmin(d))
    near_end = min(abs(s - bp.b2), abs(s - bp.a2), abs(s - cuts.a_star))
    if d[k] > 1e-6 * max(1.0, abs(s)) or near_end < 1e-9:
        raise DomainError(f"{s!r} is not interior to the support of mu2")
    # tangent of the spline through the traced polyline, oriented a2 -> b2
    arc = np.concatenate([[0.0], np.cumsum(np.abs(e))])
    pos = arc[k] + t[k] * abs(e[k])
    tan = CubicSpline(arc, poly.real)(pos, 1) + 1j * CubicSpline(arc, poly.imag)(pos, 1)
    u = -tan / abs(tan)
    if s.imag < 0:
        u = -np.conj(u)
    delta = 1e-7 * max(1.0, abs(s))
    side = cuts.labeled_roots(s + 1j * u * delta)
    lab = match_roots(side, cuts.param.roots(s))
    return float(((lab[0] - lab[2]) * u / (2j * np.pi)).real)


@dataclass(frozen=True)
class MassReport:
    m1: float
    m2: float
    m3: float
    alpha_recovered: float
    alpha: float

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def masses(param: CurveParam, cuts: Optional[CutSystem] = None,
           measure: Optional[VectorMeasure] = None) -> MassReport:
    """Trapezoid masses of the three components."""
    mu = measure or family_measure(param, cuts)
    m1, m2, m3 = mu.masses()
    return MassReport(m1, m2, m3, m1 + m3, alpha_from_tau(param.tau))


def cauchy_transform(component: MeasureComponent, z):
    return component.cauchy(z)


def log_potential(component: MeasureComponent, z):
    return component.potential(z)


# -- worked examples ----------------------------------------------------------

SQRT27_2 = 1.5 * math.sqrt(3.0)


@dataclass(frozen=True)
class FixtureComponent:
    """Component given by ``sign * Im xi_branch(x + i0) / pi`` on ``[lo, hi]``."""

    index: int
    lo: float
    hi: float
    branch: int
    sign: float
    names: tuple[str, str]


@dataclass(frozen=True)
class Fixture:
    """Example curve with explicitly known critical measures."""

    name: str
    curve: PolyCurve
    branch_points: dict[str, float]
    asymptotics: Callable[[complex], np.ndarray]
    parts: tuple[FixtureComponent, ...]
    weights: tuple[float, float, float]
    fields: tuple[tuple[complex, ...], tuple[complex, ...], tuple[complex, ...]]
    blowup_point: Optional[float]
    expected_blowup: Optional[float]
    components: tuple[MeasureComponent, ...] = field(default=())

    def labeled_roots(self, x: np.ndarray, height: float = 20.0) -> np.ndarray:
        """Boundary values from the upper half plane, labeled at ``x + i height``."""
        x = np.asarray(x, dtype=float)
        k = x.size // 2
        z0 = complex(x[k], height)
        start = match_roots(self.asymptotics(z0), self.curve.roots(z0))
        path = x[k] + 1j * np.linspace(height, 0.0, 4001)
        mid = continue_roots(self.curve, path, start, terminal=True)[-1]
        return _label_from(self.curve.roots(x.astype(complex)), mid, k)

    def vector_measure(self) -> VectorMeasure:
        """Weighted triple ``(mu_1, mu_2, mu_3)`` with empty slots filled."""
        slots = [MeasureComponent(j, (), f"mu{j}") for j in (1, 2, 3)]
        for c in self.components:
            w = self.weights[c.index - 1]
            arcs = tuple(SupportArc(a.nodes, w * a.density, w * a.residual, a.start, a.end,
                                    a.start_name, a.end_name, a.weights) for a in c.arcs)
            slots[c.index - 1] = MeasureComponent(c.index, arcs, c.label)
        return VectorMeasure(float("nan"), tuple(slots))  # type: ignore[arg-type]

    def blowup_exponents(self) -> dict[str, float]:
        """Fitted ``nu`` with density ``~ |s - p|**-nu`` at the blow-up point."""
        out = {}
        for c in self.components:
            for a in c.arcs:
                for name, slope in a.endpoint_slopes().items():
                    if name == "0":
                        out[c.label] = -slope
        return out


def _build_fixture(fx: Fixture, n: int, grade: int) -> Fixture:
    comps = []
    for part in fx.parts:
        # strong clustering only at a blow-up end; square-root ends get grade 2
        g = (grade if part.names[0] == "0" else 2, grade if part.names[1] == "0" else 2)
        x, wq = place(part.lo, part.hi, n, g)
        lab = fx.labeled_roots(x)
        val = part.sign * (lab[:, part.branch - 1] - np.conj(lab[:, part.branch - 1])) / (2j * np.pi)
        arc = SupportArc(x.astype(complex), val.real, val.imag, complex(part.lo), complex(part.hi),
                         *part.names, weights=wq)
        comps.append(MeasureComponent(part.index, (arc,), f"mu{part.index}"))
    return Fixture(**{**fx.__dict__, "components": tuple(comps)})


def _angelesco() -> Fixture:
    curve = PolyCurve("angelesco", lambda z: np.ones_like(z), lambda z: -1.0 / z,
                      lambda z: np.zeros_like(z), lambda z: 1.0 / z**2)

    def asym(z):
        return np.array([-1.0 / z, 1.0 + 0.5 / z, -1.0 + 0.5 / z])

    parts = (FixtureComponent(1, -SQRT27_2, 0.0, 2, -1.0, ("-3sqrt3/2", "0")),
             FixtureComponent(2, 0.0, SQRT27_2, 3, -1.0, ("0", "3sqrt3/2")))
    return Fixture("Angelesco", curve, {"left": -SQRT27_2, "double": 0.0, "right": SQRT27_2},
                   asym, parts, (1.0, 1.0, 0.0), ((0, -1), (0, 1), (0, -2)), 0.0, 1.0 / 3.0)


def _nikishin() -> Fixture:
    curve = PolyCurve("nikishin", lambda z: np.full_like(z, 1.0 / 3.0),
                      lambda z: -1.0 / z**2 + 2.0 / 27.0,
                      lambda z: np.zeros_like(z), lambda z: 2.0 / z**3)

    def asym(z):
        return np.array([1.0 / 3.0 - 1.0 / z, 1.0 / 3.0 + 1.0 / z, -2.0 / 3.0])

    parts = (FixtureComponent(2, 0.0, SQRT27_2, 1, 1.0, ("0", "3sqrt3/2")),
             FixtureComponent(3, -SQRT27_2, 0.0, 2, -1.0, ("-3sqrt3/2", "0")))
    return Fixture("Nikishin", curve, {"left": -SQRT27_2, "double": 0.0, "right": SQRT27_2},
                   asym, parts, (0.0, 1.0, 1.0), ((0,), (0, 1), (0, -1)), 0.0, 2.0 / 3.0)


def _scalar_reduced() -> Fixture:
    # scalar equilibrium in the field Re z**2: semicircle on [-sqrt 2, sqrt 2]
    r2 = math.sqrt(2.0)
    curve = PolyCurve("scalar_reduced", lambda z: z**2 - 2.0, lambda z: np.zeros_like(z),
                      lambda z: 2.0 * z, lambda z: np.zeros_like(z))

    def asym(z):
        return np.array([z - 1.0 / z, 0.0, -z + 1.0 / z])

    parts = (FixtureComponent(2, -r2, r2, 1, 1.0, ("-sqrt2", "sqrt2")),)
    return Fixture("ScalarReduced", curve, {"left": -r2, "right": r2}, asym, parts,
                   (0.0, 1.0, 0.0), ((0, 0, 0.5), (0, 0, 1.0), (0, 0, -0.5)), None, None)


_FIXTURES = {"Angelesco": _angelesco, "Nikishin": _nikishin, "ScalarReduced": _scalar_reduced}


def example_fixture(name: str, n: int = DEFAULT_NODES, grade: int = 6) -> Fixture:
    """Build a named example with sampled measures.

    ``fields`` holds polynomial coefficients (constant term first) of the
    external fields ``Phi_1, Phi_2, Phi_3``; ``weights`` scales each sampled
    unit component inside the critical vector measure.
    """
    try:
        fx = _FIXTURES[name]()
    except KeyError:
        raise DomainError(f"unknown fixture {name!r}; choose from {sorted(_FIXTURES)}") from None
    return _build_fixture(fx, n, grade)


# -- output -------------------------------------------------------------------

def component_csv(comp: MeasureComponent, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("re_s,im_s,density")
    for a in comp.arcs:
        for z, w in zip(a.nodes, a.density):
            lines.append(f"{z.real:.12e},{z.imag:.12e},{w:.12e}")
    return "\n".join(lines) + "\n"


def measure_summary(mu: VectorMeasure) -> dict:
    out = {"tau": mu.tau, "regime": mu.regime.value if mu.regime else None,
           "a_star": mu.a_star, "components": []}
    for c in mu.components:
        ends = [[[a.start.real, a.start.imag], [a.end.real, a.end.imag]] for a in c.arcs]
        out["components"].append({
            "label": c.label, "mass": c.mass, "empty": c.empty,
            "endpoints": ends,
            "endpoint_exponents": {k: round(v, 10) for k, v in c.endpoint_exponents.items()},
            "min_density": c.min_density,
        })
    return out


def summary_json(mu: VectorMeasure) -> str:
    return json.dumps(measure_summary(mu), indent=2, sort_keys=True)
