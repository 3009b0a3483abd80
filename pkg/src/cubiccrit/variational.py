"""Energy, variations and equilibrium checks for vector critical measures."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .curve import CurveParam
from .errors import DomainError
from .measures import MeasureComponent, VectorMeasure
from .sheets import CutSystem, Regime

_A_FRAC = ((Fraction(1), Fraction(1, 2), Fraction(1, 2)),
           (Fraction(1, 2), Fraction(1), Fraction(-1, 2)),
           (Fraction(1, 2), Fraction(-1, 2), Fraction(1)))
_B_INT = ((1, 1, 0), (-1, 0, -1), (0, -1, 1))
_b_INT = (1, -1, -1)


@dataclass(frozen=True)
class InteractionStructure:
    """Interaction matrix ``A`` with its factorization ``2A = B^T B = 3I - b b^T``."""

    A: np.ndarray = field(default_factory=lambda: np.array(_A_FRAC, dtype=float))
    B: np.ndarray = field(default_factory=lambda: np.array(_B_INT, dtype=float))
    b: np.ndarray = field(default_factory=lambda: np.array(_b_INT, dtype=float))

    @staticmethod
    def exact_identities() -> dict[str, bool]:
        """Check the identities in rational arithmetic."""
        A2 = [[2 * a for a in row] for row in _A_FRAC]
        BtB = [[sum(_B_INT[k][i] * _B_INT[k][j] for k in range(3)) for j in range(3)]
               for i in range(3)]
        I3bb = [[(3 if i == j else 0) - _b_INT[i] * _b_INT[j] for j in range(3)] for i in range(3)]
        Ab = [sum(_A_FRAC[i][k] * _b_INT[k] for k in range(3)) for i in range(3)]
        # (1, 1, 0) and (1, 0, 1) span the plane v1 - v2 - v3 = 0
        eig = all(
            [sum(_A_FRAC[i][k] * v[k] for k in range(3)) for i in range(3)]
            == [Fraction(3, 2) * x for x in v]
            for v in ((1, 1, 0), (1, 0, 1))
        )
        return {
            "2A == B^T B": A2 == BtB,
            "B^T B == 3I - b b^T": BtB == I3bb,
            "A b == 0": all(x == 0 for x in Ab),
            "eigenvalue 3/2 on v1 - v2 - v3 = 0": eig,
        }


STRUCTURE = InteractionStructure()


@dataclass(frozen=True)
class ExternalField:
    """Polynomial fields ``Phi_1, Phi_2, Phi_3``; coefficients in increasing degree."""

    Phi1: tuple[complex, ...]
    Phi2: tuple[complex, ...]
    Phi3: tuple[complex, ...]
    check: bool = True

    def __post_init__(self):
        if self.check and not self.compatible():
            raise DomainError("fields violate Phi1' - Phi2' = Phi3'")

    @classmethod
    def from_V(cls, V1, V2, V3) -> "ExternalField":
        """Fields ``(V1 - V2, V1 - V3, V3 - V2)`` from potentials with ``sum V_j' = 0``."""
        dsum = P.polyder(P.polyadd(P.polyadd(V1, V2), V3))
        if np.any(np.abs(dsum) > 1e-12):
            raise DomainError("V1' + V2' + V3' must vanish")
        return cls(tuple(P.polysub(V1, V2)), tuple(P.polysub(V1, V3)), tuple(P.polysub(V3, V2)))

    @classmethod
    def cubic(cls) -> "ExternalField":
        return cls((0, 0, 0, 1), (0, 0, 0, 1), (0,))

    @classmethod
    def zero(cls) -> "ExternalField":
        return cls((0,), (0,), (0,))

    @property
    def polys(self) -> list[np.ndarray]:
        return [np.asarray(p, dtype=complex) for p in (self.Phi1, self.Phi2, self.Phi3)]

    @property
    def derivatives(self) -> list[np.ndarray]:
        return [P.polyder(p) if p.size > 1 else np.zeros(1, dtype=complex) for p in self.polys]

    def compatible(self, tol: float = 1e-12) -> bool:
        d1, d2, d3 = self.derivatives
        r = P.polysub(P.polysub(d1, d2), d3)
        return bool(np.all(np.abs(r) <= tol))

    def phi(self, z) -> np.ndarray:
        """Real fields ``phi_j = Re Phi_j`` stacked along axis 0."""
        z = np.asarray(z, dtype=complex)
        return np.stack([P.polyval(z, p).real for p in self.polys])

    def dPhi(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.stack([P.polyval(z, d) for d in self.derivatives])


# -- discrete measures --------------------------------------------------------

@dataclass(frozen=True)
class DiscreteMeasure:
    """Point masses, optionally each spread over a cell of given length.

    With ``cells`` the self-interaction of every point uses the energy of a
    uniform distribution on a segment of that length.
    """

    points: np.ndarray
    weights: np.ndarray
    cells: Optional[np.ndarray] = None

    @classmethod
    def from_component(cls, comp: MeasureComponent) -> "DiscreteMeasure":
        z, w = comp.quadrature()
        cells = np.concatenate([a.quad_weights for a in comp.arcs]) if comp.arcs else np.zeros(0)
        return cls(z, w, cells)

    @classmethod
    def empty(cls) -> "DiscreteMeasure":
        return cls(np.zeros(0, dtype=complex), np.zeros(0), np.zeros(0))

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def _as_discrete(mu) -> list[DiscreteMeasure]:
    if isinstance(mu, VectorMeasure):
        return [DiscreteMeasure.from_component(c) for c in mu.components]
    return [m if isinstance(m, DiscreteMeasure) else DiscreteMeasure.from_component(m) for m in mu]


def log_energy(mu: DiscreteMeasure, nu: DiscreteMeasure, same: bool = False,
               chunk: int = 2048) -> float:
    """``I(mu, nu) = sum_ij w_i v_j log(1/|x_i - y_j|)``.

    For ``same`` the diagonal is replaced by the segment self-energy
    ``w_i**2 (3/2 - log h_i)`` when cells are known and dropped otherwise.
    Coincident points off the diagonal raise ``DomainError``.
    """
    if mu.points.size == 0 or nu.points.size == 0:
        return 0.0
    tot = 0.0
    for lo in range(0, mu.points.size, chunk):
        x = mu.points[lo:lo + chunk, None]
        d = np.abs(x - nu.points[None, :])
        if same:
            idx = np.arange(lo, min(lo + chunk, mu.points.size))
            d[idx - lo, idx] = 1.0
        if np.any(d == 0.0):
            raise DomainError("coincident charges give infinite energy")
        tot += float(np.sum(mu.weights[lo:lo + chunk, None] * nu.weights[None, :] * -np.log(d)))
    if same and mu.cells is not None and mu.cells.size:
        h = mu.cells
        ok = h > 0
        tot += float(np.sum(mu.weights[ok] ** 2 * (1.5 - np.log(h[ok]))))
    return tot


def energy(vec_mu, field: ExternalField, A: Optional[np.ndarray] = None,
           method: str = "auto") -> float:
    """Total energy ``sum a_jk I(mu_j, mu_k) + sum int phi_j d mu_j``.

    ``method="potential"`` integrates the exact piecewise-linear potentials
    against each component (sampled measures only); ``"pairs"`` uses the
    double sum of :func:`log_energy`.  ``"auto"`` picks the former for a
    :class:`VectorMeasure`.
    """
    A = STRUCTURE.A if A is None else np.asarray(A, dtype=float)
    if method == "auto":
        method = "potential" if isinstance(vec_mu, VectorMeasure) else "pairs"
    ms = _as_discrete(vec_mu)
    tot = 0.0
    if method == "potential":
        if not isinstance(vec_mu, VectorMeasure):
            raise DomainError("potential method needs sampled densities")
        for j in range(3):
            if ms[j].points.size:
                U = vec_mu.potentials(ms[j].points)
                tot += float(np.sum(ms[j].weights * (A[j] @ U)))
    elif method == "pairs":
        for j in range(3):
            for k in range(j, 3):
                a = A[j, k]
                if a == 0 or ms[j].points.size == 0 or ms[k].points.size == 0:
                    continue
                e = log_energy(ms[j], ms[k], same=(j == k))
                tot += a * e if j == k else 2.0 * a * e
    else:
        raise DomainError(f"unknown method {method!r}")
    phi = [np.asarray(p, dtype=complex) for p in field.polys]
    for j in range(3):
        if ms[j].points.size:
            tot += float(np.sum(ms[j].weights * P.polyval(ms[j].points, phi[j]).real))
    return tot


# -- variations ---------------------------------------------------------------

def _moments(m: DiscreteMeasure, n: int) -> np.ndarray:
    if m.points.size == 0:
        return np.zeros(max(n, 1), dtype=complex)
    return np.array([np.sum(m.weights * m.points**k) for k in range(max(n, 1))])


def _q_poly(dphi: np.ndarray, mom: np.ndarray) -> np.ndarray:
    """Coefficients of ``Q(z) = -int (Phi'(x) - Phi'(z)) / (x - z) d mu(x)``."""
    deg = dphi.size - 1
    out = np.zeros(max(deg, 1), dtype=complex)
    # (x^k - z^k)/(x - z) = sum_{m<k} x^m z^(k-1-m)
    for k in range(1, deg + 1):
        for m in range(k):
            out[k - 1 - m] -= dphi[k] * mom[m]
    return out


def q_polys(vec_mu, field: ExternalField) -> list[np.ndarray]:
    ms = _as_discrete(vec_mu)
    out = []
    for m, d in zip(ms, field.derivatives):
        out.append(_q_poly(d, _moments(m, d.size)))
    return out


def r_from_fields(vec_mu, field: ExternalField) -> np.ndarray:
    """Polynomial ``R`` (increasing degree) assembled from the fields and moments."""
    d = field.derivatives
    A = STRUCTURE.A
    quad = np.zeros(1, dtype=complex)
    for j in range(3):
        for k in range(3):
            if A[j, k]:
                quad = P.polyadd(quad, A[j, k] * P.polymul(d[j], d[k]))
    r = quad / 9.0
    for q in q_polys(vec_mu, field):
        r = P.polyadd(r, q)
    return P.polytrim(r, 1e-300) if np.any(r) else np.zeros(1, dtype=complex)


def _cauchy_vector(vec_mu, z: complex) -> np.ndarray:
    if isinstance(vec_mu, VectorMeasure):
        if vec_mu.distance(z) < 1e-9:
            raise DomainError(f"{z!r} lies on a support")
        return np.array([complex(c.cauchy(z, warn=False)) if not c.empty else 0j
                         for c in vec_mu.components])
    out = []
    for m in _as_discrete(vec_mu):
        if m.points.size == 0:
            out.append(0j)
            continue
        d = m.points - z
        if np.any(np.abs(d) < 1e-12):
            raise DomainError(f"{z!r} lies on a support")
        out.append(complex(np.sum(m.weights / d)))
    return np.array(out)


def variation_Dhz(vec_mu, field: ExternalField, z: complex) -> complex:
    """Variation of the energy along the Cauchy-kernel field ``h_z``."""
    z = complex(z)
    C = _cauchy_vector(vec_mu, z)
    dphi = np.array([complex(v) for v in field.dPhi(z)])
    Q = sum(complex(P.polyval(z, q)) for q in q_polys(vec_mu, field))
    return complex(C @ STRUCTURE.A @ C + dphi @ C - Q)


def xi_from_measure(vec_mu, field: ExternalField, z: complex) -> np.ndarray:
    """``B (Phi'/3 + C)`` at ``z``."""
    C = _cauchy_vector(vec_mu, z)
    return STRUCTURE.B @ (np.array([complex(v) for v in field.dPhi(complex(z))]) / 3.0 + C)


# -- equilibrium conditions ---------------------------------------------------

@dataclass
class EquilibriumReport:
    tau: float
    regime: str
    l1: float
    l2: float
    l3: float
    l3_tilde: Optional[float]
    l3_defect: Optional[float]
    l3_tilde_margin: Optional[float]
    max_equality_deviation: dict = field(default_factory=dict)
    min_inequality_margin: dict = field(default_factory=dict)
    s_property_defects: dict = field(default_factory=dict)
    tol: float = 1e-4

    @property
    def failures(self) -> list[str]:
        out = [f"equality on {k}: {v:.3e}" for k, v in self.max_equality_deviation.items()
               if not v < self.tol]
        out += [f"inequality on {k}: {v:.3e}" for k, v in self.min_inequality_margin.items()
                if not v > 0]
        if self.l3_defect is not None and not self.l3_defect < self.tol:
            out.append(f"l3 defect {self.l3_defect:.3e}")
        if self.l3_tilde_margin is not None and not self.l3_tilde_margin > 0:
            out.append(f"l3 tilde margin {self.l3_tilde_margin:.3e}")
        out += [f"S-property on {k}: {v:.3e}" for k, v in self.s_property_defects.items()
                if not v < 1e-3]
        return out

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "tol"}
        d["ok"] = self.ok
        d["failures"] = self.failures
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _trimmed_mean(v: np.ndarray, keep: float = 0.8) -> float:
    n = v.size
    cut = int(round(0.5 * (1.0 - keep) * n))
    return float(np.mean(v[cut:n - cut] if n - 2 * cut > 0 else v))


def _total_potentials(mu: VectorMeasure, z: np.ndarray) -> np.ndarray:
    """Rows ``2U1+U2+U3+phi``, ``2U2+U1-U3+phi``, ``2U3+U1-U2`` with ``phi = Re z^3``."""
    U = mu.potentials(z)
    phi = (np.asarray(z, dtype=complex) ** 3).real
    return np.stack([2 * U[0] + U[1] + U[2] + phi,
                     2 * U[1] + U[0] - U[2] + phi,
                     2 * U[2] + U[0] - U[1]])


def _interior(arc, stride: int) -> np.ndarray:
    return arc.nodes[::stride]


def verify_equilibrium(param: CurveParam, cuts: CutSystem, vec_mu: VectorMeasure,
                       grid: int = 40, stride: int = 8, gamma2=None,
                       s_points: int = 3, tol: float = 1e-4) -> EquilibriumReport:
    """Check the equalities and inequalities satisfied by the total potentials.

    Parameters
    ----------
    grid : number of test points on each complementary contour
    stride : subsampling of support nodes used for the equality checks
    gamma2 : polylines continuing ``D2`` to infinity; traced when omitted
    s_points : number of S-property test points per support
    """
    sup = cuts.regime is Regime.SUPERCRITICAL
    eq: dict[str, float] = {}
    ineq: dict[str, float] = {}
    x1 = np.concatenate([_interior(a, stride) for a in vec_mu[1].arcs])
    F1 = _total_potentials(vec_mu, x1)[0]
    l1 = _trimmed_mean(F1)
    eq["delta1"] = float(np.max(np.abs(F1 - l1)))
    z2 = np.concatenate([_interior(a, stride) for a in vec_mu[2].arcs])
    F2 = _total_potentials(vec_mu, z2)[1]
    l2 = _trimmed_mean(np.sort(F2))
    eq["delta2"] = float(np.max(np.abs(F2 - l2)))
    l3 = l1 - l2
    l3_tilde = defect = margin = None
    a1, b1 = cuts.bp.a1.real, cuts.bp.b1.real
    if sup:
        x3 = np.concatenate([_interior(a, stride) for a in vec_mu[3].arcs])
        F3 = _total_potentials(vec_mu, x3)[2]
        l3_fit = _trimmed_mean(F3)
        eq["delta3"] = float(np.max(np.abs(F3 - l3)))
        defect = abs(l3_fit - l3)
    else:
        l3_tilde = float(_total_potentials(vec_mu, np.array([complex(cuts.a_star)]))[2][0])
        margin = l3_tilde - l3

    # complementary contours
    off = np.geomspace(1e-2, 3.0, grid)
    xr = b1 + off
    m1 = _total_potentials(vec_mu, xr.astype(complex))[0] - l1
    if not sup and a1 - cuts.a_star > 2e-2:
        xs = np.linspace(cuts.a_star, a1 - 1e-2, grid)
        m1 = np.concatenate([m1, _total_potentials(vec_mu, xs.astype(complex))[0] - l1])
    ineq["gamma1"] = float(m1.min())
    left = min(cuts.a_star, a1)
    xl = (left - off).astype(complex)
    ineq["gamma3"] = float((_total_potentials(vec_mu, xl)[2] - l3).min())
    if gamma2 is None:
        from .tracer import orthogonal_extension
        g_b2, g_a2, _ = orthogonal_extension(param, cuts)
        gamma2 = [g_b2.z, g_a2.z]
    pts = []
    for poly in gamma2:
        poly = np.asarray(poly, dtype=complex)
        d = np.abs(poly - poly[0])
        sel = poly[(d > 1e-2) & (np.abs(poly) < 4.0)]
        if sel.size:
            pts.append(sel[np.linspace(0, sel.size - 1, grid).astype(int)])
    if pts:
        zz = np.concatenate(pts)
        zz = np.concatenate([zz, np.conj(zz)])
        ineq["gamma2"] = float((_total_potentials(vec_mu, zz)[1] - l2).min())

    sdef = {}
    for j, name in ((1, "delta1"), (2, "delta2"), (3, "delta3")):
        comp = vec_mu[j]
        if comp.empty:
            continue
        worst = 0.0
        for arc in comp.arcs:
            n = arc.nodes.size
            for k in np.linspace(0.3 * n, 0.7 * n, s_points).astype(int):
                rep = s_property_check(vec_mu, j, complex(arc.nodes[k]),
                                       complex(arc.nodes[k + 1] - arc.nodes[k - 1]))
                worst = max(worst, rep.defect)
        sdef[name] = worst
    return EquilibriumReport(param.tau, cuts.regime.value, l1, l2, l3, l3_tilde, defect, margin,
                             eq, ineq, sdef, tol)


@dataclass(frozen=True)
class SPropertyReport:
    z: complex
    plus: float
    minus: float
    defect: float
    delta: float


def _normal_derivative(vec_mu, row: np.ndarray, dphi: complex, z: complex, n: complex) -> float:
    C = _cauchy_vector(vec_mu, z)
    return float(((row @ C + 0.5 * dphi) * n).real)


def s_property_check(vec_mu, j: int, z: complex, tangent: complex,
                     field: ExternalField = ExternalField.cubic(),
                     delta: float = 1e-4) -> SPropertyReport:
    """Compare the two normal derivatives of ``sum_k a_jk U_k + phi_j / 2``.

    Uses ``dU/dn = Re(C n)`` evaluated at ``z +- delta n`` with one Richardson
    step in ``delta``.  The offset is halved while it would land closer to
    the support than half of ``delta``.
    """
    n = 1j * tangent / abs(tangent)
    row = STRUCTURE.A[j - 1]
    dphi = complex(field.dPhi(z)[j - 1])
    dist = vec_mu.distance if isinstance(vec_mu, VectorMeasure) else None
    while dist is not None and delta > 1e-9 and (
            dist(z + delta * n) < 0.5 * delta or dist(z - delta * n) < 0.5 * delta):
        delta *= 0.5

    def sides(d):
        p = _normal_derivative(vec_mu, row, dphi, z + d * n, n)
        m = _normal_derivative(vec_mu, row, dphi, z - d * n, -n)
        return p, m

    p1, m1 = sides(delta)
    p2, m2 = sides(0.5 * delta)
    p, m = 2 * p2 - p1, 2 * m2 - m1
    scale = abs(p) + abs(m)
    return SPropertyReport(z, p, m, abs(p - m) / scale if scale > 0 else 0.0, delta)
