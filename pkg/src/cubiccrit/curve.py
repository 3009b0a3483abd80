"""Spectral curve xi^3 - R(z) xi + D(z) = 0 for the cubic external field.

The family is indexed by ``tau = alpha (1 - alpha)`` in ``[0, 1/4)``.  This
module evaluates the coefficients, the discriminant and its factors, the
branch points, and the three roots with continuation-based labeling.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContinuationError, DomainError

TAU_MAX = 0.2499

_OMEGA = np.exp(2j * np.pi / 3)
_PERMS = np.array(list(itertools.permutations(range(3))))


def coefficient_c(tau: float) -> float:
    """Real coefficient ``c = -(243/64 (1 - 4 tau)^2)^(1/3)``.

    Parameters
    ----------
    tau : float
        Family parameter in ``[0, 1/4]``.

    Returns
    -------
    float
        The real (non-positive) cube root.
    """
    tau = float(tau)
    if not (0.0 <= tau <= 0.25):
        raise DomainError(f"tau={tau!r} outside [0, 1/4]")
    return -float(np.cbrt(243.0 / 64.0 * (1.0 - 4.0 * tau) ** 2))


def alpha_from_tau(tau: float) -> float:
    """Smaller root of ``alpha (1 - alpha) = tau``."""
    return 0.5 * (1.0 - math.sqrt(max(1.0 - 4.0 * tau, 0.0)))


class SpectralCurve:
    """Base class for curves ``xi^3 - R(z) xi + D(z) = 0``.

    Subclasses provide ``R``, ``D`` and their derivatives.  All methods are
    vectorized over ``z``.
    """

    def R(self, z):
        raise NotImplementedError

    def D(self, z):
        raise NotImplementedError

    def rd_scalar(self, z: complex) -> tuple[complex, complex, complex, complex]:
        """``(R, D, R', D')`` at a scalar point, in plain Python arithmetic."""
        return (complex(self.R(z)), complex(self.D(z)), complex(self.dR(z)),
                complex(self.dD(z)))

    def roots_scalar(self, z: complex) -> tuple[complex, complex, complex]:
        R, D, _, _ = self.rd_scalar(z)
        return cubic_roots_scalar(-R, D)

    def dR(self, z):
        raise NotImplementedError

    def dD(self, z):
        raise NotImplementedError

    def roots(self, z) -> np.ndarray:
        """Unlabeled roots, shape ``z.shape + (3,)``."""
        z = np.asarray(z, dtype=complex)
        return cubic_roots(-self.R(z), self.D(z))

    def residual(self, z, xi):
        z = np.asarray(z, dtype=complex)
        return xi**3 - self.R(z) * xi + self.D(z)

    def dxi(self, z, xi):
        """Derivative of a root along the curve, ``(R' xi - D') / (3 xi^2 - R)``."""
        z = np.asarray(z, dtype=complex)
        return (self.dR(z) * xi - self.dD(z)) / (3.0 * xi**2 - self.R(z))

    def q_squared(self, z, xi):
        """Squared difference of the two roots other than ``xi``."""
        return 4.0 * self.R(z) - 3.0 * xi**2


@dataclass(frozen=True)
class CurveParam(SpectralCurve):
    """Member of the cubic-field family.

    Attributes
    ----------
    tau : float
        ``alpha (1 - alpha)`` in ``[0, TAU_MAX]``.
    alpha : float
        Mass parameter in ``[0, 1/2)``.
    c : float
        Non-positive coefficient of ``R``.
    """

    tau: float
    alpha: float = field(default=float("nan"))
    c: float = field(default=float("nan"))

    def __post_init__(self):
        tau = float(self.tau)
        if not (0.0 <= tau <= TAU_MAX) or math.isnan(tau):
            raise DomainError(f"tau={tau!r} outside [0, {TAU_MAX}]")
        object.__setattr__(self, "tau", tau)
        if math.isnan(self.alpha):
            object.__setattr__(self, "alpha", alpha_from_tau(tau))
        elif abs(self.alpha * (1 - self.alpha) - tau) > 1e-12:
            raise DomainError("alpha and tau are inconsistent")
        if math.isnan(self.c):
            object.__setattr__(self, "c", coefficient_c(tau))

    @classmethod
    def from_alpha(cls, alpha: float) -> "CurveParam":
        if not (0.0 <= alpha < 0.5):
            raise DomainError(f"alpha={alpha!r} outside [0, 1/2)")
        return cls(alpha * (1.0 - alpha), alpha=alpha)

    # polynomial coefficients, highest degree first
    @property
    def R_coeffs(self) -> np.ndarray:
        return np.array([3.0, 0.0, 0.0, -3.0, -self.c])

    @property
    def D_coeffs(self) -> np.ndarray:
        return np.array([-2.0, 0.0, 0.0, 3.0, self.c, 0.0, -3.0 * self.tau])

    def R(self, z):
        z = np.asarray(z, dtype=complex)
        return 3.0 * z**4 - 3.0 * z - self.c

    def D(self, z):
        z = np.asarray(z, dtype=complex)
        z2 = z * z
        return -2.0 * z2**3 + 3.0 * z2 * z + self.c * z2 - 3.0 * self.tau

    def dR(self, z):
        z = np.asarray(z, dtype=complex)
        return 12.0 * z**3 - 3.0

    def dD(self, z):
        z = np.asarray(z, dtype=complex)
        return -12.0 * z**5 + 9.0 * z**2 + 2.0 * self.c * z

    def rd_scalar(self, z: complex) -> tuple[complex, complex, complex, complex]:
        z2 = z * z
        z3 = z2 * z
        c = self.c
        return (3.0 * z3 * z - 3.0 * z - c,
                -2.0 * z3 * z3 + 3.0 * z3 + c * z2 - 3.0 * self.tau,
                12.0 * z3 - 3.0,
                -12.0 * z3 * z2 + 9.0 * z2 + 2.0 * c * z)


def eval_R(param: CurveParam, z):
    return param.R(z)


def eval_D(param: CurveParam, z):
    return param.D(z)


def q1_coeffs(tau: float) -> np.ndarray:
    """Coefficients of the quartic factor of the discriminant."""
    s = np.cbrt(1.0 - 4.0 * tau)
    return np.array([
        256.0 / 3.0 ** (5.0 / 3.0) * s,
        128.0 / 9.0,
        16.0 / 3.0 ** (1.0 / 3.0) * s * s,
        -(3.0 ** (1.0 / 3.0)) * 32.0 * s,
        16.0 * (1.0 - 8.0 * tau),
    ])


def eval_q1(param: CurveParam, z):
    return np.polyval(q1_coeffs(param.tau), np.asarray(z, dtype=complex))


def eval_q2(param: CurveParam, z):
    s = np.cbrt(1.0 - 4.0 * param.tau)
    return 3.0 ** (1.0 / 3.0) * s * np.asarray(z, dtype=complex) - 1.0


def eval_discriminant(param: CurveParam, z):
    """Return ``(4 R^3 - 27 D^2, q1, q2)`` at ``z``."""
    R = param.R(z)
    D = param.D(z)
    return 4.0 * R**3 - 27.0 * D**2, eval_q1(param, z), eval_q2(param, z)


def b_star(tau: float) -> float:
    """Double point of the curve, the root of the linear factor ``q2``."""
    return 1.0 / float(np.cbrt(3.0 * (1.0 - 4.0 * tau)))


def p1(c: float, tau: float) -> float:
    return 64.0 * c**3 + 243.0 * (1.0 - 4.0 * tau) ** 2


def p2(c: float, tau: float) -> float:
    return c**6 - 486.0 * c**3 * tau * (1.0 + tau) + 2187.0 * tau * (3.0 * tau - 1.0) ** 3


def genus_one_c(tau: float) -> tuple[float, float]:
    """The two real roots of ``p2``, reported as data only."""
    base = 9.0 * tau + 9.0 * tau**2
    sq = math.sqrt(3.0) * (1.0 + 9.0 * tau) * math.sqrt(tau)
    return (3.0 * float(np.cbrt(base - sq)), 3.0 * float(np.cbrt(base + sq)))


@dataclass(frozen=True)
class BranchPointSet:
    """Branch points of the family curve.

    ``a1 <= b1`` are real, ``a2 = conj(b2)`` with ``Im a2 < 0``, and ``b_star``
    is the double point.
    """

    tau: float
    c: float
    a1: float
    b1: float
    a2: complex
    b2: complex
    b_star: float
    degenerate_merge: bool

    def as_record(self) -> dict:
        return {
            "tau": self.tau,
            "c": self.c,
            "a1": self.a1,
            "b1": self.b1,
            "re_b2": self.b2.real,
            "im_b2": self.b2.imag,
            "b_star": self.b_star,
        }

    def points(self) -> dict[str, complex]:
        return {"a1": complex(self.a1), "b1": complex(self.b1), "a2": self.a2,
                "b2": self.b2, "b_star": complex(self.b_star)}


def _polish_poly(coeffs: np.ndarray, r: complex, iters: int = 3) -> complex:
    d = np.polyder(coeffs)
    for _ in range(iters):
        f = np.polyval(coeffs, r)
        fp = np.polyval(d, r)
        if fp == 0:
            break
        step = f / fp
        cand = r - step
        if abs(np.polyval(coeffs, cand)) <= abs(f):
            r = cand
        else:
            break
    return complex(r)


def branch_points(param: CurveParam, merge_tol: float = 1e-8,
                  magnitude_bound: float = 1e3) -> BranchPointSet:
    """Roots of ``q1`` (companion matrix plus Newton polish) and of ``q2``.

    At ``tau = 0`` the two real roots coincide; they are then computed from the
    closed form ``3^(2/3)/4``.
    """
    tau = param.tau
    coeffs = q1_coeffs(tau)
    roots = np.roots(coeffs)
    roots = np.array([_polish_poly(coeffs, r) for r in roots])
    order = np.argsort(np.abs(roots.imag))
    real_pair = np.sort(roots[order[:2]].real)
    cplx = roots[order[2:]]
    if tau == 0.0:
        a1 = b1 = 3.0 ** (2.0 / 3.0) / 4.0
    else:
        a1, b1 = float(real_pair[0]), float(real_pair[1])
    b2 = complex(cplx[np.argmax(cplx.imag)])
    if tau == 0.0:
        b2 = complex(-1.0, math.sqrt(2.0)) / 3.0 ** (1.0 / 3.0)
    bs = b_star(tau)
    if abs(a1) > magnitude_bound:
        raise DomainError(f"branch point a1={a1} exceeds magnitude bound")
    return BranchPointSet(
        tau=tau, c=param.c, a1=a1, b1=b1, a2=b2.conjugate(), b2=b2, b_star=bs,
        degenerate_merge=abs(b1 - bs) < merge_tol,
    )


def cubic_roots(p, q) -> np.ndarray:
    """Roots of ``x^3 + p x + q = 0`` by Cardano's formula with Newton polish.

    The larger of ``-q/2 +- sqrt(d)`` is used for the cube root to avoid
    cancellation.  Vectorized; output has shape ``broadcast(p, q).shape + (3,)``.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    p, q = np.broadcast_arrays(p, q)
    d = (q / 2.0) ** 2 + (p / 3.0) ** 3
    s = np.sqrt(d)
    t1 = -q / 2.0 + s
    t2 = -q / 2.0 - s
    t = np.where(np.abs(t1) >= np.abs(t2), t1, t2)
    u = t ** (1.0 / 3.0)
    nz = u != 0
    v = np.where(nz, -p / (3.0 * np.where(nz, u, 1.0)), 0.0)
    out = np.stack([u + v, _OMEGA * u + v / _OMEGA, u / _OMEGA + _OMEGA * v], axis=-1)
    # one Newton step per root, kept only where it reduces the residual
    pe = p[..., None]
    qe = q[..., None]
    f = out**3 + pe * out + qe
    fp = 3.0 * out**2 + pe
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = out - f / fp
    fc = cand**3 + pe * cand + qe
    better = np.isfinite(cand) & (np.abs(fc) < np.abs(f))
    return np.where(better, cand, out)


_W = cmath.exp(2j * math.pi / 3)
_WC = _W.conjugate()


def cubic_roots_scalar(p: complex, q: complex) -> tuple[complex, complex, complex]:
    """Scalar version of :func:`cubic_roots` using :mod:`cmath`."""
    d = 0.25 * q * q + (p / 3.0) ** 3
    s = cmath.sqrt(d)
    t1 = -0.5 * q + s
    t2 = -0.5 * q - s
    t = t1 if abs(t1) >= abs(t2) else t2
    if t == 0:
        return (0j, 0j, 0j)
    u = t ** (1.0 / 3.0)
    v = -p / (3.0 * u)
    out = []
    for x in (u + v, _W * u + _WC * v, _WC * u + _W * v):
        f = x * x * x + p * x + q
        fp = 3.0 * x * x + p
        if fp != 0:
            y = x - f / fp
            if abs(y * y * y + p * y + q) < abs(f):
                x = y
        out.append(x)
    return (out[0], out[1], out[2])


def solve_xi_unlabeled(curve: SpectralCurve, z) -> np.ndarray:
    """The three roots at ``z`` in no particular order."""
    return curve.roots(z)


def match_roots(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Permute ``new`` (shape ``(..., 3)``) to minimize total distance to ``prev``."""
    cand = new[..., _PERMS]  # (..., 6, 3)
    cost = np.abs(cand - prev[..., None, :]).sum(axis=-1)
    k = np.argmin(cost, axis=-1)
    return np.take_along_axis(cand, k[..., None, None], axis=-2)[..., 0, :]


def _ambiguity(pred: np.ndarray, roots: np.ndarray) -> tuple[np.ndarray, float]:
    """Match predictions to roots and return (matched, worst ratio).

    The ratio compares each prediction's distance to its match with its
    distance to the nearest other root; small values mean unambiguous.
    """
    matched = match_roots(pred, roots)
    dist = np.abs(pred[:, None] - roots[None, :])
    worst = 0.0
    for j in range(3):
        d_own = abs(pred[j] - matched[j])
        others = [dist[j, k] for k in range(3) if roots[k] != matched[j]]
        d_other = min(others) if others else np.inf
        ratio = d_own / d_other if d_other > 0 else np.inf
        worst = max(worst, ratio)
    return matched, worst


def _terminal_ambiguity(pred: np.ndarray, roots: np.ndarray, tol: float = 1e-6) -> float:
    """Ambiguity ratio when roots that coincide at the target count as one."""
    scale = 1.0 + float(np.max(np.abs(roots)))
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) < tol * scale:
                g.append(r)
                break
        else:
            groups.append([r])
    if len(groups) == 3:
        return _ambiguity(pred, roots)[1]
    reps = np.array([g[0] for g in groups])
    worst = 0.0
    for p in pred:
        d = np.sort(np.abs(reps - p))
        worst = max(worst, d[0] / d[1] if d[1] > 0 else np.inf)
    return worst


_PERM_LIST = [tuple(int(i) for i in pm) for pm in _PERMS]


def _match_scalar(pred, roots):
    """Best assignment of ``roots`` to ``pred`` and its worst ambiguity ratio."""
    best = None
    for pm in _PERM_LIST:
        cost = abs(pred[0] - roots[pm[0]]) + abs(pred[1] - roots[pm[1]]) + abs(pred[2] - roots[pm[2]])
        if best is None or cost < best[0]:
            best = (cost, pm)
    pm = best[1]
    worst = 0.0
    for j in range(3):
        own = abs(pred[j] - roots[pm[j]])
        other = min(abs(pred[j] - roots[k]) for k in range(3) if k != pm[j])
        r = own / other if other > 0 else math.inf
        if r > worst:
            worst = r
    return [roots[pm[0]], roots[pm[1]], roots[pm[2]]], worst


def continue_step(curve: SpectralCurve, z0: complex, xi0: np.ndarray, z1: complex,
                  max_levels: int = 40, ratio: float = 0.25,
                  terminal: bool = False) -> np.ndarray:
    """Carry the labeled triple ``xi0`` at ``z0`` to ``z1`` with bisection.

    Raises
    ------
    ContinuationError
        When the step cannot be resolved after ``max_levels`` halvings.
    """
    xi = [complex(v) for v in xi0]
    z = complex(z0)
    target = complex(z1)
    h = target - z
    level = 0
    while True:
        zn = z + h
        last = abs(target - zn) <= 1e-15 * max(1.0, abs(target))
        if last:
            zn = target
        R, D, dR, dD = curve.rd_scalar(z)
        pred = []
        for x in xi:
            den = 3.0 * x * x - R
            d = (dR * x - dD) / den if den != 0 else 0j
            pred.append(x + d * (zn - z))
        roots = curve.roots_scalar(zn)
        matched, worst = _match_scalar(pred, roots)
        if last and terminal and worst >= ratio:
            worst = _terminal_ambiguity(np.array(pred), np.array(roots))
        if worst < ratio:
            xi = matched
            z = zn
            if last:
                return np.array(xi, dtype=complex)
            h = target - z if abs(target - z) < 2 * abs(h) else h * 2.0
            level = max(level - 1, 0)
            continue
        level += 1
        if level > max_levels:
            raise ContinuationError(f"continuation stalled near z={zn!r}")
        h = h / 2.0
        if abs(h) < 1e-15 * max(1.0, abs(z)):
            raise ContinuationError(f"continuation stalled near z={zn!r}")


def continue_roots(curve: SpectralCurve, path: Sequence[complex], start: np.ndarray,
                   max_levels: int = 40, terminal: bool = False) -> np.ndarray:
    """Labeled roots along ``path`` starting from the labeled triple ``start``.

    Parameters
    ----------
    curve : SpectralCurve
    path : sequence of complex
        Points ``path[0], path[1], ...``; ``start`` is the triple at ``path[0]``.
    start : ndarray of shape (3,)
    terminal : bool
        Accept an ambiguous match at the final point (for example when the
        path ends at a branch point).

    Returns
    -------
    ndarray of shape (len(path), 3)
    """
    path = np.asarray(path, dtype=complex)
    out = np.empty((len(path), 3), dtype=complex)
    out[0] = start
    for k in range(1, len(path)):
        try:
            out[k] = continue_step(curve, path[k - 1], out[k - 1], path[k],
                                   max_levels=max_levels,
                                   terminal=terminal and k == len(path) - 1)
        except ContinuationError as exc:
            raise ContinuationError(f"{exc} (path index {k})") from None
    return out


def match_along(roots: np.ndarray, start: np.ndarray | None = None) -> np.ndarray:
    """Sequential nearest matching of precomputed roots along a fine path.

    ``roots`` has shape ``(..., N, 3)``; matching runs along axis ``-2`` and is
    vectorized over leading axes.  Uses linear extrapolation from the two
    previous points as the predictor.
    """
    roots = np.array(roots, dtype=complex, copy=True)
    if start is not None:
        roots[..., 0, :] = start
    n = roots.shape[-2]
    for k in range(1, n):
        if k >= 2:
            pred = 2.0 * roots[..., k - 1, :] - roots[..., k - 2, :]
        else:
            pred = roots[..., k - 1, :]
        roots[..., k, :] = match_roots(pred, roots[..., k, :])
    return roots


def coincident_pair(xi: np.ndarray) -> tuple[tuple[int, int], int]:
    """Indices of the closest pair in a triple and the remaining index."""
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        d = abs(xi[i] - xi[j])
        if best is None or d < best[0]:
            best = (d, (i, j))
    pair = best[1]
    other = ({0, 1, 2} - set(pair)).pop()
    return pair, other


@dataclass(frozen=True)
class PolyCurve(SpectralCurve):
    """Curve with ``R`` and ``D`` given as callables, used for fixtures."""

    name: str
    R_fn: Callable
    D_fn: Callable
    dR_fn: Callable
    dD_fn: Callable

    def R(self, z):
        return self.R_fn(np.asarray(z, dtype=complex))

    def D(self, z):
        return self.D_fn(np.asarray(z, dtype=complex))

    def dR(self, z):
        return self.dR_fn(np.asarray(z, dtype=complex))

    def dD(self, z):
        return self.dD_fn(np.asarray(z, dtype=complex))


def scalar_roots(curve: SpectralCurve, z: complex) -> np.ndarray:
    """Convenience wrapper returning a length-3 array for a scalar ``z``."""
    return np.asarray(curve.roots(complex(z)), dtype=complex).reshape(3)


def vieta_residuals(curve: SpectralCurve, z, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residuals of the three symmetric-function identities."""
    z = np.asarray(z, dtype=complex)
    R = curve.R(z)
    D = curve.D(z)
    s1 = xi.sum(axis=-1)
    s2 = (xi**2).sum(axis=-1) - 2.0 * R
    s3 = xi.prod(axis=-1) + D
    return s1, s2, s3


def cmath_sqrt(z: complex) -> complex:
    return cmath.sqrt(z)
