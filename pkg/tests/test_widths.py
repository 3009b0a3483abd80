import numpy as np
import pytest

from cubiccrit import DomainError, QuadratureError
from cubiccrit.widths import (critical_taus, h_width, loop_period_real_part, segment_forms,
                              width_grid, width_omega, widths_batch, widths_csv)

from oracles import MP_WIDTHS, cuts, param

TAU_GENUS = 1 / 12


@pytest.fixture(scope="module")
def scan():
    """Coarse width scan over the whole parameter range."""
    return segment_forms(np.linspace(0.002, 0.2495, 160), 4000)


# -- single widths against the high-precision oracle ---------------------------------

def test_omega1_at_005_against_oracle():
    assert width_omega(param(0.05), 1) == pytest.approx(MP_WIDTHS[0.05]["omega1"], abs=1e-6)


@pytest.mark.parametrize("tau", [0.05, 0.1913565, 0.2289555])
def test_all_widths_against_oracle(tau):
    r = widths_batch([tau])[0]
    for name, ref in MP_WIDTHS[tau].items():
        # the endpoint square-root singularities cap the trapezoid at about 1e-6 here
        assert getattr(r, name) == pytest.approx(ref, abs=2e-6), name


def test_omega1_near_reference_first_root():
    # the oracle value at the quoted first root is far from zero compared with 1e-6
    ref = MP_WIDTHS[0.12487351]["omega1"]
    assert abs(ref) > 1e-4
    assert width_omega(param(0.12487351), 1) == pytest.approx(ref, abs=2e-6)


def test_omega3_negative_at_zero():
    assert width_omega(param(0.0), 3) < 0


def test_omega2_vanishes_at_tau_c():
    ct = critical_taus(tol=1e-9, grid=128)
    assert abs(width_omega(param(ct.tau_c), 2)) < 1e-6
    # the oracle confirms the computed root
    assert abs(MP_WIDTHS[0.19125064259711874]["omega2"]) < 1e-12
    assert ct.tau_c == pytest.approx(0.19125064259711874, abs=1e-7)


def test_width_omega_domain():
    with pytest.raises(DomainError):
        width_omega(param(0.05), 4)
    with pytest.raises(DomainError):
        width_omega(param(0.1), 5)
    assert width_omega(param(0.1), 4, m=2000) is not None


def test_critical_taus_ordering():
    ct = critical_taus(tol=1e-9, grid=128)
    assert TAU_GENUS < ct.tau1 < ct.tau_c < ct.tau2 < 0.25
    with pytest.raises(DomainError):
        critical_taus(tol=1e-12)


def test_critical_taus_scan_error():
    with pytest.raises(QuadratureError):
        critical_taus(grid=2)


# -- sign structure -------------------------------------------------------------------

def _changes(v):
    s = np.sign(v)
    return int(np.sum(s[:-1] * s[1:] < 0))


def test_sign_changes(scan):
    above = scan.tau > TAU_GENUS
    assert _changes(scan.omega1[above]) == 2
    assert _changes(scan.omega2[above]) == 1
    assert _changes(scan.omega3) == 0
    assert np.all(scan.omega3 < 0)
    assert _changes(scan.omega4[above]) == 0


def test_omega1_differs_from_omega4(scan):
    above = scan.tau > TAU_GENUS + 1e-3
    gap = np.abs(scan.omega1[above] - scan.omega4[above])
    assert np.all(gap > 10 * 1e-6)


def test_omega4_undefined_below_genus_change(scan):
    assert np.all(np.isnan(scan.omega4[scan.tau < TAU_GENUS]))


@pytest.mark.parametrize("tau", [0.05, 0.15, 0.22])
def test_richardson_consistency(tau):
    w = [widths_batch([tau], m)[0] for m in (2500, 5000, 10000)]
    for name in ("omega1", "omega2", "omega3", "omega4"):
        v = [getattr(r, name) for r in w]
        if v[0] is None:
            continue
        estimate = abs(v[1] - v[0]) / 3.0
        assert abs(v[2] - v[1]) < 4.0 * estimate + 1e-14, name


# -- h(x, y) --------------------------------------------------------------------------

def test_h_trivial():
    cs = cuts(0.05)
    lo, hi = cs.delta1
    x = 0.3 * lo + 0.7 * hi
    y = 0.8 * lo + 0.2 * hi
    p = param(0.05)
    assert h_width(p, x, x, "D1", cuts=cs) == 0.0
    assert h_width(p, x, y, "D1", cuts=cs) == pytest.approx(-h_width(p, y, x, "D1", cuts=cs),
                                                            abs=1e-15)


def test_h_nonzero_on_delta1():
    cs = cuts(0.05)
    p = param(0.05)
    lo, hi = cs.delta1
    xs = np.linspace(lo, hi, 9)
    for i, x in enumerate(xs):
        for y in xs[i + 1:]:
            assert abs(h_width(p, x, y, "D1", cuts=cs)) > 1e-8


def test_h_domain():
    cs = cuts(0.05)
    p = param(0.05)
    with pytest.raises(DomainError):
        h_width(p, cs.delta1[0] - 0.1, cs.delta1[1], "D1", cuts=cs)
    with pytest.raises(DomainError):
        h_width(p, 0.0, 0.1, "D3", cuts=cs)
    with pytest.raises(DomainError):
        h_width(p, 0.0, 0.1, "D2", cuts=cs)


def test_h_on_delta3():
    cs = cuts(0.2)
    lo, hi = cs.delta3
    v = h_width(param(0.2), lo, hi, "D3", cuts=cs)
    assert np.isfinite(v)


# -- loop periods ----------------------------------------------------------------------

@pytest.mark.parametrize("tau,sheet", [(0.1, 1), (0.0, 2), (0.2, 3)])
def test_loop_period_real(tau, sheet):
    assert abs(loop_period_real_part(param(tau), sheet, 10.0)) < 1e-6


def test_loop_period_oracle_dense():
    # the same loop at 10^5 nodes agrees with the default resolution
    p = param(0.2)
    assert loop_period_real_part(p, 3, 10.0, n=100_000) == pytest.approx(
        loop_period_real_part(p, 3, 10.0), abs=1e-6)


def test_loop_period_small_radius():
    with pytest.raises(DomainError):
        loop_period_real_part(param(0.1), 1, 0.5)


# -- grid and export ----------------------------------------------------------------

def test_grid_and_csv():
    reports = width_grid(5, m=1000)
    assert [r.tau for r in reports] == pytest.approx([k / 24 for k in range(1, 6)])
    text = widths_csv(reports, header=["run"])
    lines = text.splitlines()
    assert lines[0] == "# run"
    assert lines[1] == "tau,omega1,omega2,omega3,omega4"
    assert lines[2].endswith(",")  # omega4 empty below 1/12
    assert not lines[-1].endswith(",")


def test_omega4_at_genus_change_is_the_limit_from_above():
    # all three roots meet at the double point there; the value continues the
    # branch from slightly larger tau (the cube-root endpoint slows the trapezoid)
    at = widths_batch([TAU_GENUS])[0].omega4
    above = [widths_batch([TAU_GENUS + d])[0].omega4 for d in (1e-7, 1e-8)]
    assert abs(above[0] - above[1]) < 1e-6
    assert at == pytest.approx(above[1], abs=1e-4)
