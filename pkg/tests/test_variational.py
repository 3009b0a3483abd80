import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiccrit import DomainError
from cubiccrit.measures import example_fixture
from cubiccrit.variational import (STRUCTURE, DiscreteMeasure, ExternalField, InteractionStructure,
                                   energy, log_energy, r_from_fields, s_property_check,
                                   variation_Dhz, verify_equilibrium, xi_from_measure)

from oracles import ENERGY_PAIRS_4000, cuts, measure, off_support_points, param

CUBIC = ExternalField.cubic()


def _point(*zs, w=1.0):
    return DiscreteMeasure(np.array(zs, dtype=complex), np.full(len(zs), w))


# -- interaction structure ----------------------------------------------------------

def test_exact_identities():
    assert all(InteractionStructure.exact_identities().values())


def test_float_structure():
    A, B, b = STRUCTURE.A, STRUCTURE.B, STRUCTURE.b
    assert np.array_equal(A, A.T)
    assert np.allclose(2 * A, B.T @ B)
    assert np.allclose(A @ b, 0)
    w, v = np.linalg.eigh(A)
    assert w == pytest.approx([0, 1.5, 1.5], abs=1e-14)
    assert np.allclose(v[0, 1:] - v[1, 1:] - v[2, 1:], 0, atol=1e-14)


# -- fields ----------------------------------------------------------------------------

def test_field_compatibility():
    assert CUBIC.compatible()
    with pytest.raises(DomainError):
        ExternalField((0, 1), (0, 0), (0, 0))
    f = ExternalField.from_V((0, 0, 1), (0, -1), (0, 1, -1))
    assert f.compatible()
    with pytest.raises(DomainError):
        ExternalField.from_V((0, 1), (0, 1), (0,))


def test_cubic_field_values():
    z = np.array([0.3 + 0.4j, -1.2 + 0.1j])
    phi = CUBIC.phi(z)
    assert phi[0] == pytest.approx((z**3).real)
    assert phi[1] == pytest.approx((z**3).real)
    assert np.all(phi[2] == 0)


# -- energy -------------------------------------------------------------------------------

def test_energy_of_zero_measures():
    empty = [DiscreteMeasure.empty()] * 3
    assert energy(empty, CUBIC) == 0.0
    assert energy(empty, ExternalField.zero()) == 0.0


def test_two_unit_charges():
    # the double integral counts the pair in both orders
    d = 0.37
    A = np.zeros((3, 3))
    A[0, 0] = 1.0
    vec = [_point(0, d), DiscreteMeasure.empty(), DiscreteMeasure.empty()]
    assert energy(vec, ExternalField.zero(), A=A) == pytest.approx(-2 * math.log(d), rel=1e-14)
    assert log_energy(_point(0), _point(d)) == pytest.approx(-math.log(d), rel=1e-14)


def test_coincident_charges():
    with pytest.raises(DomainError):
        log_energy(_point(0.5), _point(0.5))


def test_energy_family_measure_against_dense_oracle():
    e = energy(measure(0.1), CUBIC)
    assert e == pytest.approx(ENERGY_PAIRS_4000, rel=1e-4)


def test_energy_methods_agree():
    mu = measure(0.1, 1000)
    assert energy(mu, CUBIC, method="pairs") == pytest.approx(energy(mu, CUBIC), rel=1e-3)
    with pytest.raises(DomainError):
        energy([DiscreteMeasure.empty()] * 3, CUBIC, method="potential")


# -- variations and R ---------------------------------------------------------------------

def test_Dhz_small_at_example_point():
    assert abs(variation_Dhz(measure(0.1), CUBIC, 2 + 2j)) < 1e-4


def test_Dhz_vanishes_at_infinity():
    mu = measure(0.1)
    vals = [abs(variation_Dhz(mu, CUBIC, r * np.exp(0.4j))) for r in (1e2, 1e4, 1e6)]
    assert vals[-1] < 1e-12
    assert max(vals) < 1e-9


def test_Dhz_on_support():
    mu = measure(0.1)
    with pytest.raises(DomainError):
        variation_Dhz(mu, CUBIC, complex(mu[1].arcs[0].nodes[100]))


@pytest.mark.parametrize("tau", [0.02, 0.08, 0.12, 0.2, 0.24])
def test_criticality_identity(tau):
    mu = measure(tau)
    cs = cuts(tau)
    p = param(tau)
    for z in off_support_points(mu):
        xi = cs.labeled_roots(z)
        lhs = 0.5 * np.sum(xi**2) - p.R(z)
        assert abs(lhs) < 5e-4
        assert abs(variation_Dhz(mu, CUBIC, z)) < 5e-4


def test_xi_from_measure():
    mu = measure(0.1)
    z = 1.5 - 0.5j
    assert np.abs(xi_from_measure(mu, CUBIC, z) - cuts(0.1).labeled_roots(z)).max() < 1e-6


@pytest.mark.parametrize("tau", [0.1, 0.2])
def test_r_from_cubic_field(tau):
    mu = measure(tau)
    r = r_from_fields(mu, CUBIC)
    c = param(tau).c
    assert r == pytest.approx([-c, -3, 0, 0, 3], abs=1e-5)
    m1 = mu[1].moment(1) + mu[2].moment(1)
    assert -c == pytest.approx(-3 * m1.real, abs=1e-5)


def test_r_from_zero_field():
    r = r_from_fields([DiscreteMeasure.empty()] * 3, ExternalField.zero())
    assert np.all(r == 0)


def test_r_from_angelesco_fields():
    fx = example_fixture("Angelesco")
    f = ExternalField(*fx.fields)
    assert f.compatible()
    assert r_from_fields(fx.vector_measure(), f) == pytest.approx([1.0], abs=1e-5)


def test_r_from_nikishin_fields():
    fx = example_fixture("Nikishin")
    r = r_from_fields(fx.vector_measure(), ExternalField(*fx.fields))
    assert r == pytest.approx([1 / 3], abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3))
def test_sum_of_squares_is_2R(x, y):
    p = param(0.1)
    z = complex(x, y)
    xi = p.roots(z)
    assert abs(np.sum(xi**2) - 2 * p.R(z)) < 1e-9 * max(1.0, abs(p.R(z)))


# -- equilibrium ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def report01():
    return verify_equilibrium(param(0.1), cuts(0.1), measure(0.1))


@pytest.fixture(scope="module")
def report02():
    return verify_equilibrium(param(0.2), cuts(0.2), measure(0.2))


def test_equilibrium_precritical(report01):
    r = report01
    assert r.ok, r.failures
    assert r.max_equality_deviation["delta1"] < 1e-4
    assert r.max_equality_deviation["delta2"] < 1e-4
    assert min(r.min_inequality_margin.values()) > 0
    assert r.l3_tilde_margin > 0
    assert r.l3_defect is None


def test_equilibrium_supercritical(report02):
    r = report02
    assert r.ok, r.failures
    assert max(r.max_equality_deviation.values()) < 1e-4
    assert r.max_equality_deviation["delta3"] < 1e-4
    assert r.l3_defect < 1e-4
    assert min(r.min_inequality_margin.values()) > 0


def test_report_json(report02):
    import json
    d = json.loads(report02.to_json())
    assert {"l1", "l2", "l3_defect", "max_equality_deviation", "min_inequality_margin",
            "s_property_defects"} <= set(d)


# -- S-property -----------------------------------------------------------------------------

def test_s_property_delta1_midpoint():
    cs = cuts(0.1)
    x = 0.5 * (cs.bp.a1 + cs.bp.b1)
    rep = s_property_check(measure(0.1), 1, complex(x), 1 + 0j, delta=1e-4)
    assert rep.defect < 1e-3


def test_s_property_delta2_upper_arc():
    mu = measure(0.1)
    a = mu[2].arcs[0]
    k = int(0.75 * len(a.nodes))
    z, t = complex(a.nodes[k]), complex(a.nodes[k + 1] - a.nodes[k - 1])
    assert z.imag > 0
    r1 = s_property_check(mu, 2, z, t, delta=1e-4)
    r2 = s_property_check(mu, 2, z, t, delta=5e-5)
    assert r1.defect < 1e-3 and r2.defect < 1e-3
    # one-sided derivatives move by O(delta) when the offset is halved
    assert abs(r1.plus - r2.plus) < 10 * 1e-4
    assert abs(r1.minus - r2.minus) < 10 * 1e-4


def test_s_property_flat():
    rep = s_property_check([DiscreteMeasure.empty()] * 3, 1, 0.3 + 0j, 1 + 0j,
                           field=ExternalField.zero())
    assert rep.defect == 0.0
