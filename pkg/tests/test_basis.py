import math

import numpy as np
import pytest
from scipy import integrate

from stratexp import _quad
from stratexp.basis import BasisSystem, full_integrals, legendre_table, phi, phi_integral
from stratexp.model import DomainError, Interval

from conftest import UNIT

# quad reports roundoff when asked for 1e-14; the asserted tolerance is far looser
pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")

INTERVALS = [UNIT, Interval(2.0, 5.0), Interval(-0.7, 0.05)]


def test_phi_examples(legendre_unit, trig_unit):
    assert phi(legendre_unit, 0, 0.7) == pytest.approx(1.0, abs=1e-15)
    assert phi(legendre_unit, 1, 0.5) == 0.0
    assert phi(legendre_unit, 1, 1.0) == pytest.approx(math.sqrt(3), abs=1e-15)
    assert phi(trig_unit, 1, 0.25) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_phi_domain(legendre_unit):
    with pytest.raises(DomainError):
        phi(legendre_unit, 2, 1.5)
    with pytest.raises(ValueError):
        phi(legendre_unit, -1, 0.5)


def test_phi_integral_examples(legendre_unit):
    assert phi_integral(legendre_unit, 0, 0.0, 1.0) == 1.0
    assert phi_integral(legendre_unit, 3, 0.0, 1.0) == 0.0
    # antiderivative sqrt(3)(s^2 - s) at 0.5
    assert phi_integral(legendre_unit, 1, 0.0, 0.5) == pytest.approx(-math.sqrt(3) / 4, abs=1e-15)


def test_phi_integral_domain(legendre_unit):
    with pytest.raises(DomainError):
        phi_integral(legendre_unit, 1, -0.5, 0.5)
    with pytest.raises(ValueError):
        phi_integral(legendre_unit, 1, 0.6, 0.5)


@pytest.mark.parametrize("iv", INTERVALS)
def test_orthonormality(any_basis_kind, iv):
    b = BasisSystem(any_basis_kind, iv)
    x, w, _ = _quad.panel_nodes(iv.t0, iv.t1, 16)
    tab = b.table(25, x).reshape(26, -1)
    G = (tab * w.ravel()) @ tab.T
    np.testing.assert_allclose(G, np.eye(26), atol=1e-10)


@pytest.mark.parametrize("iv", INTERVALS)
def test_phi0_is_constant(any_basis_kind, iv):
    b = BasisSystem(any_basis_kind, iv)
    s = np.linspace(iv.t0, iv.t1, 7)
    np.testing.assert_allclose(b.table(0, s)[0], 1.0 / math.sqrt(iv.length), rtol=1e-15)


@pytest.mark.parametrize("iv", INTERVALS)
def test_full_integrals_vanish(any_basis_kind, iv):
    b = BasisSystem(any_basis_kind, iv)
    for j in range(1, 30):
        assert phi_integral(b, j, iv.t0, iv.t1) == 0.0
        val, _ = integrate.quad(lambda s: phi(b, j, s), iv.t0, iv.t1, limit=200, epsabs=1e-14)
        assert abs(val) < 1e-12
    np.testing.assert_array_equal(full_integrals(b, 10), [phi_integral(b, j, iv.t0, iv.t1) for j in range(11)])


@pytest.mark.parametrize("iv", INTERVALS)
def test_phi_integral_matches_adaptive_quadrature(any_basis_kind, iv, rng):
    b = BasisSystem(any_basis_kind, iv)
    for _ in range(25):
        j = int(rng.integers(0, 20))
        a, c = np.sort(rng.uniform(iv.t0, iv.t1, 2))
        ref, _ = integrate.quad(lambda s: phi(b, j, s), a, c, limit=200, epsabs=1e-14, epsrel=1e-14)
        assert phi_integral(b, j, a, c) == pytest.approx(ref, abs=1e-10)


def test_legendre_recurrence_low_order():
    y = np.linspace(-1, 1, 41)
    tab = legendre_table(3, y)
    explicit = [np.ones_like(y), y, 0.5 * (3 * y**2 - 1), 0.5 * (5 * y**3 - 3 * y)]
    for j in range(4):
        np.testing.assert_allclose(tab[j], explicit[j], atol=1e-13)


def test_legendre_high_order_stable():
    y = np.linspace(-1, 1, 1001)
    tab = legendre_table(400, y)
    assert np.all(np.abs(tab) <= 1.0 + 1e-12)
    np.testing.assert_allclose(tab[:, -1], 1.0, atol=1e-12)
    np.testing.assert_allclose(tab[:, 0], (-1.0) ** np.arange(401), atol=1e-12)


def test_trig_convention(trig_unit):
    s = np.array([0.1, 0.37])
    tab = trig_unit.table(4, s)
    c = math.sqrt(2)
    np.testing.assert_allclose(tab[1], c * np.sin(2 * np.pi * s))
    np.testing.assert_allclose(tab[2], c * np.cos(2 * np.pi * s))
    np.testing.assert_allclose(tab[3], c * np.sin(4 * np.pi * s))
    np.testing.assert_allclose(tab[4], c * np.cos(4 * np.pi * s))
    assert trig_unit.max_frequency(4) == 2
