import math
from fractions import Fraction

import numpy as np
import pytest

from heatchern.clifford import CliffordElement, represent, symbol_map
from heatchern.equivariant import (BundleVariationData, CurvatureTensor,
                                   IsometryNormalForm, curvature_bivector,
                                   curvature_form_matrix,
                                   equivariant_supertrace, euler_form,
                                   fiber_integral, hodge_variation_operator,
                                   lambda_pushforward_oracle,
                                   local_index_density, mehler_heat_residual,
                                   mehler_kernel, pfaffian, phi_tilde,
                                   sigma_phi_top, supertrace_decomposition,
                                   theta_form, transgression)
from heatchern.multivector import BigradeSplit, Multivector, grade_component

from conftest import random_curvature

# exact Pythagorean (cos, sin) pairs for rational-backend checks
PYTH = [(Fraction(3, 5), Fraction(4, 5)), (Fraction(5, 13), Fraction(12, 13))]


def test_isometry_validation():
    with pytest.raises(ValueError):
        IsometryNormalForm(3, 1, (0.5,))
    with pytest.raises(ValueError):
        IsometryNormalForm(4, 2, ())      # angle count mismatch
    with pytest.raises(ValueError):
        IsometryNormalForm(4, 2, (0.0,))  # degenerate angle
    iso = IsometryNormalForm(4, 2, (math.pi,))
    assert iso.b == 2
    assert iso.det_one_minus_normal() == pytest.approx(4.0)


def test_curvature_symmetries():
    R = CurvatureTensor(3, {(1, 2, 1, 3): Fraction(5)})
    assert R.get(2, 1, 1, 3) == -5
    assert R.get(1, 3, 1, 2) == 5
    assert R.get(1, 1, 2, 3) == 0
    with pytest.raises(ValueError):
        CurvatureTensor(3, {(1, 1, 2, 3): Fraction(1)})
    with pytest.raises(ValueError):
        CurvatureTensor(3, {(1, 2, 1, 3): Fraction(1),
                            (1, 3, 1, 2): Fraction(2)})


def test_scalar_curvature_and_tangent_block():
    R = CurvatureTensor(4, {(1, 2, 1, 2): Fraction(3), (3, 4, 3, 4): Fraction(1)})
    assert R.scalar_curvature() == 2 * 3 + 2 * 1
    Rt = R.tangent_block(2)
    assert Rt.components == {(1, 2, 1, 2): Fraction(3)}


def test_phi_tilde_exact_structure():
    iso = IsometryNormalForm(2, 0, (1.0,))
    p = phi_tilde(iso, trig=[PYTH[0]])
    c, s = PYTH[0]
    half = Fraction(1, 2)
    assert p.coefficient(0, 0) == half * (1 + c)
    assert p.coefficient(0b11, 0b11) == -half * (1 - c)
    assert p.coefficient(0b11, 0) == half * s
    assert p.coefficient(0, 0b11) == -half * s


def test_pushforward_oracle_matches_representation():
    for n, a, angles in [(2, 0, (0.4,)), (4, 2, (2.2,)), (4, 0, (0.7, 2.9))]:
        iso = IsometryNormalForm(n, a, angles)
        mat = represent(phi_tilde(iso)).astype(float)
        want = lambda_pushforward_oracle(iso)
        assert np.max(np.abs(mat - want)) < 1e-12


def test_sigma_phi_top_leading_term():
    iso = IsometryNormalForm(4, 2, (1.0,))
    top = sigma_phi_top(iso, trig=[PYTH[1]])
    c, _ = PYTH[1]
    split = iso.split()
    sig = symbol_map(phi_tilde(iso, trig=[PYTH[1]]))
    comp = grade_component(sig, split, ((0, 2), (0, 2)))
    assert comp == top
    assert top.coefficient(split.normal_mask, split.normal_mask) \
        == Fraction(-1, 4) * (2 - 2 * c)


def test_supertrace_paths_exact():
    iso = IsometryNormalForm(4, 2, (1.0,))
    trig = [PYTH[0]]
    full = (1 << 4) - 1
    A = CliffordElement(4, {(full, full): Fraction(1), (0b11, 0b11): Fraction(2),
                            (0, 0): Fraction(3)})
    s1 = equivariant_supertrace(iso, A, "matrix", trig)
    s2 = equivariant_supertrace(iso, A, "decomposition", trig)
    assert s1 == s2
    lead, corr = supertrace_decomposition(iso, A, trig)
    assert lead + corr == s1


def test_supertrace_float_paths_agree(rng):
    iso = IsometryNormalForm(4, 2, (0.9,))
    A = CliffordElement(4, {(rng.randrange(16), rng.randrange(16)):
                            rng.uniform(-2, 2) for _ in range(6)})
    s1 = equivariant_supertrace(iso, A, "matrix")
    s2 = equivariant_supertrace(iso, A, "decomposition")
    assert abs(s1 - s2) < 1e-10


def test_curvature_bivector_n2():
    R = CurvatureTensor(2, {(1, 2, 1, 2): Fraction(7)})
    rdot = curvature_bivector(R)
    assert rdot == Multivector(2, {(0b11, 0b11): Fraction(7)})


def test_mehler_gaussian_normalization():
    # integral over y of the scalar part is 1 (flat case)
    R = CurvatureTensor(2, {})
    t = 0.3
    grid = np.linspace(-8, 8, 401)
    dy = grid[1] - grid[0]
    total = 0.0
    for y1 in grid:
        for y2 in grid:
            total += mehler_kernel(R, t, (0.0, 0.0), (y1, y2)).coefficient(0, 0)
    assert abs(total * dy * dy - 1.0) < 1e-6


def test_mehler_heat_residual(rng):
    R = random_curvature(4, rng)
    res = mehler_heat_residual(R, 0.7, np.zeros(4), np.array([0.3, -0.2, 0.1, 0.4]))
    assert res < 1e-8


def test_fiber_integral_modes(rng):
    R = random_curvature(4, rng, backend=lambda v: float(v))
    iso = IsometryNormalForm(4, 2, (0.8,))
    for t in (0.1, 1.0):
        cf = fiber_integral(R, iso, t, "closed-form")
        qd = fiber_integral(R, iso, t, "quadrature")
        keys = set(cf.terms) | set(qd.terms)
        err = max(abs(cf.coefficient(*k) - qd.coefficient(*k)) for k in keys)
        assert err < 1e-6


def test_pfaffian_textbook_4x4():
    a, b, c, d, e, f = (Fraction(v) for v in (2, -3, 5, 7, -1, 4))
    ab = Multivector(4, {(0, 0): a})
    mat = {(1, 2): Multivector(4, {(0, 0): a}),
           (1, 3): Multivector(4, {(0, 0): b}),
           (1, 4): Multivector(4, {(0, 0): c}),
           (2, 3): Multivector(4, {(0, 0): d}),
           (2, 4): Multivector(4, {(0, 0): e}),
           (3, 4): Multivector(4, {(0, 0): f})}
    pf = pfaffian(mat, 4)
    assert pf.coefficient(0, 0) == a * f - b * e + c * d


def test_index_density_identity_exact(rng):
    for n, a in [(4, 2), (4, 4), (6, 4)]:
        angles = tuple(0.5 + 0.3 * i for i in range((n - a) // 2))
        iso = IsometryNormalForm(n, a, angles)
        for _ in range(3):
            R = random_curvature(n, rng)
            assert local_index_density(R, iso) \
                == euler_form(R.tangent_block(a), a)


def test_euler_form_surface():
    # R_1212 = kappa: pi-units value is -kappa/2, i.e. -kappa/(2 pi)
    R = CurvatureTensor(2, {(1, 2, 1, 2): Fraction(3)})
    assert euler_form(R, 2) == Fraction(-3, 2)
    # stored unit-sphere convention: R_1212 = -1 integrates to chi = 2
    # against area 4 pi: (1/2) * (1/pi) * 4 pi = 2
    Rs = CurvatureTensor(2, {(1, 2, 1, 2): Fraction(-1)})
    assert euler_form(Rs, 2) * 4 == 2


def test_transgression_properties(rng):
    a = 4
    R = random_curvature(a, rng)
    base = curvature_form_matrix(R, a)
    # Sdot = R recovers (a/2) times the Euler form at top degree
    tg = transgression(R, base, a)
    top = (1 << a) - 1
    assert tg.coefficient(top, 0) == Fraction(a, 2) * euler_form(R, a)
    # linearity in Sdot
    s1 = {(1, 2): Multivector(a, {(0b1100, 0): Fraction(2)})}
    s2 = {(1, 2): Multivector(a, {(0b1010, 0): Fraction(-1)})}
    s12 = {(1, 2): s1[(1, 2)] + s2[(1, 2)]}
    assert transgression(R, s12, a) \
        == transgression(R, s1, a) + transgression(R, s2, a)


def test_transgression_surface_example():
    # a = 2: the only term is -(1/2) Sdot_12 in pi units
    R = CurvatureTensor(2, {(1, 2, 1, 2): Fraction(9)})
    s = {(1, 2): Multivector(2, {(1, 0): Fraction(4)})}
    assert transgression(R, s, 2) == Multivector(2, {(1, 0): Fraction(-2)})


def test_hodge_variation_operator():
    g = np.empty((2, 2), dtype=object)
    g[:] = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(0)]]
    data = BundleVariationData(n=2, gdot=g)
    C, sig = hodge_variation_operator(data)
    assert C.coefficient(0b01, 0b01) == Fraction(-1)
    assert C.coefficient(0b01, 0b10) == Fraction(-1, 2)
    assert symbol_map(C) == sig


def test_theta_form():
    om = [np.array([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(2)]],
                   dtype=object)]
    phi = np.array([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]],
                   dtype=object)
    data = BundleVariationData(n=1, omega=om, phiF=phi)
    assert theta_form(data) == [0]
    data2 = BundleVariationData(n=1, omega=om)
    assert theta_form(data2) == [3]
