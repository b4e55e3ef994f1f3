"""Tests for the Fourier-mode circle model."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistzeta.circle import (
    CrossedElement,
    DirichletSum,
    MoebiusMap,
    TrigPoly,
    build_dirac,
    build_dlog,
    build_phase,
    circle_zeta,
    circle_zeta_poles,
    circle_zeta_value,
    conformal_twist,
    derivative_abs_poly,
    dirac_commutator,
    inner_block,
    log_dirac_commutator,
    moebius_rectangle,
    moebius_unitary,
    mult_op,
    numerical_rank,
    riemann_zeta,
    stabilized_dirichlet,
    toeplitz_index,
    twisted_dirac_commutator,
    winding_number,
)

STRETCH = MoebiusMap.hyperbolic(1.0)


def phase_commutator(symbol: TrigPoly, max_mode: int) -> np.ndarray:
    signs = build_phase(max_mode)
    matrix = mult_op(symbol, max_mode)
    return signs[:, None] * matrix - matrix * signs[None, :]


def test_dirac_diagonal_matches_the_stated_modes():
    eigenvalues = build_dirac(8)
    assert eigenvalues[8] == 1.0
    assert eigenvalues[8 + 5] == 5.0
    assert eigenvalues[8 - 3] == -3.0
    assert np.all(eigenvalues != 0.0)


def test_dlog_vanishes_on_the_low_modes():
    eigenvalues = build_dlog(9)
    for mode in (-1, 0, 1):
        assert eigenvalues[9 + mode] == 0.0
    assert eigenvalues[9 - 4] == pytest.approx(-math.log(4.0))
    assert eigenvalues[9 + 9] == pytest.approx(math.log(9.0))


def test_mult_op_identity_and_coordinate_shift():
    assert np.array_equal(mult_op(TrigPoly.one(), 5), np.eye(11))
    shift = mult_op(TrigPoly.coordinate(), 5)
    assert np.array_equal(shift, np.diag(np.ones(10), k=-1))


def test_phase_commutator_with_coordinate_is_rank_one_norm_two():
    max_mode = 64
    jump = phase_commutator(TrigPoly.coordinate(), max_mode)
    assert numerical_rank(jump) == 1
    assert abs(np.linalg.norm(jump, 2) - 2.0) < 1e-10
    expected = np.zeros_like(jump)
    expected[max_mode, max_mode - 1] = 2.0
    assert np.array_equal(jump, expected)


@settings(max_examples=60, deadline=None)
@given(
    raw=st.dictionaries(
        st.integers(min_value=-5, max_value=5),
        st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
        min_size=1,
        max_size=5,
    )
)
def test_finite_rank_commutator_bound(raw):
    coefficients = {
        mode: complex(re, im) / 4.0 for mode, (re, im) in raw.items() if (re, im) != (0, 0)
    }
    symbol = TrigPoly.from_dict(coefficients)
    bound = symbol.analytic_degree + symbol.coanalytic_degree
    rank = numerical_rank(phase_commutator(symbol, 32), tol=1e-10)
    assert rank <= bound


def test_one_sided_symbols_meet_the_tight_rank_bound():
    for degree in (1, 2, 3):
        forward = phase_commutator(TrigPoly.coordinate(degree), 32)
        backward = phase_commutator(TrigPoly.coordinate(-degree), 32)
        assert numerical_rank(forward) == degree
        assert numerical_rank(backward) == degree


def test_moebius_map_validation_and_inverse():
    with pytest.raises(ValueError):
        MoebiusMap(1.0, 1.0)
    assert abs(abs(STRETCH.a) ** 2 - abs(STRETCH.b) ** 2 - 1.0) < 1e-12
    points = np.exp(1j * np.linspace(0.3, 5.9, 7))
    roundtrip = STRETCH.inverse().apply(STRETCH.apply(points))
    assert np.max(np.abs(roundtrip - points)) < 1e-12
    assert np.max(np.abs(np.abs(STRETCH.apply(points)) - 1.0)) < 1e-12


def test_moebius_powers_compose_exactly():
    cubed = STRETCH.power(3)
    chained = STRETCH.compose(STRETCH).compose(STRETCH)
    assert cubed.a == pytest.approx(chained.a)
    assert cubed.b == pytest.approx(chained.b)
    inverse_square = STRETCH.power(-2)
    direct = STRETCH.inverse().compose(STRETCH.inverse())
    assert inverse_square.a == pytest.approx(direct.a)
    assert inverse_square.b == pytest.approx(direct.b)
    assert STRETCH.power(0).a == 1.0


def test_moebius_unitary_identity_window():
    result = moebius_unitary(MoebiusMap.identity(), 16, 128)
    assert result.defect < 1e-12
    assert np.max(np.abs(result.matrix - np.eye(33))) < 1e-12


def test_moebius_unitary_defect_is_quadrature_small():
    result = moebius_unitary(STRETCH, 64, 512)
    assert result.defect < 1e-8
    assert result.defect < 1e-12
    column_norms = np.linalg.norm(result.matrix, axis=0)
    assert np.all(column_norms <= 1.0 + 1e-10)


def test_moebius_unitary_requires_enough_quadrature():
    with pytest.raises(ValueError):
        moebius_unitary(STRETCH, 64, 511)
    with pytest.raises(ValueError, match="quadrature defect"):
        moebius_unitary(MoebiusMap.hyperbolic(4.0), 64, 512)


def test_moebius_group_law_on_padded_rectangles():
    max_mode = 32
    pad = 3 * max_mode + 16
    quad = 8 * pad
    forward = moebius_rectangle(STRETCH, max_mode, pad, quad)
    backward = moebius_rectangle(STRETCH.inverse(), pad, max_mode, quad)
    deviation = forward @ backward - np.eye(2 * max_mode + 1)
    assert np.linalg.norm(deviation, 2) < 1e-8


def test_moebius_unitary_intertwines_multiplication():
    max_mode = 32
    pad = 3 * max_mode + 16
    quad = 8 * pad
    symbol = TrigPoly.from_dict({0: 0.25, 1: 1.0, -2: 0.5, 4: 0.05})
    angles = 2.0 * np.pi * np.arange(4096) / 4096
    points = np.exp(1j * angles)
    composed_values = np.array([symbol.evaluate(STRETCH.apply(p)) for p in points])
    composed = TrigPoly.from_samples(composed_values, 1e-10)
    forward = moebius_rectangle(STRETCH, max_mode, pad, quad)
    backward = moebius_rectangle(STRETCH.inverse(), pad, max_mode, quad)
    conjugated = forward @ mult_op(symbol, pad) @ backward
    assert np.linalg.norm(conjugated - mult_op(composed, max_mode), 2) < 1e-7


def test_conformal_twist_keeps_untwisted_terms():
    element = CrossedElement.multiplication(TrigPoly.from_dict({2: 1.5, -1: 0.5}))
    assert conformal_twist(element, STRETCH) == element


def test_conformal_twist_multiplies_by_derivative_powers():
    base = TrigPoly.from_dict({1: 1.0, 0: 0.5})
    element = CrossedElement(((2, base),))
    twisted = conformal_twist(element, STRETCH)
    (power, weighted), = twisted.terms
    assert power == 2
    points = np.exp(1j * np.linspace(0.1, 6.2, 9))
    for point in points:
        expect = base.evaluate(point) * STRETCH.derivative_abs(point) ** 2
        assert weighted.evaluate(point) == pytest.approx(expect, abs=1e-8)


def test_conformal_twist_reports_unresolved_tails():
    element = CrossedElement.generator()
    with pytest.raises(ValueError, match="tail tolerance"):
        conformal_twist(element, STRETCH, samples=32)


def test_negative_twist_powers_have_exact_small_bandwidth():
    inverse_weight = derivative_abs_poly(STRETCH, -1)
    assert inverse_weight.bandwidth == 1
    assert inverse_weight.coefficient(0) == pytest.approx(math.cosh(1.0))
    assert derivative_abs_poly(STRETCH, -3).bandwidth == 3


def test_twisted_commutator_identity_on_the_window():
    max_mode = 24
    matrix = mult_op(TrigPoly.from_dict({1: 1.0, -2: 0.5, 0: -0.25}), max_mode)
    eigenvalues = build_dirac(max_mode)
    magnitudes = np.abs(eigenvalues)
    twisted = eigenvalues[:, None] * matrix - (
        magnitudes[:, None] * matrix / magnitudes[None, :]
    ) * eigenvalues[None, :]
    signs = build_phase(max_mode)
    reference = magnitudes[:, None] * (signs[:, None] * matrix - matrix * signs[None, :])
    assert np.max(np.abs(twisted - reference)) < 1e-13


def test_twisted_commutator_plateau_and_plain_growth_smoke():
    element = CrossedElement.generator()
    twisted_norms = []
    plain_norms = []
    logged_norms = []
    for max_mode in (32, 64, 128):
        quad = 8 * max_mode
        twisted_norms.append(
            np.linalg.norm(inner_block(twisted_dirac_commutator(element, STRETCH, max_mode, quad)), 2)
        )
        plain_norms.append(
            np.linalg.norm(inner_block(dirac_commutator(element, STRETCH, max_mode, quad)), 2)
        )
        logged_norms.append(
            np.linalg.norm(inner_block(log_dirac_commutator(element, STRETCH, max_mode, quad)), 2)
        )
    assert max(twisted_norms) / min(twisted_norms) < 1.01
    assert abs(twisted_norms[-1] - 1.421187) < 1e-3
    assert max(logged_norms) / min(logged_norms) < 1.05
    for earlier, later in zip(plain_norms, plain_norms[1:]):
        assert later / earlier > 1.9


def test_toeplitz_index_of_the_coordinate():
    assert toeplitz_index(TrigPoly.coordinate(), 128) == -1
    assert toeplitz_index(TrigPoly.one(), 64) == 0


def test_toeplitz_index_matches_the_winding_oracle():
    square = TrigPoly.coordinate(2)
    expected = -winding_number(square)
    assert expected == -2
    assert toeplitz_index(square, 128) == expected
    reversed_coordinate = TrigPoly.coordinate(-1)
    assert toeplitz_index(reversed_coordinate, 128) == -winding_number(reversed_coordinate) == 1
    shifted = TrigPoly.from_dict({0: 2.0, 1: 1.0})
    assert toeplitz_index(shifted, 64) == -winding_number(shifted) == 0


def test_toeplitz_index_input_guards():
    cosine = TrigPoly.from_dict({1: 1.0, -1: 1.0})
    with pytest.raises(ValueError, match="invertible"):
        toeplitz_index(cosine, 64)
    with pytest.raises(ValueError, match="window"):
        toeplitz_index(TrigPoly.coordinate(3), 7)
    with pytest.raises(ValueError):
        toeplitz_index(TrigPoly.from_dict({}), 64)


def test_winding_numbers_on_sample_symbols():
    assert winding_number(TrigPoly.coordinate()) == 1
    assert winding_number(TrigPoly.coordinate(-1)) == -1
    assert winding_number(TrigPoly.coordinate(3)) == 3
    assert winding_number(TrigPoly.from_dict({0: 2.0, 1: 1.0})) == 0
    with pytest.raises(ValueError, match="vanishes"):
        winding_number(TrigPoly.from_dict({1: 1.0, -1: 1.0}))


def test_zeta_continuation_reference_values():
    assert abs(riemann_zeta(2.0) - math.pi**2 / 6.0) < 1e-13
    assert abs(riemann_zeta(0.0) - (-0.5)) < 1e-13
    assert abs(riemann_zeta(-1.0) - (-1.0 / 12.0)) < 1e-13
    assert abs(riemann_zeta(3.0) - 1.2020569031595943) < 1e-13
    mirrored = riemann_zeta(complex(2.0, 3.0))
    assert riemann_zeta(complex(2.0, -3.0)) == pytest.approx(mirrored.conjugate())
    with pytest.raises(ValueError):
        riemann_zeta(1.0)


def test_zeta_trace_pole_and_residue():
    unit = TrigPoly.one()
    assert circle_zeta_poles(unit) == ((0.5, 1.0 + 0.0j),)
    spacing = 1e-6
    probe = spacing * circle_zeta_value(unit, 0.5 + spacing)
    assert abs(probe - 1.0) < 1e-4
    for degree in range(4):
        assert circle_zeta(unit, degree) == 0.0
    coordinate = TrigPoly.coordinate()
    assert circle_zeta_poles(coordinate) == ()
    assert circle_zeta_value(coordinate, 0.7) == 0.0
    with pytest.raises(ValueError):
        circle_zeta(unit, -1)
    with pytest.raises(TypeError):
        circle_zeta(np.eye(3), 0)


def test_dirichlet_stabilization_certificate():
    def builder(max_mode: int) -> np.ndarray:
        jump = phase_commutator(TrigPoly.coordinate(), max_mode)
        profile = np.diag(1.0 / (1.0 + build_dirac(max_mode) ** 2))
        return mult_op(TrigPoly.coordinate(-1), max_mode) @ jump @ profile.astype(complex)

    certified = stabilized_dirichlet(builder, (8, 16))
    assert certified.terms == ((1.0, 1.0 + 0.0j),)
    assert circle_zeta(certified, 2) == 0.0
    assert circle_zeta_poles(certified) == ()
    assert certified.evaluate(0.35) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="stabilized"):
        stabilized_dirichlet(lambda size: np.eye(2 * size + 1, dtype=complex), (8, 16))


def test_exponentiated_phase_weights_stay_summable():
    for exponent in (0.5, 1.0, 2.0):
        partials = []
        for window in (20, 40, 80):
            eigenvalues = np.abs(build_dirac(window))
            partials.append(float(np.sum(np.exp(-exponent * eigenvalues))))
        first_gap = abs(partials[1] - partials[0])
        second_gap = abs(partials[2] - partials[1])
        assert second_gap <= first_gap
        assert second_gap < 1e-6


def test_trigpoly_arithmetic_and_grids():
    left = TrigPoly.from_dict({1: 2.0, -1: 1.0})
    right = TrigPoly.from_dict({0: 1.0, 2: -0.5})
    product = left * right
    grid = np.exp(1j * np.linspace(0.2, 6.0, 11))
    for point in grid:
        assert product.evaluate(point) == pytest.approx(
            left.evaluate(point) * right.evaluate(point)
        )
    assert left.conjugate().as_dict() == {1: 1.0, -1: 2.0}
    sampled = TrigPoly.from_samples(left.values_on_grid(64), 1e-12)
    assert sampled.as_dict() == pytest.approx(left.as_dict())
    with pytest.raises(ValueError):
        left.values_on_grid(2)
