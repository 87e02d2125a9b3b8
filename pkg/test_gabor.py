# test_gabor.py
# Lattices, synthesis/analysis, Zak-diagonalized frame operator, Schauder ratios and box-ONB coefficients
import allure
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from pytest import mark, raises
from pytest_assume.plugin import assume

from src.errors import DomainError, GridMismatchError
from src.gabor import (
    LatticeParams,
    LatticeSeq,
    analysis_coefficients,
    box_onb_coefficients,
    compare_frame_operators,
    frame_operator_zak,
    frame_symbol,
    gabor_synthesis,
    reppair_zak_bounds,
    schauder_ratio,
    schauder_refinement_scan,
    semiframe_duality_check,
    stft_sample,
    zak_aligned_offset,
)
from src.numeric_core import Grid, inner_product, tf_shift
from src.partner import BoxCombination, PartnerConfig, gaussian_box_overlaps
from src.theta_kernel import vartheta
from src.windows import box, example_g, example_gamma, gaussian
from src.zak import zak_forward

PHI = gaussian(1.0)
CRITICAL = LatticeParams()


@allure.feature("gabor")
def test_lattice_parameters_are_validated():
    with raises(DomainError):
        LatticeParams(0.0, 1.0)
    with raises(DomainError):
        LatticeParams(1.0, 2.0).require_critical()
    assert LatticeParams.critical(0.5).density == pytest.approx(1.0)


@allure.feature("gabor")
def test_lattice_seq_shape_and_lookup():
    with raises(DomainError):
        LatticeSeq(np.zeros((4, 4)))
    with raises(DomainError):
        LatticeSeq(np.zeros((1, 1)))
    seq = LatticeSeq.delta(2, [(1, -2)])
    with assume:
        assert seq.get(1, -2) == 1.0
    with assume:
        assert seq.get(5, 0) == 0j
    with assume:
        assert (seq + seq * 2.0).get(1, -2) == 3.0


@allure.feature("gabor")
@allure.title("Gabor coefficients of the Gaussian are the Gram sequence")
def test_gaussian_analysis_coefficients():
    f = PHI.sample(Grid.default())
    coefficients = analysis_coefficients(f, PHI, CRITICAL, 3)
    n, m = coefficients.indices
    np.testing.assert_allclose(coefficients.values, vartheta(n, m), atol=1e-10)


@allure.feature("gabor")
@mark.parametrize("x, omega", [(0, 0), (1, -1), (2, 1)])
def test_stft_of_the_gaussian_on_the_lattice(x, omega):
    f = PHI.sample(Grid.default())
    assert stft_sample(f, PHI, x, omega) == pytest.approx(vartheta(x, omega), abs=1e-10)


@allure.feature("gabor")
def test_stft_rejects_a_window_on_another_grid():
    f = PHI.sample(Grid.default())
    with raises(GridMismatchError):
        stft_sample(f, PHI.sample(Grid(-4.0, 4.0, 256)), 0.0, 0.0)


@allure.feature("gabor")
def test_synthesis_of_a_delta_is_the_shifted_window():
    grid = Grid.default()
    synthesized = gabor_synthesis(LatticeSeq.delta(1, [(1, -1)]), PHI, CRITICAL, grid)
    expected = tf_shift(PHI.sample(grid), 1.0, -1.0)
    np.testing.assert_allclose(synthesized.values, expected.values, atol=1e-13)


@allure.feature("gabor")
@settings(max_examples=10, deadline=None)
@given(floats(-1.0, 1.0), floats(-1.0, 1.0))
def test_synthesis_and_analysis_are_adjoint(re, im):
    grid = Grid.default()
    xi = LatticeSeq.from_function(2, lambda n, m: np.exp(-(n * n + m * m)) * complex(re, im))
    f = tf_shift(PHI.sample(grid), 0.3, -0.7)
    left = complex(np.sum(analysis_coefficients(f, PHI, CRITICAL, 2).values * np.conj(xi.values)))
    right = inner_product(f, gabor_synthesis(xi, PHI, CRITICAL, grid))
    assert left == pytest.approx(right, abs=1e-10)


@allure.feature("gabor")
def test_zak_alignment_needs_a_dividing_spacing():
    assert zak_aligned_offset(Grid.zak_aligned(), 1.0) == (256, 0.5)
    with raises(GridMismatchError):
        zak_aligned_offset(Grid(-1.0, 1.0, 25), 1.0)


@allure.feature("gabor")
@allure.title("Example pair reconstructs through the Zak-diagonalized frame operator")
def test_example_pair_reconstructs_the_gaussian():
    f = PHI.sample(Grid.zak_aligned())
    reconstructed = frame_operator_zak(example_g(1.0), example_gamma(1.0), CRITICAL, f)
    assert (reconstructed - f).norm() < 1e-8


@allure.feature("gabor")
def test_frame_operator_needs_critical_density():
    with raises(DomainError):
        frame_operator_zak(PHI, PHI, LatticeParams(1.0, 0.5), PHI.sample(Grid.zak_aligned()))


@allure.feature("gabor")
@mark.slow
def test_direct_and_zak_frame_operators_agree():
    grid = Grid.zak_aligned()
    signals = [PHI.sample(grid), tf_shift(PHI.sample(grid), 0.5, 0.25)]
    report = compare_frame_operators(PHI, PHI, CRITICAL, signals, R=8, tolerance=1e-6)
    allure.attach(report.to_json(), name="frame_operator_agreement", attachment_type=allure.attachment_type.JSON)
    assert report.passed, report.failed_checks()


@allure.feature("gabor")
def test_example_pair_symbol_is_one(zak_resolution):
    symbol = frame_symbol(example_g(1.0), example_gamma(1.0), 1.0, zak_resolution)
    finite = symbol.finite_mask
    assert finite.sum() > 0.9 * finite.size
    np.testing.assert_allclose(symbol.values[finite], 1.0, atol=1e-10)


@allure.feature("gabor")
def test_example_pair_bounds(zak_resolution):
    report = reppair_zak_bounds(example_g(1.0), example_gamma(1.0), 1.0, n=zak_resolution)
    with assume:
        assert report.passed, report.failed_checks()
    with assume:
        assert report.get("lower_bound_positive").value == pytest.approx(1.0, abs=1e-6)


@allure.feature("gabor")
@mark.parametrize("interval", [((0.1, 0.3), (0.6, 0.9)), ((0.4, 0.6), (0.4, 0.6)), ((0.8, 1.2), (-0.1, 0.1))])
def test_schauder_ratio_is_at_least_one(interval):
    field = zak_forward(PHI, 1.0, 64, 64, x_offset=0.5, omega_offset=0.5)
    assert schauder_ratio(field, *interval) >= 1.0 - 1e-12


@allure.feature("gabor")
@mark.slow
def test_schauder_ratio_grows_around_the_gaussian_zero():
    report = schauder_refinement_scan(PHI, (0.5, 0.5), 0.1, expect="growth")
    with assume:
        assert report.passed, report.failed_checks()
    report = schauder_refinement_scan(example_g(1.0), (0.25, 0.0), 0.1, expect="bounded")
    with assume:
        assert report.passed, report.failed_checks()


@allure.feature("gabor")
def test_box_onb_coefficients_of_a_box_combination_are_exact():
    combination = BoxCombination.of({(1, 2): 1.0, (-2, 0): 0.5j})
    coefficients = box_onb_coefficients(combination.sample(Grid.default()), 3)
    np.testing.assert_allclose(coefficients.values, combination.lattice_seq(3).values, atol=1e-12)


@allure.feature("gabor")
def test_box_onb_coefficients_of_the_gaussian_match_the_overlaps():
    coefficients = box_onb_coefficients(PHI.sample(Grid.default()), 4)
    overlaps = gaussian_box_overlaps(4, 4, PartnerConfig(c_psi=1.0))
    np.testing.assert_allclose(coefficients.values, overlaps, atol=1e-12)


@allure.feature("gabor")
def test_semiframe_duality_with_the_gaussian_as_its_own_partner(zak_resolution):
    signals = [PHI.sample(Grid.default()), tf_shift(PHI.sample(Grid.default()), 0.5, 0.25)]
    report = semiframe_duality_check(PHI, CRITICAL, lambda f: analysis_coefficients(f, PHI, CRITICAL, 8),
                                     signals, n=zak_resolution)
    bessel = report.get("bessel_bound_finite").value
    with assume:
        assert 1.0 < bessel < 2.0
    with assume:
        assert report.passed, [c.check for c in report.failed_checks()]


@allure.feature("gabor")
def test_synthesis_is_linear_in_the_coefficients():
    rng = np.random.default_rng(7)
    first = LatticeSeq(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    second = LatticeSeq(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    grid = Grid(-3.0, 3.0, 600)
    combined = gabor_synthesis(first * (2.0 - 0.5j) + second, PHI, CRITICAL, grid)
    separate = (gabor_synthesis(first, PHI, CRITICAL, grid).values * (2.0 - 0.5j)
                + gabor_synthesis(second, PHI, CRITICAL, grid).values)
    np.testing.assert_allclose(combined.values, separate, atol=1e-12)


@allure.feature("gabor")
def test_reppair_bounds_scale_with_the_partner(zak_resolution):
    c = 2.0 - 1.0j
    plain = reppair_zak_bounds(example_g(1.0), example_gamma(1.0), 1.0, n=zak_resolution)
    scaled = reppair_zak_bounds(example_g(1.0), example_gamma(1.0).scaled(c), 1.0, n=zak_resolution)
    for check in ("lower_bound_positive", "upper_bound_finite"):
        with assume:
            assert scaled.get(check).value == pytest.approx(abs(c) * plain.get(check).value, rel=1e-12)


@allure.feature("gabor")
@mark.parametrize("interval", [((0.1, 0.3), (0.6, 0.9)), ((0.4, 0.6), (0.4, 0.6)), ((0.8, 1.2), (-0.1, 0.1))])
def test_schauder_ratio_of_the_box_is_one(interval):
    field = zak_forward(box(), 1.0, 64, 64)
    assert schauder_ratio(field, *interval) == pytest.approx(1.0, abs=1e-12)


@allure.feature("gabor")
@allure.title("The box ONB is its own partner with Bessel bound one")
def test_semiframe_duality_for_the_box_onb(zak_resolution):
    grid = Grid(-4.0, 4.0, 2048)
    combination = BoxCombination.of({(1, 2): 1.0, (-2, 0): 0.5j, (0, -1): 0.25})
    report = semiframe_duality_check(box(), CRITICAL, lambda f: box_onb_coefficients(f, 3),
                                     [combination.sample(grid)], n=zak_resolution)
    with assume:
        assert report.get("bessel_bound_finite").value == pytest.approx(1.0, abs=1e-12)
    with assume:
        assert report.get("signal_0.lower_ratio").value == pytest.approx(1.0, abs=1e-10)
    with assume:
        assert report.get("signal_0.bessel_ratio").value == pytest.approx(1.0, abs=1e-10)
    with assume:
        assert report.passed, [c.check for c in report.failed_checks()]
