# test_windows.py
# Gaussian, box, Bastiaans dual window and the band-limited example pair
import math

import allure
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from pytest import mark, raises
from pytest_assume.plugin import assume
from scipy import special

from src.errors import DomainError
from src.numeric_core import Grid, composite_gauss_legendre, lattice_sum
from src.windows import (
    WindowSpec,
    amalgam_partial_sums,
    bastiaans,
    bastiaans_eval,
    bastiaans_jumps,
    bastiaans_truncation,
    bastiaans_zak,
    box,
    box_eval,
    calibrate_bastiaans_constant,
    example4_g,
    example4_gamma,
    example4_norms,
    example_g,
    example_gamma,
    gaussian,
    gaussian_eval,
    log_growth_slopes,
    lp_growth_scan,
    window_from_name,
)

C_PSI = calibrate_bastiaans_constant()


@allure.feature("windows")
def test_gaussian_rejects_non_positive_width():
    with raises(DomainError):
        gaussian_eval(0.0, 1.0)
    with raises(DomainError):
        gaussian(-1.0)


@allure.feature("windows")
@mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_gaussian_tail_bound_at_zero_is_the_squared_norm(sigma):
    assert gaussian(sigma).tail_bound(0.0, p=2) == pytest.approx(1.0, rel=1e-11)


@allure.feature("windows")
@mark.parametrize("window", [gaussian(0.5), gaussian(1.0), gaussian(2.0).scaled(2.0)], ids=["0.5", "1", "2x2"])
@mark.parametrize("p", [1, 2])
@mark.parametrize("T", [0.5, 1.0])
def test_gaussian_tail_bound_covers_the_quadrature_tail(window, p, T):
    rule = composite_gauss_legendre(T, T + 12.0, 48, 16)
    tail = 2.0 * float(np.sum(np.abs(window.evaluate(rule.nodes)) ** p * rule.weights))
    bound = window.tail_bound(T, p=p)
    with assume:
        assert tail <= bound * (1 + 1e-9)
    with assume:
        assert tail >= bound * 0.999


@allure.feature("windows")
@mark.parametrize("T, expected", [(0.0, 1.0), (0.25, 0.5), (0.5, 0.0), (1.0, 0.0)])
def test_box_tail_bound_covers_the_sampled_tail(T, expected):
    grid = Grid(T, T + 4.0, 4000)
    tail = 2.0 * float(np.sum(np.abs(box().evaluate(grid.points)) ** 2) * grid.h)
    assert tail <= box().tail_bound(T, p=2)
    assert box().tail_bound(T, p=2) == pytest.approx(expected, abs=1e-12)


@allure.feature("windows")
def test_windows_without_decay_claims_have_infinite_tails():
    for window in (bastiaans(C_PSI), example_g(1.0), example_gamma(1.0)):
        assert math.isinf(window.tail_bound(4.0))


@allure.feature("windows")
def test_box_is_half_open():
    with assume:
        assert box_eval(-0.5) == 1.0
    with assume:
        assert box_eval(0.5) == 0.0
    with assume:
        assert box_eval(0.0) == 1.0


@allure.feature("windows")
def test_unknown_window_names_are_rejected():
    with raises(DomainError):
        window_from_name("hann")
    with raises(DomainError):
        WindowSpec("hann")


@allure.feature("windows")
@allure.title("Bastiaans constant is calibrated to about 1.85")
def test_bastiaans_constant():
    assert 1.8 < C_PSI < 1.9


@allure.feature("windows")
def test_bastiaans_domain_guard():
    with raises(DomainError):
        bastiaans_eval(C_PSI, 9.0)
    assert math.isfinite(bastiaans_eval(C_PSI, 9.0, domain=10.0))


@allure.feature("windows")
@settings(max_examples=30, deadline=None)
@given(floats(0.02, 0.98), floats(0.0, 0.99))
def test_bastiaans_zak_is_the_inverse_of_the_gaussian_zak(x, omega):
    """Z psi conj(Z phi) = 1 away from the pole at (1/2, 1/2)."""
    if abs(x - 0.5) < 0.02 and abs(omega - 0.5) < 0.02:
        return
    zak_phi = lattice_sum(lambda t: gaussian_eval(1.0, t), x, omega, 1.0, 8)
    product = complex(bastiaans_zak(C_PSI, x, omega) * np.conj(zak_phi))
    assert product == pytest.approx(1.0, abs=1e-8)


@allure.feature("windows")
@mark.parametrize("x, omega", [(0.2, 0.3), (0.8, 0.1), (0.05, 0.75)])
def test_bastiaans_resummation_matches_the_direct_lattice_sum(x, omega):
    K = bastiaans_truncation(x)
    direct = lattice_sum(lambda t: bastiaans_eval(C_PSI, t, domain=K + 2), x, omega, 1.0, K)
    assert complex(bastiaans_zak(C_PSI, x, omega)) == pytest.approx(complex(direct), abs=1e-9)


@allure.feature("windows")
def test_direct_bastiaans_sum_refuses_the_jump_line():
    with raises(DomainError):
        bastiaans_truncation(0.5)


@allure.feature("windows")
def test_bastiaans_jumps_sit_on_half_integers():
    report = bastiaans_jumps(C_PSI, Grid(-4.0, 4.0, 8000))
    allure.attach(report.to_json(), name="bastiaans_jumps", attachment_type=allure.attachment_type.JSON)
    assert report.passed, report.failed_checks()
    assert report.get("jump_count").value == 8


@allure.feature("windows")
def test_log_growth_slopes_of_an_exact_logarithm():
    radii = np.array([2.0, 4.0, 6.0, 8.0])
    np.testing.assert_allclose(log_growth_slopes(radii, 3.0 + 2.0 * np.log(radii)), 2.0, rtol=1e-12)


@allure.feature("windows")
def test_bastiaans_energy_grows_logarithmically():
    radii = [2.0, 4.0, 6.0, 8.0]
    energies = lp_growth_scan(C_PSI, radii, p=2)
    slopes = log_growth_slopes(radii, energies)
    with assume:
        assert np.all(np.diff(energies) > 0)
    # raw increments shrink with ln(T_next / T) while the slope per unit of ln T stays level
    with assume:
        assert np.diff(energies)[-1] / np.diff(energies)[0] < 0.5
    with assume:
        assert np.min(slopes) / np.max(slopes) > 0.8


@allure.feature("windows")
@mark.parametrize("a", [0.5, 1.0, 2.0])
def test_example_norms_follow_the_beta_oracles(a):
    g_norm, gamma_norm = example4_norms(a)
    with assume:
        assert g_norm == pytest.approx(math.pi / (8 * a), abs=1e-6)
    with assume:
        assert gamma_norm == pytest.approx(a * math.pi, abs=1e-6)


@allure.feature("windows")
def test_example_values_at_the_origin():
    with assume:
        assert complex(example4_g(1.0, 0.0)) == pytest.approx(special.beta(1.25, 1.25), abs=1e-8)
    with assume:
        assert complex(example4_gamma(1.0, 0.0)) == pytest.approx(special.beta(0.75, 0.75), abs=1e-7)
    with assume:
        assert abs(complex(example4_g(1.0, 0.0)) - 0.61802) < 1e-4


@allure.feature("windows")
@mark.parametrize("a", [1.0, 2.0])
def test_example_g_is_band_limited(a):
    spectrum = example_g(a).fourier(np.array([-1.0, -1e-3, 1.0 / a + 1e-3, 5.0]))
    np.testing.assert_array_equal(spectrum, 0.0)


@allure.feature("windows")
def test_example_window_envelopes_bound_the_samples():
    t = np.linspace(-20.0, 20.0, 801)
    for window in (example_g(1.0), WindowSpec("example4_gamma")):
        assert np.max(np.abs(window.evaluate(t))) <= window.envelope(0.0) * (1 + 1e-9)


@allure.feature("windows")
def test_amalgam_sums():
    with assume:
        assert amalgam_partial_sums(box(), [1, 4]) == [2.0, 2.0]
    sums = amalgam_partial_sums(gaussian(1.0), [1, 2, 4, 8])
    with assume:
        assert sums[-1] - sums[-2] < 1e-12
    with assume:
        assert all(b >= a for a, b in zip(sums[:-1], sums[1:]))
