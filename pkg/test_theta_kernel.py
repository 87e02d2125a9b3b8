# test_theta_kernel.py
# Gram sequence of the Gaussian system, the symbol Theta and kernel elements of the synthesis operator
import math

import allure
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from pytest import mark, raises
from pytest_assume.plugin import assume

from src.errors import DomainError
from src.gabor import LatticeSeq
from src.theta_kernel import (
    KernelPoly,
    certified_kernel_basis,
    gram_seq,
    gram_tail,
    kernel_convolution_check,
    kernel_membership_report,
    kernel_poly_eval,
    theta_derivatives,
    theta_eval,
    theta_grid,
    theta_grid_scan,
    theta_hessian_check,
    theta_product,
    theta_product_check,
    vartheta,
    write_theta_csv,
)


@allure.feature("theta_kernel")
def test_gram_entries():
    with assume:
        assert vartheta(0, 0) == 1.0
    with assume:
        assert vartheta(1, 1) == pytest.approx(-math.exp(-math.pi))
    with assume:
        assert vartheta(2, 1) == pytest.approx(math.exp(-5 * math.pi / 2))
    seq = gram_seq(5)
    with assume:
        assert seq.get(-1, 1) == pytest.approx(-math.exp(-math.pi))
    with assume:
        assert seq.get(6, 0) == 0.0


@allure.feature("theta_kernel")
def test_gram_tail_bounds_the_dropped_entries():
    r = np.arange(-20, 21)
    n, m = np.meshgrid(r, r, indexing="ij")
    outside = (np.abs(n) > 5) | (np.abs(m) > 5)
    assert np.sum(np.abs(vartheta(n, m))[outside]) <= gram_tail(5)


@allure.feature("theta_kernel")
def test_theta_needs_a_radius_of_five():
    with raises(DomainError):
        theta_eval((0.1, 0.2), R=3)


@allure.feature("theta_kernel")
@allure.title("Theta vanishes at (1/2, 1/2)")
def test_theta_vanishes_at_the_half_node():
    assert abs(theta_eval((0.5, 0.5))) < 1e-12
    assert theta_eval((0.0, 0.0)) > 1.0


@allure.feature("theta_kernel")
@settings(max_examples=40, deadline=None)
@given(floats(0.0, 1.0), floats(0.0, 1.0))
def test_double_sum_matches_the_product_form(w1, w2):
    point = np.array([w1, w2])
    assert theta_eval(point) == pytest.approx(theta_product(point), abs=1e-12)


@allure.feature("theta_kernel")
@settings(max_examples=40, deadline=None)
@given(floats(0.0, 1.0), floats(0.0, 1.0))
def test_theta_is_even_and_nonnegative(w1, w2):
    value = theta_eval((w1, w2))
    with assume:
        assert value >= -1e-12
    with assume:
        assert theta_eval((-w1, -w2)) == pytest.approx(value, abs=1e-13)


@allure.feature("theta_kernel")
def test_grid_agrees_with_the_double_sum():
    values = theta_grid(16)
    i, j = 3, 11
    assert values[i, j] == pytest.approx(theta_eval((i / 16, j / 16)), abs=1e-13)


@allure.feature("theta_kernel")
@mark.parametrize("n", [64, 256])
def test_grid_scan(n):
    report = theta_grid_scan(n)
    allure.attach(report.to_json(), name=f"theta_grid_scan_{n}", attachment_type=allure.attachment_type.JSON)
    assert report.passed, report.failed_checks()


@allure.feature("theta_kernel")
def test_product_check_and_hessian():
    with assume:
        assert theta_product_check(50, seed=3).passed
    report = theta_hessian_check()
    with assume:
        assert report.passed, report.failed_checks()


@allure.feature("theta_kernel")
def test_finite_difference_step_range():
    with raises(DomainError):
        theta_derivatives(h=0.1)
    with raises(DomainError):
        theta_derivatives(h=1e-6)


@allure.feature("theta_kernel")
def test_kernel_polynomials_alternate():
    p = KernelPoly({(1, 0): 2.0, (0, 0): 1.0})
    assert kernel_poly_eval(p, 1, 0) == pytest.approx(-3.0)
    assert kernel_poly_eval(p, 1, 1) == pytest.approx(3.0)
    assert p.N == 1
    with raises(DomainError):
        KernelPoly({(-1, 0): 1.0})


@allure.feature("theta_kernel")
@mark.parametrize("name", sorted(certified_kernel_basis()))
def test_certified_kernel_elements(name):
    p = certified_kernel_basis()[name]
    worst = max(abs(kernel_convolution_check(p, n, m)) for n in range(-4, 5) for m in range(-4, 5))
    assert worst <= 1e-10


@allure.feature("theta_kernel")
def test_convolution_radius_guards():
    with raises(DomainError):
        kernel_convolution_check(KernelPoly.constant(), 0, 0, R=4)
    with raises(DomainError):
        kernel_convolution_check(LatticeSeq.zeros(8), 0, 0, R=10)


@allure.feature("theta_kernel")
@allure.title("Kernel membership report with the n^2 + m^2 counterexample")
def test_kernel_membership_report():
    report = kernel_membership_report()
    allure.attach(report.to_json(), name="kernel_membership", attachment_type=allure.attachment_type.JSON)
    with assume:
        assert report.passed, report.failed_checks()
    with assume:
        assert report.get("n2_plus_m2.not_in_kernel").value < 0


@allure.feature("theta_kernel")
def test_theta_csv_layout(tmp_path):
    path = tmp_path / "theta.csv"
    write_theta_csv(theta_grid(8), path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["omega1", "omega2", "theta"]
    assert len(df) == 64
    assert df["theta"].min() > -1e-12
