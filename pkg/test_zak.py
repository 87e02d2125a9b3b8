# test_zak.py
# Discrete Zak transform: unitarity, quasi-periodicity, inversion, zeros and blow-up scans
import math

import allure
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats
from pytest import mark, raises
from pytest_assume.plugin import assume

from src.errors import DomainError, GridMismatchError, TruncationError
from src.numeric_core import Grid
from src.windows import (
    bastiaans,
    bastiaans_eval,
    bastiaans_zak,
    box,
    calibrate_bastiaans_constant,
    example_g,
    gaussian,
    gaussian_eval,
)
from src.zak import (
    ZakField,
    blowup_scan,
    check_quasiperiodicity,
    default_inverse_grid,
    find_zeros,
    write_zak_csv,
    zak_eval,
    zak_forward,
    zak_inverse,
)

PHI = gaussian(1.0)


@allure.feature("zak")
def test_zak_field_needs_eight_nodes_per_axis():
    with raises(DomainError):
        ZakField(1.0, np.zeros((4, 16)))
    with raises(DomainError):
        ZakField(1.0, np.zeros((16, 16)), x_offset=1.0)


@allure.feature("zak")
@allure.title("Zak transform is unitary for a = {a}")
@mark.parametrize("a", [0.5, 1.0, 2.0])
def test_gaussian_zak_is_unitary(a, zak_resolution):
    field = zak_forward(PHI, a, zak_resolution, zak_resolution)
    assert field.norm() == pytest.approx(1.0, abs=1e-8)


@allure.feature("zak")
def test_box_zak_has_unit_modulus(zak_resolution):
    field = zak_forward(box(), 1.0, zak_resolution, zak_resolution)
    np.testing.assert_allclose(np.abs(field.values), 1.0, atol=1e-14)
    assert field.norm() == pytest.approx(1.0, abs=1e-12)


@allure.feature("zak")
def test_gaussian_zak_vanishes_at_the_half_node():
    assert abs(complex(zak_eval(PHI, 1.0, 0.5, 0.5))) < 1e-12


@allure.feature("zak")
@settings(max_examples=25, deadline=None)
@given(floats(0.0, 1.0), floats(0.0, 1.0))
def test_gaussian_zak_is_quasiperiodic(x, omega):
    base = complex(zak_eval(PHI, 1.0, x, omega, K=10))
    with assume:
        assert complex(zak_eval(PHI, 1.0, x + 1.0, omega, K=10)) == pytest.approx(
            np.exp(2j * np.pi * omega) * base, abs=1e-12)
    with assume:
        assert complex(zak_eval(PHI, 1.0, x, omega + 1.0, K=10)) == pytest.approx(base, abs=1e-12)


@allure.feature("zak")
@mark.parametrize("a", [1.0, 2.0])
def test_quasiperiodicity_report(a, run_config):
    field = zak_forward(PHI, a, 64, 64)
    report = check_quasiperiodicity(field, PHI, run_config["quasiperiodicity_nodes"], seed=run_config["seed"])
    assert report.passed, report.failed_checks()


@allure.feature("zak")
@mark.parametrize("window, tolerance", [(box(), 1e-12), (example_g(1.0), 1e-8)], ids=["box", "example_g"])
def test_quasiperiodicity_of_the_box_and_the_example_window(window, tolerance, run_config):
    field = zak_forward(window, 1.0, 64, 64)
    report = check_quasiperiodicity(field, window, run_config["quasiperiodicity_nodes"], tolerance=tolerance,
                                    seed=run_config["seed"])
    assert report.passed, report.failed_checks()


@allure.feature("zak")
def test_forward_then_inverse_recovers_the_gaussian(zak_resolution):
    field = zak_forward(PHI, 1.0, zak_resolution, zak_resolution)
    grid = default_inverse_grid(field)
    recovered = zak_inverse(field)
    assert recovered.grid == grid
    np.testing.assert_allclose(recovered.values, gaussian_eval(1.0, grid.points), atol=1e-10)


@allure.feature("zak")
def test_inverse_rejects_a_target_with_another_spacing(zak_resolution):
    field = zak_forward(PHI, 1.0, zak_resolution, zak_resolution)
    with raises(GridMismatchError):
        zak_inverse(field, target=Grid(-4.0, 4.0, 100))


@allure.feature("zak")
def test_inverse_rejects_cells_beyond_half_the_frequency_nodes():
    field = zak_forward(PHI, 1.0, 16, 16)
    with raises(DomainError):
        zak_inverse(field, target=default_inverse_grid(field, cells=8))


@allure.feature("zak")
@allure.title("Inverting 1 / conj(Z phi) gives the Bastiaans window")
def test_inverse_of_the_bastiaans_zak_field():
    c_psi = calibrate_bastiaans_constant()
    shell = ZakField(1.0, np.zeros((64, 64)), 0.0, 0.5)
    field = shell.with_values(bastiaans_zak(c_psi, shell.x[:, None], shell.omega[None, :]))
    recovered = zak_inverse(field, target=default_inverse_grid(field, cells=3))
    for t in (-1.25, 0.0, 0.25, 0.75, 2.0):
        index = int(np.argmin(np.abs(recovered.grid.points - t)))
        with assume:
            assert recovered.values[index] == pytest.approx(bastiaans_eval(c_psi, t), abs=1e-6)


@allure.feature("zak")
def test_too_small_lattice_radius_raises_truncation_error():
    with raises(TruncationError) as excinfo:
        zak_forward(PHI, 1.0, 16, 16, K=1)
    assert excinfo.value.attained > 1e-10


@allure.feature("zak")
def test_bastiaans_closed_form_is_only_defined_for_unit_lattice():
    with raises(DomainError):
        zak_forward(bastiaans(), 2.0, 16, 16)


@allure.feature("zak")
def test_gaussian_has_a_single_zero_at_the_half_node(zak_resolution):
    zeros = find_zeros(zak_forward(PHI, 1.0, zak_resolution, zak_resolution))
    assert len(zeros) == 1
    x, omega = zeros[0]
    assert math.hypot(x - 0.5, omega - 0.5) <= 1.0 / zak_resolution


@allure.feature("zak")
@allure.title("|Z phi|^-2 diverges logarithmically, |Z box|^-2 and |Z g_1|^-2 stay bounded")
def test_blowup_scans(run_config):
    n = 512
    with allure.step("Gaussian: constant increments per halving"):
        report = blowup_scan(zak_forward(PHI, 1.0, n, n), (0.5, 0.5), run_config["blowup_radii"], expect="log",
                             spread=run_config["blowup_spread"])
        allure.attach(report.to_json(), name="gaussian_blowup", attachment_type=allure.attachment_type.JSON)
        with assume:
            assert report.passed, report.failed_checks()
    with allure.step("Box: bounded integrals"):
        report = blowup_scan(zak_forward(box(), 1.0, n, n), (0.5, 0.5), run_config["blowup_radii"],
                             expect="bounded")
        with assume:
            assert report.passed, report.failed_checks()
        with assume:
            assert report.warnings
    with allure.step("Example pair: integrals stay below pi"):
        report = blowup_scan(zak_forward(example_g(1.0), 1.0, n, n), (0.5, 0.0), run_config["blowup_radii"],
                             expect="bounded", bound=math.pi)
        integrals = report.get("increment_ratio").meta["integrals"]
        with assume:
            assert report.passed, report.failed_checks()
        with assume:
            assert integrals == sorted(integrals)
        with assume:
            assert 2.9 < integrals[-1] < math.pi


@allure.feature("zak")
def test_zak_csv_layout(tmp_path):
    field = zak_forward(PHI, 1.0, 8, 8)
    path = tmp_path / "zak.csv"
    write_zak_csv(field, path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["x", "omega", "re", "im"]
    assert len(df) == 64
    np.testing.assert_allclose(np.unique(df["x"]), field.x)
