# test_cli.py
# Command-line surface, artifact writers and the verify suites
import json

import allure
import numpy as np
import pandas as pd
from pytest import mark, raises
from pytest_assume.plugin import assume

from repgabor import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, column_radii, main
from src.errors import DomainError
from src.numeric_core import read_signal_csv
from src.plotting import plot_complex_panels, sidecar_path
from src.suites import SUITES, run_verify, write_example4_artifacts


@allure.feature("cli")
def test_theta_grid_command_writes_csv(tmp_path):
    out = tmp_path / "theta.csv"
    assert main(["theta", "grid", "--grid", "8", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert len(df) == 64
    assert list(df.columns) == ["omega1", "omega2", "theta"]
    sidecar = json.loads((tmp_path / "theta.json").read_text())
    assert sidecar["config"]["grid"] == 8
    assert sidecar["rows"] == 64


@allure.feature("cli")
def test_zak_command_writes_csv_and_report(tmp_path):
    out, report = tmp_path / "zak.csv", tmp_path / "reports" / "zak.json"
    status = main(["zak", "--window", "gaussian", "--grid", "32", "--out", str(out), "--json", str(report)])
    data = json.loads(report.read_text())
    with assume:
        assert status == EXIT_OK
    with assume:
        assert data["passed"] is True
    with assume:
        assert len(pd.read_csv(out)) == 32 * 32
    with assume:
        assert json.loads((tmp_path / "zak.json").read_text())["config"] == data["config"]


@allure.feature("cli")
def test_domain_errors_exit_with_usage_status(tmp_path, capsys):
    status = main(["zak", "--window", "bastiaans", "--a", "2", "--grid", "16", "--out", str(tmp_path / "z.csv")])
    assert status == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


@allure.feature("cli")
def test_windows_dump(tmp_path):
    out = tmp_path / "box.csv"
    assert main(["windows", "dump", "--window", "box", "--grid=-1,1,4", "--out", str(out)]) == EXIT_OK
    signal = read_signal_csv(out)
    np.testing.assert_allclose(signal.values.real, [0.0, 1.0, 1.0, 0.0])
    sidecar = json.loads((tmp_path / "box.json").read_text())
    assert sidecar["artifact"] == "box.csv"
    assert sidecar["config"]["grid"] == [-1.0, 1.0, 4]


@allure.feature("cli")
@mark.parametrize("argv", [
    ["windows", "dump", "--window", "box", "--grid", "1,0,4", "--out", "x.csv"],
    ["windows", "dump", "--window", "hann", "--out", "x.csv"],
    ["verify", "bogus"],
    ["zak", "--grid", "0", "--out", "x.csv"],
])
def test_invalid_arguments_exit_with_status_two(argv):
    with raises(SystemExit) as excinfo:
        build_parser().parse_args(argv)
    assert excinfo.value.code == 2


@allure.feature("cli")
def test_column_radii_halve_down_to_sixteen():
    assert column_radii(256) == [32, 64, 128, 256]
    assert column_radii(40) == [20, 40]
    with raises(DomainError):
        column_radii(8)


@allure.feature("cli")
def test_partner_column_sums_on_stdout(capsys):
    assert main(["partner", "column-sums", "--radius", "32", "--uncorrected"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.endswith("}\n") and not out.endswith("\n\n")
    payload = json.loads(out)
    with assume:
        assert payload["radii"] == [16, 32]
    with assume:
        assert payload["corrected"] is False
    with assume:
        assert payload["sums"][1] > payload["sums"][0]


@allure.feature("cli")
@mark.parametrize("suite", ["theta", "kernel"])
def test_verify_command(suite, tmp_path):
    report = tmp_path / f"{suite}.json"
    assert main(["verify", suite, "--json", str(report)]) == EXIT_OK
    assert json.loads(report.read_text())["report"] == f"verify_{suite}"


@allure.feature("cli")
def test_run_verify_rejects_unknown_suites(run_config):
    with raises(ValueError):
        run_verify("bogus", run_config)


@allure.feature("cli")
def test_exit_status_constants():
    assert (EXIT_OK, EXIT_FAILED, EXIT_USAGE) == (0, 1, 2)


@allure.feature("artifacts")
def test_complex_panels_figure_and_sidecar(tmp_path):
    t = np.linspace(-1.0, 1.0, 21)
    path = tmp_path / "panels.svg"
    payload = plot_complex_panels([("f", t, np.exp(1j * np.pi * t))], path, config={"a": 1.0})
    sidecar = json.loads((tmp_path / "panels.json").read_text())
    with assume:
        assert sidecar_path(path) == str(tmp_path / "panels.json")
    with assume:
        assert sidecar == json.loads(json.dumps(payload))
    with assume:
        assert sidecar["panels"][0]["samples"] == 21
    with assume:
        assert path.read_bytes().lstrip().startswith(b"<?xml")


@allure.feature("artifacts")
def test_figures_are_byte_identical_across_runs(tmp_path):
    t = np.linspace(-2.0, 2.0, 41)
    panels = [("g", t, np.cos(t) + 0.5j * np.sin(t)), ("gamma", t, np.exp(-t * t) + 0j)]
    first, second = tmp_path / "first.svg", tmp_path / "second.svg"
    plot_complex_panels(panels, first)
    plot_complex_panels(panels, second)
    assert first.read_bytes() == second.read_bytes()


@allure.feature("artifacts")
@allure.title("Example pair on the figure grid")
@mark.slow
def test_example4_artifacts(tmp_path, run_config):
    paths = write_example4_artifacts(1.0, str(tmp_path), run_config, svg=False)
    assert set(paths) == {"g", "gamma"}
    g = read_signal_csv(paths["g"])
    center = int(np.argmin(np.abs(g.t)))
    with assume:
        assert len(g.t) == run_config["fig_samples"]
    with assume:
        assert abs(g.values[center] - 0.61802) < 1e-4
    with assume:
        assert not (tmp_path / "fig1.svg").exists()
    with assume:
        assert json.loads((tmp_path / "g1.json").read_text())["config"]["a"] == 1.0
    with assume:
        assert (tmp_path / "gamma1.json").exists()


@allure.feature("artifacts")
@mark.slow
def test_example4_command_writes_the_figure(tmp_path):
    out = tmp_path / "fig"
    assert main(["example4", "--a", "1", "--out-dir", str(out)]) == EXIT_OK
    with assume:
        assert (out / "g1.csv").exists() and (out / "gamma1.csv").exists()
    with assume:
        assert json.loads((out / "fig1.json").read_text())["config"]["a"] == 1.0
    first = (out / "fig1.svg").read_bytes()
    assert main(["example4", "--a", "1", "--out-dir", str(out)]) == EXIT_OK
    assert (out / "fig1.svg").read_bytes() == first


@allure.feature("verify")
@mark.slow
@mark.parametrize("suite", SUITES)
def test_acceptance_suites(suite, run_config):
    report = run_verify(suite, run_config)
    allure.attach(report.to_json(), name=f"verify_{suite}", attachment_type=allure.attachment_type.JSON)
    assert report.passed, [c.check for c in report.failed_checks()]


@allure.feature("verify")
def test_verify_report_echoes_the_config(run_config):
    report = run_verify("kernel", run_config)
    assert report.config["kernel_radius"] == run_config["kernel_radius"]
    assert "cache_dir" not in report.config
    assert report.passed
