"""Acceptance suites behind ``repgabor.py verify`` and the experiment runners behind the other subcommands."""

import logging
import math
import os

import numpy as np
from opentelemetry import trace

from src.config import DEFAULT_CONFIG
from src.gabor import (
    LatticeParams,
    compare_frame_operators,
    frame_operator_zak,
    gabor_synthesis,
    reppair_zak_bounds,
    schauder_refinement_scan,
    semiframe_duality_check,
)
from src.numeric_core import Grid, SampledSignal, inner_product, tf_shift, write_signal_csv
from src.partner import (
    PartnerConfig,
    beta_identity,
    decay_check,
    g_series,
    h_factor,
    h_factor_defect,
    mu_fourier,
    partner_analysis,
    partner_coeff,
    shift_invariance_demo,
    shift_lemma_residual,
    standard_test_pairs,
    weak_identity_check,
    xi0_block,
    xi0_eval,
    xi0_oracle,
)
from src.plotting import plot_complex_panels
from src.report import Report
from src.theta_kernel import (
    KernelPoly,
    kernel_membership_report,
    kernel_poly_seq,
    theta_grid_scan,
    theta_hessian_check,
    theta_product_check,
)
from src.tracing import get_opentelemetry_tracer, set_report_attributes
from src.windows import (
    bastiaans,
    bastiaans_eval,
    bastiaans_jumps,
    box,
    calibrate_bastiaans_constant,
    example4_g,
    example4_gamma,
    example4_norms,
    example_g,
    example_gamma,
    gaussian,
    log_growth_slopes,
    lp_growth_scan,
)
from src.zak import blowup_scan, check_quasiperiodicity, find_zeros, zak_eval, zak_forward

logger = logging.getLogger(__name__)
tracer = get_opentelemetry_tracer(__name__)

# xi_0[0, 0] with C_psi = 1: G_0 times the integral of exp(pi t^2) over [-1/2, 1/2]
XI0_UNIT_ORIGIN = 0.60846694

SUITES = ("zak", "theta", "kernel", "example4", "bastiaans", "gabor", "partner", "weak")


def _partner_config(config) -> PartnerConfig:
    return PartnerConfig.from_config(config)


def zak_suite(config) -> Report:
    n = config["zak_resolution"]
    report = Report("zak", config={"resolution": n, "seed": config["seed"]})
    phi = gaussian(1.0)
    Z = zak_forward(phi, 1.0, n, n, K=8)
    report.check_close("gaussian.unitarity", Z.norm(), 1.0, 1e-8, resolution=[n, n])
    report.check_le("gaussian.zero_value", abs(complex(zak_eval(phi, 1.0, 0.5, 0.5))), 1e-12)
    zeros = find_zeros(Z)
    nearest = min((math.hypot(x - 0.5, w - 0.5) for x, w in zeros), default=math.inf)
    report.add("gaussian.unique_zero", len(zeros) == 1 and nearest <= 1.0 / n, len(zeros), 1, zeros=zeros)
    report.merge(blowup_scan(Z, (0.5, 0.5), config["blowup_radii"], expect="log",
                             spread=config["blowup_spread"]), prefix="gaussian.blowup")
    report.merge(check_quasiperiodicity(Z, phi, config["quasiperiodicity_nodes"], seed=config["seed"]),
                 prefix="gaussian.quasiperiodicity")
    box_field = zak_forward(box(), 1.0, n, n)
    report.merge(blowup_scan(box_field, (0.5, 0.5), config["blowup_radii"], expect="bounded"),
                 prefix="box.blowup")
    # |Z_1 g_1|^-2 = (w (1 - w))^-1/2 integrates to pi across its zero line w = 0
    m = max(n, 512)
    example_field = zak_forward(example_g(1.0), 1.0, m, m)
    report.merge(blowup_scan(example_field, (0.5, 0.0), config["blowup_radii"], expect="bounded", bound=math.pi),
                 prefix="example4.blowup")
    return report


def theta_suite(config) -> Report:
    report = Report("theta", config={"grid": config["theta_grid"], "R": config["theta_radius"]})
    report.merge(theta_grid_scan(config["theta_grid"], config["theta_radius"]), prefix="grid")
    report.merge(theta_hessian_check(config["theta_radius"], config["theta_fd_step"]), prefix="hessian")
    report.merge(theta_product_check(100, seed=config["seed"]), prefix="product")
    return report


def kernel_suite(config) -> Report:
    report = Report("kernel", config={"R": config["kernel_radius"]})
    report.merge(kernel_membership_report(radius=4, R=config["kernel_radius"]))
    return report


def example4_suite(config) -> Report:
    a = 1.0
    report = Report("example4", config={"a": a})
    g_norm, gamma_norm = example4_norms(a)
    report.check_close("norm_g_squared", g_norm, math.pi / 8, 1e-6)
    report.check_close("norm_gamma_squared", gamma_norm, math.pi, 1e-6)
    report.check_close("g_at_zero", complex(example4_g(a, 0.0)), 0.61802, 1e-4)

    pair = reppair_zak_bounds(example_g(a), example_gamma(a), a, n=config["zak_resolution"])
    report.merge(pair, prefix="reppair")
    product = pair.get("lower_bound_positive").value
    report.check_close("reppair.m_hat", product, 1.0, 1e-6)
    report.check_close("reppair.M_hat", pair.get("upper_bound_finite").value, 1.0, 1e-6)

    phi = gaussian(1.0).sample(Grid.zak_aligned())
    reconstructed = frame_operator_zak(example_g(a), example_gamma(a), LatticeParams(a, 1.0 / a), phi)
    report.check_le("frame_operator.reconstructs_gaussian", (reconstructed - phi).norm(), 1e-6)

    # algebraic tails: gamma_1 ~ |t|^{-3/4}, g_1 ~ |t|^{-5/4}
    t = np.linspace(8.0, 16.0, 65)
    g_tail = np.abs(example4_g(a, t))
    gamma_tail = np.abs(example4_gamma(a, t))
    report.check_ge("localisation.gamma_over_g", float(np.max(gamma_tail) / np.max(g_tail)), 5.0)
    # half-integers keep the two endpoint contributions in a fixed phase
    far = 2.0 ** np.arange(5, 10) + 0.5
    for name, values, expected in (("g", example4_g(a, far), -1.25), ("gamma", example4_gamma(a, far), -0.75)):
        envelope = np.abs(np.asarray(values))
        slope = float(np.polyfit(np.log(far), np.log(envelope), 1)[0])
        report.check_close(f"localisation.{name}_decay_exponent", slope, expected, 0.15)
    spectrum = example_g(a).fourier(np.array([-0.5, -0.01, 1.01, 1.5]))
    report.check_le("band_limited.spectrum_outside", float(np.max(np.abs(spectrum))), 0.0)
    wide = Grid(-64.0, 64.0, 2048)
    samples = example4_g(a, wide.points)
    outside = np.array([-0.5, -0.25, 1.0 / a + 0.25, 1.0 / a + 0.5])
    forward = np.exp(-2j * np.pi * np.outer(outside, wide.points)) @ samples * wide.h
    report.check_le("band_limited.forward_residual", float(np.max(np.abs(forward))), 1e-2)
    return report


def bastiaans_suite(config) -> Report:
    c_psi = calibrate_bastiaans_constant()
    report = Report("bastiaans", config={"c_psi": c_psi, "exclusion_radius": config["exclusion_radius"]})
    pair = reppair_zak_bounds(gaussian(1.0), bastiaans(c_psi), 1.0, n=config["zak_resolution"],
                              exclusion_radius=config["exclusion_radius"])
    report.merge(pair, prefix="pair")
    t = np.linspace(-6.0, 6.0, 2401)
    report.check_le("bounded_on_window", float(np.max(np.abs(bastiaans_eval(c_psi, t)))), 2 * c_psi)
    energies = lp_growth_scan(c_psi, config["lp_radii"], p=2)
    slopes = log_growth_slopes(config["lp_radii"], energies)
    report.add("l2_energy_increasing", bool(np.all(slopes > 0)), float(np.min(slopes)), 0.0,
               energies=energies)
    # logarithmic growth: the slope per unit of ln T stays level
    report.check_ge("l2_energy_no_plateau", float(np.min(slopes) / np.max(slopes)), 0.8, slopes=slopes)
    report.merge(bastiaans_jumps(c_psi, Grid(-4.0, 4.0, 8000)), prefix="jumps")
    return report


def gabor_suite(config) -> Report:
    report = Report("gabor", config={"resolution": config["zak_resolution"]})
    lattice = LatticeParams()
    phi = gaussian(1.0)
    grid = Grid.zak_aligned()
    signals = [phi.sample(grid), tf_shift(phi.sample(grid), 0.5, 0.25)]
    report.merge(compare_frame_operators(phi, phi, lattice, signals, R=8, tolerance=1e-6))

    kernel = gabor_synthesis(kernel_poly_seq(KernelPoly.constant(), 12), phi, lattice, Grid.default())
    report.check_le("kernel_synthesis.weak", abs(inner_product(kernel, phi.sample(Grid.default()))), 1e-9)
    report.add("kernel_synthesis.strong_norm", kernel.norm() > 1e-3, kernel.norm(), 1e-3)

    report.merge(schauder_refinement_scan(phi, (0.5, 0.5), 0.1, expect="growth"), prefix="schauder_gaussian")
    report.merge(schauder_refinement_scan(example_g(1.0), (0.25, 0.0), 0.1, expect="bounded"),
                 prefix="schauder_example")

    cfg = _partner_config(config)
    partner_signals = [phi.sample(Grid.default()), tf_shift(phi.sample(Grid.default()), 1.0, 0.0)]
    report.merge(semiframe_duality_check(phi, lattice, lambda f: partner_analysis(f, 8, cfg), partner_signals),
                 prefix="semiframe")
    return report


def partner_suite(config) -> Report:
    cfg = _partner_config(config)
    report = Report("partner", config={"c_psi": cfg.psi_constant, "quad": [cfg.quad_panels, cfg.quad_order],
                                       "correction_sign": cfg.correction_sign})
    report.check_close("g0", g_series(0), 0.455087, 1e-6)
    report.check_close("h1", h_factor(1), 0.455085, 1e-6)
    ks = np.array([2, 3, 4, 8, -2, -5])
    report.check_le("h_limit", float(np.max(np.abs(h_factor_defect(ks)))), 1e-5)
    law = max(abs(abs(mu_fourier(k, l)) * 2 * math.pi * math.hypot(k, l) - abs(h_factor(k)))
              for k in (1, -2, 3) for l in (-4, 0, 5))
    report.check_le("mu_magnitude_law", law, 1e-14)

    unit = PartnerConfig.from_config(config, c_psi=1.0)
    report.check_close("xi0_unit_constant", xi0_eval(0, 0, unit), XI0_UNIT_ORIGIN, 1e-6)

    r = np.arange(-8, 9)
    quadrature = xi0_block(r, r, cfg)
    oracle = np.array([[xi0_oracle(k, l, cfg) for l in r] for k in r])
    report.check_le("xi0_two_oracle", float(np.max(np.abs(quadrature - oracle))), 1e-8)
    decay_check(8, cfg, report)

    beta = max(abs(beta_identity(k, l, cfg) - cfg.correction_sign * math.copysign(1.0, k) * math.exp(-math.pi / 4))
               for k, l in ((1, 0), (2, -1), (-3, 2)))
    report.check_le("beta_identity", beta, 1e-8)

    phi = gaussian(1.0)
    stability = abs(partner_coeff(phi, 0, 0, 64, cfg) - partner_coeff(phi, 0, 0, 32, cfg))
    report.check_le("partner_coeff_gaussian_stability", stability, 1e-4)
    report.merge(shift_invariance_demo(cfg, config["column_radii"]))
    return report


def weak_suite(config) -> Report:
    cfg = _partner_config(config)
    report = Report("weak", config={"radii": config["weak_radii"], "tolerance": config["weak_tolerance"]})
    for name, f, h in standard_test_pairs():
        report.merge(weak_identity_check(f, h, cfg, config["weak_radii"], config["weak_tolerance"], label=name),
                     prefix=name)
    report.check_le("shift_lemma_11", shift_lemma_residual(1, 1, 32, cfg), config["weak_tolerance"])
    return report


_RUNNERS = {
    "zak": zak_suite,
    "theta": theta_suite,
    "kernel": kernel_suite,
    "example4": example4_suite,
    "bastiaans": bastiaans_suite,
    "gabor": gabor_suite,
    "partner": partner_suite,
    "weak": weak_suite,
}


@tracer.start_as_current_span("verify")
def run_verify(name, config=None) -> Report:
    """Runs one acceptance suite, or every suite for name == "all"."""
    config = config or DEFAULT_CONFIG.copy()
    names = SUITES if name == "all" else (name,)
    for suite in names:
        if suite not in _RUNNERS:
            raise ValueError(f"Unknown suite '{suite}'. Expected one of {SUITES + ('all',)}")
    report = Report(f"verify_{name}", config={k: config[k] for k in sorted(config) if k not in ("cache_dir", "log_level")})
    for suite in names:
        logger.info(f"Running suite: {suite}")
        report.merge(_RUNNERS[suite](config), prefix=suite)
    set_report_attributes(trace.get_current_span(), report)
    return report


def write_example4_artifacts(a, out_dir, config, svg=True):
    """g_a and gamma_a on the figure grid as CSV, each with a config sidecar, plus the SVG figure and its sidecar."""
    os.makedirs(out_dir, exist_ok=True)
    grid = Grid.through_points(config["fig_t_min"], config["fig_t_max"], config["fig_samples"])
    suffix = f"{a:g}"
    g = SampledSignal(grid, example4_g(a, grid.points))
    gamma = SampledSignal(grid, example4_gamma(a, grid.points))
    paths = {"g": os.path.join(out_dir, f"g{suffix}.csv"), "gamma": os.path.join(out_dir, f"gamma{suffix}.csv")}
    echo = {"a": a, "t_min": config["fig_t_min"], "t_max": config["fig_t_max"], "samples": config["fig_samples"]}
    write_signal_csv(g, paths["g"], config=echo)
    write_signal_csv(gamma, paths["gamma"], config=echo)
    if svg:
        figure = os.path.join(out_dir, "fig1.svg")
        plot_complex_panels([(f"g_{suffix}", grid.points, g.values), (f"gamma_{suffix}", grid.points, gamma.values)],
                            figure, config=echo)
        paths["svg"] = figure
    return paths
