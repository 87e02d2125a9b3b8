"""Gabor systems G(g, a, b) at critical density: synthesis, analysis and the Zak-diagonalized frame operator."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from opentelemetry import trace

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, GridMismatchError, NumericError
from src.numeric_core import (
    Grid,
    SampledSignal,
    dft_from_samples,
    inner_product,
    tf_shift,
    unit_box_rule,
)
from src.report import Report
from src.tracing import get_opentelemetry_tracer, set_report_attributes
from src.windows import WindowSpec
from src.zak import ZakField, zak_forward, zak_inverse

logger = logging.getLogger(__name__)
tracer = get_opentelemetry_tracer(__name__)


@dataclass(frozen=True)
class LatticeParams:
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Lattice parameters must be positive, got a={self.a}, b={self.b}")

    @classmethod
    def critical(cls, a=1.0):
        return cls(a, 1.0 / a)

    @property
    def density(self) -> float:
        return 1.0 / (self.a * self.b)

    def require_critical(self):
        if abs(self.a * self.b - 1.0) > 1e-12:
            raise DomainError(f"Operation needs critical density ab = 1, got ab = {self.a * self.b}")
        return self


@dataclass(frozen=True, eq=False)
class LatticeSeq:
    """Sequence xi[n, m] on the box |n|, |m| <= R, stored at values[n + R, m + R]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] % 2 == 0 or values.shape[0] < 3:
            raise DomainError(f"LatticeSeq needs a (2R+1) x (2R+1) matrix with R >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericError("LatticeSeq entries must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def R(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @property
    def indices(self):
        r = np.arange(-self.R, self.R + 1)
        return np.meshgrid(r, r, indexing="ij")

    @classmethod
    def zeros(cls, R):
        return cls(np.zeros((2 * R + 1, 2 * R + 1)))

    @classmethod
    def delta(cls, R, points=((0, 0),)):
        values = np.zeros((2 * R + 1, 2 * R + 1), dtype=complex)
        for n, m in points:
            values[n + R, m + R] += 1.0
        return cls(values)

    @classmethod
    def from_function(cls, R, fn):
        """Builds the box from a vectorized fn(n, m)."""
        r = np.arange(-R, R + 1)
        n, m = np.meshgrid(r, r, indexing="ij")
        return cls(np.broadcast_to(np.asarray(fn(n, m), dtype=complex), n.shape))

    def get(self, n, m) -> complex:
        if abs(n) > self.R or abs(m) > self.R:
            return 0j
        return complex(self.values[n + self.R, m + self.R])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other):
        if other.R != self.R:
            raise DomainError(f"LatticeSeq radii differ: {self.R} vs {other.R}")
        return LatticeSeq(self.values + other.values)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, scalar):
        return LatticeSeq(self.values * complex(scalar))

    __rmul__ = __mul__


def _as_signal(g, grid: Grid) -> SampledSignal:
    if isinstance(g, WindowSpec):
        return g.sample(grid)
    if g.grid != grid:
        raise GridMismatchError(f"Window grid {g.grid} differs from the signal grid {grid}")
    return g


def stft_sample(f: SampledSignal, g, x: float, omega: float) -> complex:
    """V_g f(x, w) = <f, T_x M_w g> by quadrature on f's grid."""
    return inner_product(f, tf_shift(_as_signal(g, f.grid), x, omega))


def _synthesis_evaluator(xi: LatticeSeq, g: WindowSpec, lattice: LatticeParams):
    n_idx = np.arange(-xi.R, xi.R + 1)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        total = np.zeros(flat.shape, dtype=complex)
        for row, n in enumerate(n_idx):
            coeffs = xi.values[row]
            if not np.any(coeffs):
                continue
            s = flat - lattice.a * n
            total += g.evaluate(s) * (np.exp(2j * np.pi * lattice.b * np.outer(s, n_idx)) @ coeffs)
        return total.reshape(t.shape)

    return evaluate


def gabor_synthesis(xi: LatticeSeq, g: WindowSpec, lattice: LatticeParams, target: Grid) -> SampledSignal:
    """sum_{|n|,|m| <= R} xi[n, m] T_{an} M_{bm} g sampled on target."""
    return SampledSignal.from_function(target, _synthesis_evaluator(xi, g, lattice))


def analysis_coefficients(f: SampledSignal, g: WindowSpec, lattice: LatticeParams, R: int) -> LatticeSeq:
    """<f, T_{an} M_{bm} g> for |n|, |m| <= R, one modulation matrix product per time shift."""
    t = f.grid.points
    ms = np.arange(-R, R + 1)
    values = np.zeros((2 * R + 1, 2 * R + 1), dtype=complex)
    for row, n in enumerate(range(-R, R + 1)):
        s = t - lattice.a * n
        weighted = f.values * np.conj(g.evaluate(s)) * f.grid.h
        values[row] = weighted @ np.exp(-2j * np.pi * lattice.b * np.outer(s, ms))
    return LatticeSeq(values)


def zak_aligned_offset(grid: Grid, a: float):
    """(n_x, x_offset) such that the Zak x-nodes coincide with the grid midpoints modulo a."""
    cells = a / grid.h
    n_x = int(round(cells))
    if abs(cells - n_x) > 1e-9 * cells:
        raise GridMismatchError(f"Grid spacing {grid.h} does not divide the lattice step a={a}")
    offset = (grid.points[0] / grid.h) % 1.0
    if offset > 1.0 - 1e-9:
        offset = 0.0
    return n_x, offset


@tracer.start_as_current_span("frame_operator_zak")
def frame_operator_zak(g: WindowSpec, gamma: WindowSpec, lattice: LatticeParams, f: SampledSignal,
                       n_omega=None) -> SampledSignal:
    """S f = Z_a^{-1}(a conj(Z_a g) Z_a gamma Z_a f) on f's grid."""
    lattice.require_critical()
    a = lattice.a
    n_omega = n_omega or DEFAULT_CONFIG["zak_resolution"]
    n_x, x_offset = zak_aligned_offset(f.grid, a)
    fields = [zak_forward(w, a, n_x, n_omega, x_offset=x_offset, omega_offset=0.5) for w in (g, gamma, f)]
    zak_g, zak_gamma, zak_f = fields
    symbol = a * zak_g.conj() * zak_gamma
    if not np.all(symbol.finite_mask):
        raise NumericError(f"Frame symbol of ({g.label}, {gamma.label}) is not finite on the aligned grid")
    result = zak_inverse(symbol * zak_f, target=f.grid)
    logger.debug(f"frame_operator_zak: {g.label}/{gamma.label} on {n_x}x{n_omega} nodes")
    return result


def frame_operator_direct(g: WindowSpec, gamma: WindowSpec, lattice: LatticeParams, f: SampledSignal,
                          R: int = 8) -> SampledSignal:
    """sum_{|n|,|m| <= R} <f, g_{n,m}> gamma_{n,m} on f's grid."""
    coefficients = analysis_coefficients(f, g, lattice, R)
    return gabor_synthesis(coefficients, gamma, lattice, f.grid)


def compare_frame_operators(g: WindowSpec, gamma: WindowSpec, lattice: LatticeParams, signals,
                            R: int = 8, tolerance=1e-6) -> Report:
    report = Report("frame_operator_agreement", config={"g": g.label, "gamma": gamma.label, "a": lattice.a, "R": R})
    for index, f in enumerate(signals):
        via_zak = frame_operator_zak(g, gamma, lattice, f)
        direct = frame_operator_direct(g, gamma, lattice, f, R)
        relative = (via_zak - direct).norm() / max(direct.norm(), 1e-300)
        report.check_le(f"signal_{index}.relative_discrepancy", relative, tolerance)
    return report


def frame_symbol(g: WindowSpec, gamma: WindowSpec, a: float = 1.0, n=None) -> ZakField:
    """a conj(Z_a g) Z_a gamma on the node-aligned grid (offsets 0)."""
    n = n or DEFAULT_CONFIG["zak_resolution"]
    return a * zak_forward(g, a, n, n).conj() * zak_forward(gamma, a, n, n)


def _disc_mask(Z: ZakField, center, radius):
    dx = np.abs(Z.x[:, None] - center[0]) % Z.a
    dx = np.minimum(dx, Z.a - dx)
    period = 1.0 / Z.a
    dw = np.abs(Z.omega[None, :] - center[1]) % period
    dw = np.minimum(dw, period - dw)
    return dx * dx + dw * dw <= radius * radius


@tracer.start_as_current_span("reppair_zak_bounds")
def reppair_zak_bounds(g: WindowSpec, gamma: WindowSpec, a: float = 1.0, n=None, exclusion_radius=None,
                       exclusion_center=(0.5, 0.5), tolerance=1e-6) -> Report:
    """Grid proxies for 0 < m <= |Z_a g Z_a gamma| <= M < inf and the S = I indicator sup |a conj(Zg) Zgamma - 1|."""
    n = n or DEFAULT_CONFIG["zak_resolution"]
    zak_g = zak_forward(g, a, n, n)
    zak_gamma = zak_forward(gamma, a, n, n)
    report = Report("reppair_zak_bounds", config={"g": g.label, "gamma": gamma.label, "a": a})
    mask = zak_g.finite_mask & zak_gamma.finite_mask
    if exclusion_radius:
        mask &= ~_disc_mask(zak_g, exclusion_center, exclusion_radius)
    excluded = int(mask.size - np.sum(mask))
    meta = {"resolution": [n, n], "exclusion_radius": exclusion_radius,
            "exclusion_center": list(exclusion_center), "excluded_nodes": excluded}

    product = np.abs(zak_g.values * zak_gamma.values)[mask]
    lower = float(np.min(product))
    upper = float(np.max(product))
    threshold = DEFAULT_CONFIG["zero_threshold"] * upper
    report.add("lower_bound_positive", lower > threshold, lower, threshold, **meta)
    report.add("upper_bound_finite", math.isfinite(upper), upper, None, **meta)
    symbol = a * np.conj(zak_g.values) * zak_gamma.values
    deviation = float(np.max(np.abs(symbol[mask] - 1.0)))
    report.check_le("s_equals_identity", deviation, tolerance, **meta)
    set_report_attributes(trace.get_current_span(), report)
    return report


def _periodic_interval_mask(points, interval, period):
    lo, hi = interval
    return np.mod(points - lo, period) < (hi - lo)


def schauder_ratio(Zg: ZakField, I, J) -> float:
    """Heil-Powell ratio mean_{IxJ}|Zg|^2 * mean_{IxJ}|Zg|^{-2} over the nodes inside the periodized rectangle."""
    inside = (_periodic_interval_mask(Zg.x, I, Zg.a)[:, None]
              & _periodic_interval_mask(Zg.omega, J, 1.0 / Zg.a)[None, :])
    magnitude_sq = np.abs(Zg.values) ** 2
    usable = inside & Zg.finite_mask & (magnitude_sq > 0)
    if not np.any(usable):
        raise NumericError(f"|Zg| vanishes or is undefined on every node of {tuple(I)} x {tuple(J)}")
    if np.sum(usable) < np.sum(inside):
        logger.debug(f"schauder_ratio: {int(np.sum(inside) - np.sum(usable))} zero or non-finite nodes excluded")
    values = magnitude_sq[usable]
    return float(np.mean(values) * np.mean(1.0 / values))


@tracer.start_as_current_span("schauder_refinement_scan")
def schauder_refinement_scan(g: WindowSpec, center, delta, resolutions=(64, 128, 256, 512), a=1.0,
                             expect="growth", growth=1.2, bounded_spread=1.5) -> Report:
    """Schauder ratio on [c - delta, c + delta]^2 under grid refinement (nodes offset by half a step)."""
    report = Report("schauder_refinement", config={"window": g.label, "center": list(center), "delta": delta,
                                                   "resolutions": list(resolutions), "expect": expect})
    ratios = []
    for n in resolutions:
        Z = zak_forward(g, a, n, n, x_offset=0.5, omega_offset=0.5)
        ratios.append(schauder_ratio(Z, (center[0] - delta, center[0] + delta),
                                     (center[1] - delta, center[1] + delta)))
    meta = {"ratios": ratios}
    report.check_ge("ratio_at_least_one", min(ratios), 1.0 - 1e-12, **meta)
    if expect == "growth":
        increasing = all(b > a_ for a_, b in zip(ratios[:-1], ratios[1:]))
        report.add("ratio_increasing", increasing, ratios[-1] / ratios[0], growth, **meta)
        report.check_ge("ratio_growth", ratios[-1] / ratios[0], growth)
    else:
        report.check_le("ratio_spread", max(ratios) / min(ratios), bounded_spread, **meta)
    set_report_attributes(trace.get_current_span(), report)
    return report


def box_onb_coefficients(f: SampledSignal, R: int) -> LatticeSeq:
    """<f, T_k M_l gamma> for the box ONB, one DFT per unit cell.

    Uses Gauss-Legendre on the cell when f carries an analytic evaluator,
    the midpoint samples of f otherwise.
    """
    ls = np.arange(-R, R + 1)
    values = np.zeros((2 * R + 1, 2 * R + 1), dtype=complex)
    if f.analytic is not None:
        rule = unit_box_rule()
        for row, k in enumerate(range(-R, R + 1)):
            values[row] = dft_from_samples(f.analytic(k + rule.nodes), rule, ls)
        return LatticeSeq(values)
    t = f.grid.points
    for row, k in enumerate(range(-R, R + 1)):
        cell = (t >= k - 0.5) & (t < k + 0.5)
        s = t[cell] - k
        values[row] = (f.values[cell] * f.grid.h) @ np.exp(-2j * np.pi * np.outer(s, ls))
    return LatticeSeq(values)


@tracer.start_as_current_span("semiframe_duality_check")
def semiframe_duality_check(g: WindowSpec, lattice: LatticeParams, partner_map, signals, R: int = 8,
                            tolerance=1e-3, n=None) -> Report:
    """Bessel bound of G(g, a, b) against the lower semi-frame ratio of its partner on a test set.

    ``partner_map(f)`` returns the LatticeSeq of partner coefficients <f, psi_{n,m}>.
    The Bessel bound is estimated as max a |Z_a g|^2 on the grid.
    """
    lattice.require_critical()
    n = n or DEFAULT_CONFIG["zak_resolution"]
    zak_g = zak_forward(g, lattice.a, n, n)
    bessel = float(np.max(lattice.a * np.abs(zak_g.values[zak_g.finite_mask]) ** 2))
    report = Report("semiframe_duality", config={"window": g.label, "a": lattice.a, "R": R,
                                                 "resolution": [n, n], "signals": len(signals)})
    report.add("bessel_bound_finite", math.isfinite(bessel), bessel, None)
    for index, f in enumerate(signals):
        energy = f.norm() ** 2
        analysis = analysis_coefficients(f, g, lattice, R).norm() ** 2 / energy
        partner = partner_map(f).norm() ** 2 / energy
        report.check_le(f"signal_{index}.bessel_ratio", analysis, bessel * (1 + tolerance))
        report.check_ge(f"signal_{index}.lower_ratio", partner, 1.0 / bessel - tolerance, bessel_bound=bessel)
    set_report_attributes(trace.get_current_span(), report)
    return report
