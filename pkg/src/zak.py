"""Discrete Zak transform Z_a f(x, w) = sum_k f(x - a k) exp(2 pi i a w k) on Q_a = [0, a) x [0, 1/a)."""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from opentelemetry import trace

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, GridMismatchError, NumericError, TruncationError
from src.numeric_core import Grid, SampledSignal, lattice_sum
from src.report import Report, write_dataframe_csv
from src.tracing import get_opentelemetry_tracer, set_report_attributes
from src.windows import WindowSpec

logger = logging.getLogger(__name__)
tracer = get_opentelemetry_tracer(__name__)

MIN_NODES = 8


@dataclass(frozen=True, eq=False)
class ZakField:
    """Samples of Z_a f at x_i = a (i + x_offset) / n_x, w_j = (j + omega_offset) / (a n_omega)."""

    a: float
    values: np.ndarray
    x_offset: float = 0.0
    omega_offset: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"ZakField needs a > 0, got {self.a}")
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2 or min(values.shape) < MIN_NODES:
            raise DomainError(f"ZakField needs an n_x x n_omega matrix with both sizes >= {MIN_NODES}, got {values.shape}")
        for offset in (self.x_offset, self.omega_offset):
            if not 0 <= offset < 1:
                raise DomainError(f"Grid offsets must lie in [0, 1), got {offset}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_x(self) -> int:
        return self.values.shape[0]

    @property
    def n_omega(self) -> int:
        return self.values.shape[1]

    @property
    def h_x(self) -> float:
        return self.a / self.n_x

    @property
    def h_omega(self) -> float:
        return 1.0 / (self.a * self.n_omega)

    @property
    def x(self) -> np.ndarray:
        return self.a * (np.arange(self.n_x) + self.x_offset) / self.n_x

    @property
    def omega(self) -> np.ndarray:
        return (np.arange(self.n_omega) + self.omega_offset) / (self.a * self.n_omega)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def norm(self) -> float:
        """L2(Q_a) norm a * h_x * h_omega * sum |Z|^2 over finite nodes, square-rooted."""
        mask = self.finite_mask
        return math.sqrt(self.a * self.h_x * self.h_omega * float(np.sum(np.abs(self.values[mask]) ** 2)))

    def same_grid(self, other) -> bool:
        return (self.a == other.a and self.values.shape == other.values.shape
                and self.x_offset == other.x_offset and self.omega_offset == other.omega_offset)

    def with_values(self, values):
        return ZakField(self.a, values, self.x_offset, self.omega_offset)

    def __mul__(self, other):
        if isinstance(other, ZakField):
            if not self.same_grid(other):
                raise GridMismatchError("ZakField product needs identical node grids")
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * complex(other))

    __rmul__ = __mul__

    def conj(self):
        return self.with_values(np.conj(self.values))


def zak_eval(f, a, x, omega, K=None, eps=None):
    """Pointwise Z_a f for a WindowSpec or a SampledSignal."""
    if not a > 0:
        raise DomainError(f"Lattice parameter must be positive, got a={a}")
    if isinstance(f, WindowSpec):
        closed = f.zak(x, omega, a)
        if closed is not None:
            return closed
        K = K if K is not None else f.truncation(a, eps)
        return lattice_sum(f.evaluate, x, omega, a, K)
    evaluate, K = _signal_evaluator(f, a, K)
    return lattice_sum(evaluate, x, omega, a, K)


def _signal_evaluator(f: SampledSignal, a, K):
    reach = max(abs(f.grid.t_min), abs(f.grid.t_max))
    K = K if K is not None else int(math.ceil(reach / a)) + 1
    if f.analytic is not None:
        return f.analytic, K
    t = f.grid.points

    def evaluate(s):
        re = np.interp(s, t, f.values.real, left=0.0, right=0.0)
        im = np.interp(s, t, f.values.imag, left=0.0, right=0.0)
        return re + 1j * im

    return evaluate, K


def _lattice_tail(f, a, K, nodes_x):
    """Bound or estimate of sum_{|k| > K} |f(x - a k)| over x in the fundamental cell."""
    if isinstance(f, WindowSpec):
        if f.kind in ("gaussian", "box", "tabulated"):
            return 2.0 * sum(f.envelope(a * j) for j in range(K, K + 64))
        return None
    if f.analytic is not None:
        ks = np.array([-(K + 2), -(K + 1), K + 1, K + 2], dtype=float)
        samples = np.abs(f.analytic(np.subtract.outer(nodes_x, a * ks)))
        return float(np.max(np.sum(samples, axis=1)))
    return float(max(abs(f.values[0]), abs(f.values[-1])))


@tracer.start_as_current_span("zak_forward")
def zak_forward(f, a=1.0, n_x=None, n_omega=None, K=None, x_offset=0.0, omega_offset=0.0,
                eps=None, tail_bound=None) -> ZakField:
    """Samples Z_a f on the node grid of Q_a.

    Raises TruncationError when the lattice tail beyond K exceeds tail_bound.
    """
    n_x = n_x or DEFAULT_CONFIG["zak_resolution"]
    n_omega = n_omega or DEFAULT_CONFIG["zak_resolution"]
    tail_bound = tail_bound if tail_bound is not None else DEFAULT_CONFIG["zak_tail_bound"]
    shell = ZakField(a, np.zeros((n_x, n_omega)), x_offset, omega_offset)
    x, omega = shell.x, shell.omega

    if isinstance(f, WindowSpec) and f.zak(x[:1], omega[:1], a) is not None:
        values = f.zak(x[:, None], omega[None, :], a)
        logger.debug(f"zak_forward: closed form for {f.label}")
        return shell.with_values(values)

    if isinstance(f, WindowSpec):
        K = K if K is not None else f.truncation(a, eps)
        evaluate = f.evaluate
    else:
        evaluate, K = _signal_evaluator(f, a, K)
    attained = _lattice_tail(f, a, K, x)
    if attained is not None and attained > tail_bound:
        raise TruncationError(f"Lattice tail beyond K={K} exceeds {tail_bound:.1e}", attained=attained)

    ks = np.arange(-K, K + 1)
    samples = evaluate(np.subtract.outer(x, a * ks))
    phases = np.exp(2j * np.pi * a * np.outer(ks, omega))
    values = np.asarray(samples, dtype=complex) @ phases
    logger.debug(f"zak_forward: direct sum with K={K} on {n_x}x{n_omega} nodes")
    return shell.with_values(values)


def default_inverse_grid(Z: ZakField, cells=None) -> Grid:
    """Target grid covering [-a cells, a cells) with midpoints on the x-nodes modulo a."""
    cells = cells or DEFAULT_CONFIG["zak_inverse_cells"]
    h = Z.h_x
    t_min = -Z.a * cells + h * (Z.x_offset - 0.5)
    return Grid(t_min, t_min + 2 * cells * Z.a, 2 * cells * Z.n_x)


@tracer.start_as_current_span("zak_inverse")
def zak_inverse(Z: ZakField, target: Grid | None = None) -> SampledSignal:
    """f(x_i - a k) = mean_j Z(x_i, w_j) exp(-2 pi i a w_j k) for every target sample.

    The target midpoints must coincide with the x-nodes modulo a, and the
    cells reached must satisfy |k| < n_omega / 2.
    """
    if not np.all(Z.finite_mask):
        bad = np.argwhere(~Z.finite_mask)[0]
        raise NumericError("Non-finite Zak field entry", node=(float(Z.x[bad[0]]), float(Z.omega[bad[1]])))
    target = target or default_inverse_grid(Z)
    h = Z.h_x
    if abs(target.h - h) > 1e-12 * h:
        raise GridMismatchError(f"Target spacing {target.h} differs from the Zak node spacing {h}")
    t = target.points
    position = (t - Z.x[0]) / h
    steps = np.round(position)
    if np.max(np.abs(position - steps)) > 1e-6:
        raise GridMismatchError("Target midpoints are not aligned with the Zak x-nodes")
    steps = steps.astype(np.int64)
    rows = np.mod(steps, Z.n_x)
    cells = -np.floor_divide(steps, Z.n_x)
    if np.max(np.abs(cells)) >= Z.n_omega // 2:
        raise DomainError(f"Target grid reaches cell {int(np.max(np.abs(cells)))}, beyond n_omega/2 = {Z.n_omega // 2}")

    spectrum = np.fft.fft(Z.values, axis=1)
    cols = np.mod(cells, Z.n_omega)
    phase = np.exp(-2j * np.pi * Z.omega_offset * cells / Z.n_omega)
    values = spectrum[rows, cols] * phase / Z.n_omega
    return SampledSignal(target, values)


def _shifted_radius(f, a):
    """Lattice radius large enough for evaluation points one cell to the right of Q_a."""
    if isinstance(f, WindowSpec):
        K = f.truncation(a)
        return None if K is None else K + 1
    return _signal_evaluator(f, a, None)[1] + 1


@tracer.start_as_current_span("check_quasiperiodicity")
def check_quasiperiodicity(Z: ZakField, f, n_nodes=None, tolerance=1e-8, seed=None) -> Report:
    """Residuals of Z(x + a, w) = exp(2 pi i a w) Z(x, w) and Z(x, w + 1/a) = Z(x, w) at random finite nodes."""
    n_nodes = n_nodes or DEFAULT_CONFIG["quasiperiodicity_nodes"]
    seed = DEFAULT_CONFIG["seed"] if seed is None else seed
    report = Report("quasiperiodicity", config={"a": Z.a, "n_nodes": n_nodes, "seed": seed,
                                                "window": getattr(f, "label", "signal")})
    rng = np.random.default_rng(seed)
    finite = np.argwhere(Z.finite_mask & (np.abs(Z.values) < 1e12))
    picks = finite[rng.choice(len(finite), size=min(n_nodes, len(finite)), replace=False)]
    x = Z.x[picks[:, 0]]
    omega = Z.omega[picks[:, 1]]
    base = Z.values[picks[:, 0], picks[:, 1]]
    K = _shifted_radius(f, Z.a)
    shifted_x = zak_eval(f, Z.a, x + Z.a, omega, K=K)
    shifted_omega = zak_eval(f, Z.a, x, omega + 1.0 / Z.a, K=K)
    scale = max(1.0, float(np.max(np.abs(base))))
    residual_x = float(np.max(np.abs(shifted_x - np.exp(2j * np.pi * Z.a * omega) * base))) / scale
    residual_omega = float(np.max(np.abs(shifted_omega - base))) / scale
    report.check_le("x_shift_residual", residual_x, tolerance)
    report.check_le("omega_shift_residual", residual_omega, tolerance)
    return report


def find_zeros(Z: ZakField, threshold=None):
    """Grid zeros (|Z| < threshold max|Z|, strictly below all four periodic neighbours), refined by local parabolas."""
    threshold = threshold or DEFAULT_CONFIG["zero_threshold"]
    magnitude = np.where(Z.finite_mask, np.abs(Z.values), np.inf)
    peak = float(np.max(magnitude[np.isfinite(magnitude)]))
    zeros = []
    candidates = np.argwhere(magnitude < threshold * peak)
    for i, j in candidates:
        center = magnitude[i, j]
        neighbours = [magnitude[(i - 1) % Z.n_x, j], magnitude[(i + 1) % Z.n_x, j],
                      magnitude[i, (j - 1) % Z.n_omega], magnitude[i, (j + 1) % Z.n_omega]]
        if not all(center < n for n in neighbours):
            continue
        sq = lambda v: v * v
        dx = _parabola_offset(sq(neighbours[0]), sq(center), sq(neighbours[1]))
        dw = _parabola_offset(sq(neighbours[2]), sq(center), sq(neighbours[3]))
        zeros.append(((Z.x[i] + dx * Z.h_x) % Z.a, (Z.omega[j] + dw * Z.h_omega) % (1.0 / Z.a)))
    return zeros


def _parabola_offset(left, center, right):
    curvature = left - 2 * center + right
    if curvature <= 0:
        return 0.0
    return float(np.clip((left - right) / (2 * curvature), -0.5, 0.5))


def _torus_distance(Z: ZakField, point):
    dx = np.abs(Z.x[:, None] - point[0]) % Z.a
    dx = np.minimum(dx, Z.a - dx)
    period = 1.0 / Z.a
    dw = np.abs(Z.omega[None, :] - point[1]) % period
    dw = np.minimum(dw, period - dw)
    return np.sqrt(dx * dx + dw * dw)


@tracer.start_as_current_span("blowup_scan")
def blowup_scan(Z: ZakField, z_star, radii=None, expect="log", spread=None, bound=None) -> Report:
    """int_{Q_a minus B_r(z*)} |Z|^{-2} for shrinking r.

    expect="log": increments per halving constant within ``spread`` (simple zero).
    expect="bounded": increments shrink geometrically and the integrals stay below ``bound``.
    """
    radii = sorted(radii or DEFAULT_CONFIG["blowup_radii"], reverse=True)
    spread = spread if spread is not None else DEFAULT_CONFIG["blowup_spread"]
    report = Report("blowup_scan", config={"a": Z.a, "z_star": list(z_star), "radii": radii,
                                           "resolution": [Z.n_x, Z.n_omega], "expect": expect})
    distance = _torus_distance(Z, z_star)
    magnitude = np.abs(Z.values)
    usable = Z.finite_mask & (magnitude > 0)
    excluded = int(np.sum(~usable))
    if excluded:
        report.warn(f"{excluded} non-finite or zero nodes excluded from the integrals")
    nearest = np.unravel_index(np.argmin(distance), distance.shape)
    local = magnitude[max(nearest[0] - 2, 0):nearest[0] + 3, max(nearest[1] - 2, 0):nearest[1] + 3]
    peak = float(np.max(magnitude[Z.finite_mask]))
    if not (np.min(local) < DEFAULT_CONFIG["zero_threshold"] * peak or np.any(~np.isfinite(local))):
        report.warn(f"z_star={tuple(z_star)} is not a grid-resolvable zero")

    weight = Z.h_x * Z.h_omega
    inverse_sq = np.zeros_like(magnitude)
    inverse_sq[usable] = 1.0 / magnitude[usable] ** 2
    integrals = [float(np.sum(inverse_sq[usable & (distance > r)]) * weight) for r in radii]
    increments = [b - a for a, b in zip(integrals[:-1], integrals[1:])]
    meta = {"integrals": integrals, "increments": increments}

    if expect == "log":
        mean = float(np.mean(increments))
        deviation = max(abs(inc - mean) for inc in increments) / mean if mean > 0 else math.inf
        report.check_le("increment_spread", deviation, spread, **meta)
        report.check_ge("increment_per_halving", min(increments), 0.0)
    else:
        ratios = [b / a for a, b in zip(increments[:-1], increments[1:]) if a > 0]
        report.check_le("increment_ratio", max(ratios) if ratios else 0.0, 0.5, **meta)
        if bound is not None:
            report.check_le("integral_bound", integrals[-1], bound)
    set_report_attributes(trace.get_current_span(), report)
    return report


def zak_frame(Z: ZakField) -> pd.DataFrame:
    xx, ww = np.meshgrid(Z.x, Z.omega, indexing="ij")
    return pd.DataFrame({"x": xx.ravel(), "omega": ww.ravel(),
                         "re": Z.values.real.ravel(), "im": Z.values.imag.ravel()})


def write_zak_csv(Z: ZakField, path, config=None):
    write_dataframe_csv(zak_frame(Z), path, config)
