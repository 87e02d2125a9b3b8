"""Grids, sampled signals, inner products, Fourier maps and time-frequency shifts.

Conventions:
    T_x M_w f(t) = exp(2 pi i w (t - x)) f(t - x)
    F(f)[k]      = int_{-1/2}^{1/2} f(w) exp(-2 pi i k w) dw
    F_d(c)(w)    = sum_k c[k] exp(-2 pi i k . w)
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import pandas as pd
from scipy import special

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, GridMismatchError, NumericError
from src.report import write_dataframe_csv

logger = logging.getLogger(__name__)

FLAG_INTERPOLATED = "interpolated"
FLAG_ZERO_EXTENDED = "zero_extended"


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid: n_samples cells of width h on [t_min, t_max]."""

    t_min: float
    t_max: float
    n_samples: int

    def __post_init__(self):
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)) or self.t_min >= self.t_max:
            raise DomainError(f"Grid needs finite t_min < t_max, got [{self.t_min}, {self.t_max}]")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise DomainError(f"Grid needs n_samples >= 2, got {self.n_samples}")
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @classmethod
    def default(cls):
        return cls(DEFAULT_CONFIG["grid_t_min"], DEFAULT_CONFIG["grid_t_max"], DEFAULT_CONFIG["grid_samples"])

    @classmethod
    def zak_aligned(cls):
        """Grid whose midpoints sit on the default Zak x-nodes (offset 1/2) modulo 1."""
        return cls(DEFAULT_CONFIG["zak_grid_t_min"], DEFAULT_CONFIG["zak_grid_t_max"], DEFAULT_CONFIG["zak_grid_samples"])

    @classmethod
    def through_points(cls, first, last, n_samples):
        """Grid whose midpoints are exactly linspace(first, last, n_samples)."""
        h = (last - first) / (n_samples - 1)
        return cls(first - h / 2, last + h / 2, n_samples)

    @property
    def h(self) -> float:
        return (self.t_max - self.t_min) / self.n_samples

    @property
    def points(self) -> np.ndarray:
        return self.t_min + (np.arange(self.n_samples) + 0.5) * self.h


def require_same_grid(first: Grid, second: Grid):
    if first != second:
        raise GridMismatchError(f"Grid mismatch: {first} vs {second}")


def _require_finite(samples, nodes):
    bad = ~np.isfinite(samples)
    if bad.any():
        idx = np.unravel_index(int(np.flatnonzero(bad)[0]), np.shape(samples))
        node = np.asarray(nodes)[idx[-1]] if np.ndim(nodes) else nodes
        raise NumericError("Non-finite integrand sample", node=float(node))


@dataclass(frozen=True)
class ShiftedAnalytic:
    """Pointwise evaluator of T_x M_w applied to another evaluator."""

    base: Callable
    x: float
    omega: float

    def __call__(self, t):
        s = np.asarray(t, dtype=float) - self.x
        return np.exp(2j * np.pi * self.omega * s) * self.base(s)


@dataclass(frozen=True)
class LinearAnalytic:
    """Pointwise evaluator of sum_i weights[i] * parts[i]."""

    parts: tuple
    weights: tuple

    def __call__(self, t):
        total = 0
        for part, weight in zip(self.parts, self.weights):
            total = total + weight * part(t)
        return total


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples on a Grid.

    ``analytic`` optionally carries an exact pointwise evaluator so shifted or
    transformed copies can be re-evaluated instead of interpolated.
    """

    grid: Grid
    values: np.ndarray
    analytic: Callable | None = None
    flags: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n_samples,):
            raise DomainError(f"Expected {self.grid.n_samples} samples, got shape {values.shape}")
        _require_finite(values, self.grid.points)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "flags", tuple(sorted(set(self.flags))))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable, keep_analytic=True):
        values = np.broadcast_to(np.asarray(fn(grid.points), dtype=complex), (grid.n_samples,))
        return cls(grid, values, fn if keep_analytic else None)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def _combine(self, other, sign):
        require_same_grid(self.grid, other.grid)
        analytic = None
        if self.analytic is not None and other.analytic is not None:
            analytic = LinearAnalytic((self.analytic, other.analytic), (1.0, sign))
        return SampledSignal(self.grid, self.values + sign * other.values, analytic, self.flags + other.flags)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        analytic = LinearAnalytic((self.analytic,), (complex(scalar),)) if self.analytic is not None else None
        return SampledSignal(self.grid, complex(scalar) * self.values, analytic, self.flags)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))


def linear_combination(signals, weights) -> SampledSignal:
    signals = list(signals)
    if not signals:
        raise DomainError("linear_combination needs at least one signal")
    grid = signals[0].grid
    values = np.zeros(grid.n_samples, dtype=complex)
    flags = ()
    for signal, weight in zip(signals, weights):
        require_same_grid(grid, signal.grid)
        values = values + complex(weight) * signal.values
        flags = flags + signal.flags
    analytic = None
    if all(s.analytic is not None for s in signals):
        analytic = LinearAnalytic(tuple(s.analytic for s in signals), tuple(complex(w) for w in weights))
    return SampledSignal(grid, values, analytic, flags)


def inner_product(f: SampledSignal, g: SampledSignal) -> complex:
    """Composite midpoint rule for <f, g> = int f conj(g)."""
    require_same_grid(f.grid, g.grid)
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.h)


def tf_shift(f: SampledSignal, x: float, omega: float) -> SampledSignal:
    """Returns T_x M_omega f on the same grid."""
    t = f.grid.points
    phase = np.exp(2j * np.pi * omega * (t - x))
    if f.analytic is not None:
        return SampledSignal(f.grid, phase * f.analytic(t - x), ShiftedAnalytic(f.analytic, x, omega), f.flags)
    base, flags = _translate_samples(f, x)
    return SampledSignal(f.grid, phase * base, None, f.flags + flags)


def _translate_samples(f: SampledSignal, x: float):
    if x == 0:
        return f.values, ()
    h = f.grid.h
    steps = x / h
    n = f.grid.n_samples
    if abs(steps - round(steps)) < 1e-9:
        s = int(round(steps))
        out = np.zeros(n, dtype=complex)
        if abs(s) < n:
            if s >= 0:
                out[s:] = f.values[: n - s]
                dropped = f.values[n - s:]
            else:
                out[: n + s] = f.values[-s:]
                dropped = f.values[:-s]
        else:
            dropped = f.values
        flags = (FLAG_ZERO_EXTENDED,) if np.any(dropped != 0) else ()
        if np.any(dropped != 0):
            logger.warning(f"tf_shift by {x} moves support outside the grid; samples zero-extended")
        return out, flags
    logger.warning(f"tf_shift by {x} is not a multiple of h={h}; tabulated samples are interpolated")
    t = f.grid.points
    re = np.interp(t - x, t, f.values.real, left=0.0, right=0.0)
    im = np.interp(t - x, t, f.values.imag, left=0.0, right=0.0)
    dropped = f.values[(t + x > t[-1]) | (t + x < t[0])]
    flags = (FLAG_INTERPOLATED, FLAG_ZERO_EXTENDED) if np.any(dropped != 0) else (FLAG_INTERPOLATED,)
    return re + 1j * im, flags


# --- Fourier coefficient quadrature ---

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, samples) -> complex:
        return complex(np.sum(np.asarray(samples) * self.weights))


@lru_cache(maxsize=64)
def composite_gauss_legendre(lo: float, hi: float, panels: int, order: int) -> QuadratureRule:
    if panels < 1 or order < 1 or not lo < hi:
        raise DomainError(f"Invalid Gauss-Legendre rule on [{lo}, {hi}] with {panels}x{order} nodes")
    x, w = special.roots_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def unit_box_rule(panels=None, order=None) -> QuadratureRule:
    """Composite Gauss-Legendre on [-1/2, 1/2]."""
    return composite_gauss_legendre(-0.5, 0.5,
                                    panels or DEFAULT_CONFIG["quad_panels"],
                                    order or DEFAULT_CONFIG["quad_order"])


def dft_from_samples(samples, rule: QuadratureRule, ks) -> np.ndarray:
    """F(f)[k] for every k from integrand samples on the rule nodes (last axis)."""
    ks = np.asarray(ks, dtype=float)
    basis = np.exp(-2j * np.pi * np.outer(rule.nodes, ks))
    return (np.asarray(samples, dtype=complex) * rule.weights) @ basis


def fourier_coeffs(f: Callable, ks, rule: QuadratureRule | None = None) -> np.ndarray:
    rule = rule or unit_box_rule()
    samples = np.broadcast_to(np.asarray(f(rule.nodes), dtype=complex), rule.nodes.shape)
    _require_finite(samples, rule.nodes)
    return dft_from_samples(samples, rule, ks)


def fourier_coeff(f: Callable, k: int, rule: QuadratureRule | None = None) -> complex:
    """F(f)[k] = int_{-1/2}^{1/2} f(w) exp(-2 pi i k w) dw by quadrature."""
    return complex(fourier_coeffs(f, [k], rule)[0])


# --- discrete-time Fourier transform ---

@dataclass(frozen=True, eq=False)
class FourierSeq:
    """Coefficients c[k], k in [-K, K]^d, stored with index k at position k + K."""

    coefficients: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim < 1 or len(set(c.shape)) != 1 or c.shape[0] % 2 == 0:
            raise DomainError(f"FourierSeq needs a (2K+1)^d array, got shape {c.shape}")
        _require_finite(c.ravel(), np.arange(c.size))
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def delta(cls, K: int, d: int = 1):
        c = np.zeros((2 * K + 1,) * d, dtype=complex)
        c[(K,) * d] = 1.0
        return cls(c)

    @property
    def K(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2

    @property
    def ndim(self) -> int:
        return self.coefficients.ndim


def dtft(c: FourierSeq, omega):
    """Partial sum sum_{|k| <= K} c[k] exp(-2 pi i k . omega).

    For d = 1 ``omega`` may be any array of frequencies; for d > 1 its last
    axis holds the d components of each point.
    """
    ks = np.arange(-c.K, c.K + 1)
    omega = np.asarray(omega, dtype=float)
    if c.ndim == 1:
        result = np.exp(-2j * np.pi * np.multiply.outer(omega, ks)) @ c.coefficients
        return complex(result) if np.ndim(result) == 0 else result
    if omega.shape[-1] != c.ndim:
        raise DomainError(f"dtft of a {c.ndim}-d sequence needs points with {c.ndim} components")
    points = omega.reshape(-1, c.ndim)
    exps = [np.exp(-2j * np.pi * np.outer(points[:, axis], ks)) for axis in range(c.ndim)]
    acc = np.einsum("pk,k...->p...", exps[0], c.coefficients)
    for e in exps[1:]:
        acc = np.einsum("pk,pk...->p...", e, acc)
    result = acc.reshape(omega.shape[:-1])
    return complex(result) if result.ndim == 0 else result


def lattice_sum(evaluate: Callable, x, omega, a: float, K: int):
    """sum_{|k| <= K} f(x - a k) exp(2 pi i a omega k), broadcast over x and omega."""
    x, omega = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(omega, dtype=float))
    total = np.zeros(x.shape, dtype=complex)
    for k in range(-K, K + 1):
        total = total + evaluate(x - a * k) * np.exp(2j * np.pi * a * omega * k)
    return total


# --- CSV ---

def signal_frame(f: SampledSignal) -> pd.DataFrame:
    return pd.DataFrame({"t": f.grid.points, "re": f.values.real, "im": f.values.imag})


def write_signal_csv(f: SampledSignal, path, config=None):
    write_dataframe_csv(signal_frame(f), path, config)


def read_signal_csv(path) -> SampledSignal:
    df = pd.read_csv(path)
    missing = {"t", "re", "im"} - set(df.columns)
    if missing:
        raise DomainError(f"{path}: missing columns {sorted(missing)}")
    t = df["t"].to_numpy(dtype=float)
    if len(t) < 2:
        raise DomainError(f"{path}: need at least two samples")
    grid = Grid.through_points(t[0], t[-1], len(t))
    return SampledSignal(grid, df["re"].to_numpy() + 1j * df["im"].to_numpy())
