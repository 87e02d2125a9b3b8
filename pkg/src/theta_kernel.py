"""Gram sequence of the Gaussian Gabor system, its symbol Theta and kernel elements of the synthesis operator."""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pandas as pd
from opentelemetry import trace

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, NumericError
from src.gabor import LatticeSeq
from src.numeric_core import FourierSeq, dtft
from src.report import Report, write_dataframe_csv
from src.tracing import get_opentelemetry_tracer, set_report_attributes

logger = logging.getLogger(__name__)
tracer = get_opentelemetry_tracer(__name__)

OMEGA_0 = (0.5, 0.5)
NOME_1 = math.exp(-math.pi / 2)
NOME_2 = math.exp(-2 * math.pi)


def vartheta(n, m):
    """<T_{-n} M_{-m} phi, phi> = (-1)^{nm} exp(-pi (n^2 + m^2) / 2)."""
    n = np.asarray(n)
    m = np.asarray(m)
    sign = np.where(np.mod(n * m, 2) == 0, 1.0, -1.0)
    values = sign * np.exp(-np.pi * (n * n + m * m) / 2.0)
    return float(values) if values.ndim == 0 else values


@dataclass(frozen=True, eq=False)
class GramSeq:
    R: int
    values: np.ndarray

    def get(self, n, m) -> float:
        if abs(n) > self.R or abs(m) > self.R:
            return 0.0
        return float(self.values[n + self.R, m + self.R])

    def as_fourier_seq(self) -> FourierSeq:
        return FourierSeq(self.values, tail_bound=gram_tail(self.R))


@lru_cache(maxsize=16)
def gram_seq(R=None) -> GramSeq:
    R = R or DEFAULT_CONFIG["theta_radius"]
    if R < 1:
        raise DomainError(f"Gram radius must be >= 1, got {R}")
    r = np.arange(-R, R + 1)
    n, m = np.meshgrid(r, r, indexing="ij")
    values = vartheta(n, m)
    values.setflags(write=False)
    return GramSeq(R, values)


def gram_tail(R) -> float:
    """Upper bound for sum_{max(|n|,|m|) > R} |vartheta[n, m]|."""
    one_dim = 1 + 2 * sum(math.exp(-math.pi * j * j / 2) for j in range(1, R + 40))
    outside = 2 * sum(math.exp(-math.pi * j * j / 2) for j in range(R + 1, R + 40))
    return 2 * outside * one_dim


def theta_eval(omega, R=None):
    """Theta(w) = F_d(vartheta)(w) by the truncated double sum; real-valued by symmetry."""
    R = R or DEFAULT_CONFIG["theta_radius"]
    if R < 5:
        raise DomainError(f"theta_eval needs R >= 5 for a tail below 1e-12, got {R}")
    values = np.asarray(dtft(gram_seq(R).as_fourier_seq(), omega))
    imaginary = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if imaginary > 1e-13:
        raise NumericError("Theta partial sum has a non-negligible imaginary part", attained=imaginary)
    real = values.real
    return float(real) if real.ndim == 0 else real


def _theta_series(z, q, offset, alternating, terms):
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.shape)
    for n in range(terms):
        k = n + offset
        sign = (-1) ** n if alternating else 1
        total = total + sign * q ** (k * k) * np.cos(2 * k * z)
    return total


def jacobi_theta2(z, q, terms=12):
    """2 sum_{n >= 0} q^{(n + 1/2)^2} cos((2n + 1) z)."""
    return 2 * _theta_series(z, q, 0.5, False, terms)


def jacobi_theta3(z, q, terms=12):
    """1 + 2 sum_{n >= 1} q^{n^2} cos(2 n z)."""
    return 1 + 2 * (_theta_series(z, q, 0, False, terms) - 1)


def jacobi_theta4(z, q, terms=12):
    """1 + 2 sum_{n >= 1} (-1)^n q^{n^2} cos(2 n z)."""
    return 1 + 2 * (_theta_series(z, q, 0, True, terms) - 1)


def theta_product(omega):
    """Theta via theta_3 theta_3 + theta_4 theta_2 with nomes exp(-pi/2) and exp(-2 pi)."""
    omega = np.asarray(omega, dtype=float)
    w1, w2 = omega[..., 0], omega[..., 1]
    values = (jacobi_theta3(np.pi * w1, NOME_1) * jacobi_theta3(2 * np.pi * w2, NOME_2)
              + jacobi_theta4(np.pi * w1, NOME_1) * jacobi_theta2(2 * np.pi * w2, NOME_2))
    return float(values) if np.ndim(values) == 0 else values


def _parity_factors(omega, R):
    """One-dimensional sums whose products give Theta split by the parity of m."""
    n = np.arange(-R, R + 1)
    decay = np.exp(-np.pi * n * n / 2.0)
    wave = np.exp(-2j * np.pi * np.outer(omega, n))
    even_n = (wave @ decay).real
    alternating_n = (wave @ (decay * np.where(n % 2 == 0, 1.0, -1.0))).real
    even_m = (wave[:, n % 2 == 0] @ decay[n % 2 == 0]).real
    odd_m = (wave[:, n % 2 != 0] @ decay[n % 2 != 0]).real
    return even_n, alternating_n, even_m, odd_m


@tracer.start_as_current_span("theta_grid")
def theta_grid(n=None, R=None) -> np.ndarray:
    """Theta on the n x n nodes (i/n, j/n); rows index omega_1."""
    n = n or DEFAULT_CONFIG["theta_grid"]
    R = R or DEFAULT_CONFIG["theta_radius"]
    omega = np.arange(n) / n
    even_n, alternating_n, even_m, odd_m = _parity_factors(omega, R)
    return np.outer(even_n, even_m) + np.outer(alternating_n, odd_m)


def _local_minima(values):
    center = values
    neighbours = [np.roll(values, shift, axis) for axis in (0, 1) for shift in (-1, 1)]
    mask = np.ones(values.shape, dtype=bool)
    for other in neighbours:
        mask &= center < other
    return np.argwhere(mask)


@tracer.start_as_current_span("theta_grid_scan")
def theta_grid_scan(n=None, R=None, zero_tolerance=1e-10, floor=-1e-12, separation=1e-3) -> Report:
    """Minimum, argmin and periodic local minima of Theta on the n x n grid."""
    n = n or DEFAULT_CONFIG["theta_grid"]
    values = theta_grid(n, R)
    report = Report("theta_grid_scan", config={"grid": n, "radius": R or DEFAULT_CONFIG["theta_radius"]})
    argmin = np.unravel_index(int(np.argmin(values)), values.shape)
    minimum = float(values[argmin])
    minima = sorted(float(values[i, j]) for i, j in _local_minima(values))
    second = minima[1] if len(minima) > 1 else None
    report.check_ge("nonnegative", minimum, floor)
    expected = (n // 2, n // 2)
    report.add("argmin_at_omega0", tuple(int(i) for i in argmin) == expected, None, None,
               argmin=[argmin[0] / n, argmin[1] / n])
    report.check_le("zero_value", abs(float(values[expected])), zero_tolerance)
    report.add("unique_zero", second is None or second > separation, second, separation,
               local_minima=len(minima))
    set_report_attributes(trace.get_current_span(), report)
    return report


def theta_product_check(n_nodes=100, seed=None, tolerance=1e-12) -> Report:
    seed = DEFAULT_CONFIG["seed"] if seed is None else seed
    points = np.random.default_rng(seed).random((n_nodes, 2))
    deviation = float(np.max(np.abs(theta_eval(points) - theta_product(points))))
    report = Report("theta_product", config={"nodes": n_nodes, "seed": seed})
    report.check_le("double_sum_vs_product", deviation, tolerance)
    return report


def theta_derivatives(h=None, R=None):
    """Central finite differences of Theta at omega_0: first, pure second and mixed partials."""
    h = h or DEFAULT_CONFIG["theta_fd_step"]
    if not 1e-4 <= h <= 1e-2:
        raise DomainError(f"Finite-difference step must lie in [1e-4, 1e-2], got {h}")
    w1, w2 = OMEGA_0

    def at(d1, d2):
        return theta_eval((w1 + d1 * h, w2 + d2 * h), R)

    center = at(0, 0)
    return {
        "d10": (at(1, 0) - at(-1, 0)) / (2 * h),
        "d01": (at(0, 1) - at(0, -1)) / (2 * h),
        "d20": (at(1, 0) - 2 * center + at(-1, 0)) / h ** 2,
        "d02": (at(0, 1) - 2 * center + at(0, -1)) / h ** 2,
        "d11": (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h),
        "offset_value": at(1, 0),
    }


@tracer.start_as_current_span("theta_hessian_check")
def theta_hessian_check(R=None, h=None) -> Report:
    h = h or DEFAULT_CONFIG["theta_fd_step"]
    d = theta_derivatives(h, R)
    report = Report("theta_hessian", config={"radius": R or DEFAULT_CONFIG["theta_radius"], "h": h})
    report.add("d20_positive_strict", d["d20"] > 0, d["d20"], 0.0)
    report.add("d02_positive_strict", d["d02"] > 0, d["d02"], 0.0)
    report.check_le("d20_equals_d02", abs(d["d20"] - d["d02"]) / abs(d["d20"]), 1e-6)
    report.check_le("mixed_partial", abs(d["d11"]), 1e-8)
    report.check_le("gradient_d10", abs(d["d10"]), 1e-10)
    report.check_le("gradient_d01", abs(d["d01"]), 1e-10)
    report.add("positive_off_zero", d["offset_value"] > 0, d["offset_value"], 0.0)
    set_report_attributes(trace.get_current_span(), report)
    return report


@dataclass(frozen=True)
class KernelPoly:
    """p[n, m] = (-1)^{n+m} sum_alpha c_alpha n^{alpha_1} m^{alpha_2}."""

    coefficients: dict = field(default_factory=lambda: {(0, 0): 1.0})

    def __post_init__(self):
        for alpha in self.coefficients:
            if len(alpha) != 2 or min(alpha) < 0:
                raise DomainError(f"Multi-index must be a pair of non-negative integers, got {alpha}")

    @property
    def N(self) -> int:
        return max((sum(alpha) for alpha in self.coefficients), default=0)

    @classmethod
    def constant(cls, c=1.0):
        return cls({(0, 0): c})


def kernel_poly_eval(p: KernelPoly, n, m):
    n = np.asarray(n)
    m = np.asarray(m)
    total = np.zeros(np.broadcast(n, m).shape, dtype=complex)
    for (a1, a2), c in p.coefficients.items():
        total = total + c * n.astype(float) ** a1 * m.astype(float) ** a2
    values = np.where(np.mod(n + m, 2) == 0, 1.0, -1.0) * total
    if values.ndim == 0:
        value = complex(values)
        return value.real if value.imag == 0 else value
    return values


def kernel_poly_seq(p: KernelPoly, R: int) -> LatticeSeq:
    return LatticeSeq.from_function(R, lambda n, m: kernel_poly_eval(p, n, m))


def certified_kernel_basis():
    """Kernel polynomials of degree <= 2 annihilated by the Gaussian synthesis operator."""
    return {
        "constant": KernelPoly({(0, 0): 1.0}),
        "n": KernelPoly({(1, 0): 1.0}),
        "m": KernelPoly({(0, 1): 1.0}),
        "n2_minus_m2": KernelPoly({(2, 0): 1.0, (0, 2): -1.0}),
        "nm": KernelPoly({(1, 1): 1.0}),
    }


def kernel_convolution_check(p, n: int, m: int, R=None) -> complex:
    """(p * vartheta)[n, m] = sum_{|k|,|l| <= R} p[k, l] vartheta[n - k, m - l]."""
    R = R or DEFAULT_CONFIG["kernel_radius"]
    if R < 8:
        raise DomainError(f"kernel_convolution_check needs R >= 8, got {R}")
    seq = p if isinstance(p, LatticeSeq) else kernel_poly_seq(p, R)
    if seq.R < R:
        raise DomainError(f"Sequence radius {seq.R} is below the convolution radius {R}")
    k, l = seq.indices
    inner = (np.abs(k) <= R) & (np.abs(l) <= R)
    return complex(np.sum(seq.values[inner] * vartheta(n - k[inner], m - l[inner])))


@tracer.start_as_current_span("kernel_membership")
def kernel_membership_report(polys=None, radius=4, R=None, tolerance=1e-10) -> Report:
    """Certifies kernel elements on |n|, |m| <= radius and exhibits n^2 + m^2 as a non-element."""
    polys = polys or certified_kernel_basis()
    R = R or DEFAULT_CONFIG["kernel_radius"]
    report = Report("kernel_membership", config={"radius": radius, "R": R, "polys": sorted(polys)})
    for name, p in polys.items():
        worst = max(abs(kernel_convolution_check(p, n, m, R))
                    for n in range(-radius, radius + 1) for m in range(-radius, radius + 1))
        report.check_le(f"{name}.max_convolution", worst, tolerance)

    ones = LatticeSeq.from_function(R, lambda n, m: np.ones(n.shape))
    report.check_close("ones.equals_theta_00", kernel_convolution_check(ones, 0, 0, R).real,
                       theta_eval((0.0, 0.0)), tolerance)
    non_element = KernelPoly({(2, 0): 1.0, (0, 2): 1.0})
    value = kernel_convolution_check(non_element, 0, 0, R).real
    expected = -theta_derivatives()["d20"] / (2 * math.pi ** 2)
    report.add("n2_plus_m2.not_in_kernel", value < -tolerance, value, -tolerance)
    report.check_close("n2_plus_m2.matches_hessian", value, expected, 1e-4 * abs(expected))
    set_report_attributes(trace.get_current_span(), report)
    return report


def theta_frame(values: np.ndarray) -> pd.DataFrame:
    n1, n2 = values.shape
    w1, w2 = np.meshgrid(np.arange(n1) / n1, np.arange(n2) / n2, indexing="ij")
    return pd.DataFrame({"omega1": w1.ravel(), "omega2": w2.ravel(), "theta": values.ravel()})


def write_theta_csv(values: np.ndarray, path, config=None):
    write_dataframe_csv(theta_frame(values), path, config)
