"""Window functions: Gaussian, box, Bastiaans dual and the band-limited example pair (g_a, gamma_a)."""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import special

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, NumericError
from src.numeric_core import (
    Grid,
    SampledSignal,
    composite_gauss_legendre,
    lattice_sum,
)
from src.report import Report

logger = logging.getLogger(__name__)

KINDS = ("gaussian", "box", "bastiaans", "example4_g", "example4_gamma", "tabulated")
ANALYTIC_KINDS = KINDS[:-1]


def _scalar_or_array(values):
    values = np.asarray(values)
    return values.item() if values.ndim == 0 else values


def _alternating_sign(n):
    return np.where(np.mod(n, 2) == 0, 1.0, -1.0)


# --- Gaussian and box ---

def gaussian_eval(sigma, t):
    """Normalized Gaussian (2/sigma)^{1/4} exp(-pi t^2 / sigma)."""
    if not sigma > 0:
        raise DomainError(f"Gaussian width must be positive, got sigma={sigma}")
    t = np.asarray(t, dtype=float)
    return _scalar_or_array((2.0 / sigma) ** 0.25 * np.exp(-np.pi * t * t / sigma))


def box_eval(t):
    """Indicator of [-1/2, 1/2), half-open so that integer translates tile the line."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(np.where((t >= -0.5) & (t < 0.5), 1.0, 0.0))


# --- Bastiaans dual window ---

def bastiaans_eval(c_psi, t, N=None, domain=None):
    """C exp(pi t^2) sum_{n > |t| - 1/2} (-1)^n exp(-pi (n + 1/2)^2), N terms.

    Each term is formed from the combined exponent -pi (n + 1/2 - |t|)(n + 1/2 + |t|).
    """
    N = N or DEFAULT_CONFIG["bastiaans_terms"]
    domain = DEFAULT_CONFIG["bastiaans_domain"] if domain is None else domain
    if not c_psi > 0:
        raise DomainError(f"Bastiaans constant must be positive, got {c_psi}")
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    if np.any(at > domain):
        raise DomainError(f"|t| = {float(np.max(at))} exceeds the Bastiaans evaluation domain {domain}")
    first = np.floor(at - 0.5) + 1
    total = np.zeros(t.shape)
    for j in range(N):
        n = first + j
        total = total + _alternating_sign(n) * np.exp(-np.pi * (n + 0.5 - at) * (n + 0.5 + at))
    return _scalar_or_array(c_psi * total)


def bastiaans_zak(c_psi, x, omega, terms=None):
    """Z_1 psi by geometric resummation of the lattice sum over the two sign branches.

    Exact up to the dropped super-exponential series tail. On the jump line
    x = 1/2 (mod 1) the one-sided limit is returned; (1/2, 1/2) is a pole.
    """
    terms = terms or DEFAULT_CONFIG["bastiaans_terms"]
    x, omega = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(omega, dtype=float))
    cell = np.floor(x)
    x0 = x - cell
    s_a = np.ceil(x0 - 0.5)
    s_b = np.floor(-x0 - 0.5) + 1
    e = np.exp(2j * np.pi * omega)
    total = np.zeros(x.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(terms):
            n_a = s_a + j
            amp_a = _alternating_sign(n_a) * np.exp(-np.pi * (n_a + 0.5 - x0) * (n_a + 0.5 + x0))
            total = total + amp_a / (1.0 + np.exp(-2 * np.pi * (n_a + 0.5 - x0)) * np.conj(e))
            n_b = s_b + j
            amp_b = _alternating_sign(n_b) * np.exp(-np.pi * (n_b + 0.5 - x0) * (n_b + 0.5 + x0))
            r = -np.exp(-2 * np.pi * (n_b + 0.5 + x0)) * e
            total = total + amp_b * r / (1.0 - r)
    return _scalar_or_array(c_psi * total * np.exp(2j * np.pi * omega * cell))


def bastiaans_truncation(x, eps=None) -> int:
    """Lattice radius K for the direct sum of psi at x: decay rate 2 pi dist(x, 1/2 + Z)."""
    eps = eps or DEFAULT_CONFIG["zak_tail_eps"]
    distance = abs(float(x) % 1.0 - 0.5)
    if distance <= 0:
        raise DomainError(f"Direct Bastiaans lattice sum does not converge on the jump line x={x}")
    return int(math.ceil(math.log(1.0 / eps) / (2 * np.pi * distance))) + 2


@lru_cache(maxsize=1)
def calibrate_bastiaans_constant() -> float:
    """C_psi with Z_1 psi conj(Z_1 phi) = 1 at the calibration node."""
    x, omega = DEFAULT_CONFIG["calibration_node"]
    zak_psi = bastiaans_zak(1.0, x, omega)
    zak_phi = lattice_sum(lambda t: gaussian_eval(1.0, t), x, omega, 1.0, 8)
    product = complex(zak_psi * np.conj(zak_phi))
    if abs(product.imag) > 1e-12 * abs(product):
        raise NumericError("Calibration product is not real", node=(x, omega), attained=abs(product.imag))
    c_psi = 1.0 / product.real
    logger.info(f"Calibrated Bastiaans constant C_psi = {c_psi:.15f} at node ({x}, {omega})")
    return c_psi


def bastiaans_jumps(c_psi, grid: Grid, offset=1e-9) -> Report:
    """Locates the jumps of psi on a grid and compares them with the half-integers.

    Left/right limits are evaluated just inside each half-integer; the jump
    equals the first dropped series term, of magnitude C_psi.
    """
    report = Report("bastiaans_jumps", config={"c_psi": c_psi, "grid": [grid.t_min, grid.t_max, grid.n_samples]})
    t = grid.points
    values = bastiaans_eval(c_psi, t, domain=max(abs(grid.t_min), abs(grid.t_max)) + 1)
    steps = np.abs(np.diff(values))
    detected = np.flatnonzero(steps > 0.5 * c_psi)
    expected = [s * (n + 0.5) for n in range(int(max(abs(grid.t_min), abs(grid.t_max)))) for s in (-1, 1)
                if grid.t_min + grid.h < s * (n + 0.5) < grid.t_max - grid.h]
    report.add("jump_count", len(detected) == len(expected), len(detected), len(expected))
    for index in detected:
        position = 0.5 * (t[index] + t[index + 1])
        nearest = math.floor(position) + 0.5
        inner = abs(nearest)
        left = float(bastiaans_eval(c_psi, inner - offset, domain=inner + 1))
        right = float(bastiaans_eval(c_psi, inner + offset, domain=inner + 1))
        report.check_le(f"jump_at_{nearest:+.1f}.located", abs(position - nearest), grid.h,
                        position=position)
        report.check_close(f"jump_at_{nearest:+.1f}.size", abs(left - right), c_psi, 1e-6 * c_psi,
                           inner_limit=left, outer_limit=right)
    return report


def lp_growth_scan(c_psi, radii=None, p=2, panels=4, order=32):
    """int_{-T}^{T} |psi|^p for each T, integrating piecewise between the jumps."""
    radii = list(radii or DEFAULT_CONFIG["lp_radii"])
    results = []
    for T in radii:
        cuts = [-T] + [s * (n + 0.5) for n in range(int(T) + 1) for s in (-1, 1) if n + 0.5 < T] + [T]
        cuts = sorted(set(cuts))
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            rule = composite_gauss_legendre(lo, hi, panels, order)
            values = bastiaans_eval(c_psi, rule.nodes, domain=T + 1)
            total += float(np.sum(np.abs(values) ** p * rule.weights))
        results.append(total)
    return results


def log_growth_slopes(radii, values) -> np.ndarray:
    """Increments of values per unit of ln T; constant for values ~ alpha + beta ln T."""
    return np.diff(np.asarray(values, dtype=float)) / np.diff(np.log(np.asarray(radii, dtype=float)))


# --- Example pair: hat g_a = vartheta(a w) on [0, 1/a], hat gamma_a = a / vartheta(a w) ---

def example4_profile(u):
    """vartheta(u) = u^{1/4} (1 - u)^{1/4} on [0, 1], zero elsewhere."""
    u = np.asarray(u, dtype=float)
    inside = (u >= 0) & (u <= 1)
    clipped = np.clip(u, 0.0, 1.0)
    return _scalar_or_array(np.where(inside, (clipped * (1 - clipped)) ** 0.25, 0.0))


@dataclass(frozen=True, eq=False)
class GradedRule:
    """Nodes u in (0, 1) from u = v^4/2 and u = 1 - v^4/2 with Jacobian folded into the weights."""

    u: np.ndarray
    weights_g: np.ndarray
    weights_gamma: np.ndarray
    weights_g_sq: np.ndarray
    weights_gamma_sq: np.ndarray


@lru_cache(maxsize=32)
def graded_rule(panels: int, order: int) -> GradedRule:
    base = composite_gauss_legendre(0.0, 1.0, panels, order)
    v, w = base.nodes, base.weights
    smooth = 1.0 - v ** 4 / 2
    profile = v * 2 ** -0.25 * smooth ** 0.25
    jac = 2 * v ** 3 * w
    half_g = jac * profile
    half_gamma = 2 * v ** 2 * w * 2 ** 0.25 * smooth ** -0.25
    half_g_sq = jac * profile ** 2
    half_gamma_sq = 2 * v * w * 2 ** 0.5 * smooth ** -0.5
    u = np.concatenate([v ** 4 / 2, 1.0 - v ** 4 / 2])
    return GradedRule(
        u=u,
        weights_g=np.concatenate([half_g, half_g]),
        weights_gamma=np.concatenate([half_gamma, half_gamma]),
        weights_g_sq=np.concatenate([half_g_sq, half_g_sq]),
        weights_gamma_sq=np.concatenate([half_gamma_sq, half_gamma_sq]),
    )


def _graded_panels(a, t):
    reach = float(np.max(np.abs(t))) / a if np.size(t) else 0.0
    return max(DEFAULT_CONFIG["graded_panels"], int(math.ceil(2 * reach)))


def _example4_transform(a, t, weights_name, panels, order):
    rule = graded_rule(panels, order)
    weights = getattr(rule, weights_name)
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.empty(flat.shape, dtype=complex)
    chunk = 2048
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk]
        out[start:start + chunk] = np.exp(2j * np.pi * np.outer(block / a, rule.u)) @ weights
    return out.reshape(t.shape)


def _example4_eval(a, t, weights_name, scale, check):
    if not a > 0:
        raise DomainError(f"Lattice parameter must be positive, got a={a}")
    panels = _graded_panels(a, t)
    order = DEFAULT_CONFIG["graded_order"]
    values = scale * _example4_transform(a, t, weights_name, panels, order)
    if check:
        coarse = scale * _example4_transform(a, t, weights_name, panels, order - 8)
        attained = float(np.max(np.abs(values - coarse))) if np.size(values) else 0.0
        if attained > DEFAULT_CONFIG["graded_target"]:
            raise NumericError(f"Graded quadrature for {weights_name} misses its target",
                               attained=attained)
    return _scalar_or_array(values)


def example4_g(a, t, check=True):
    """g_a(t) = int_0^{1/a} vartheta(a w) exp(2 pi i w t) dw."""
    return _example4_eval(a, t, "weights_g", 1.0 / a if a > 0 else 0.0, check)


def example4_gamma(a, t, check=True):
    """gamma_a(t) = int_0^{1/a} a / vartheta(a w) exp(2 pi i w t) dw."""
    return _example4_eval(a, t, "weights_gamma", 1.0, check)


def example4_norms(a):
    """(||g_a||^2, ||gamma_a||^2) by Plancherel on the graded rule."""
    if not a > 0:
        raise DomainError(f"Lattice parameter must be positive, got a={a}")
    rule = graded_rule(DEFAULT_CONFIG["graded_panels"], DEFAULT_CONFIG["graded_order"])
    return float(np.sum(rule.weights_g_sq)) / a, a * float(np.sum(rule.weights_gamma_sq))


# --- window descriptor ---

@dataclass(frozen=True)
class WindowSpec:
    kind: str
    sigma: float = 1.0
    a: float = 1.0
    c_psi: float | None = None
    table: SampledSignal | None = field(default=None, compare=False, repr=False)
    scale: complex = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"Unknown window kind '{self.kind}'. Expected one of {KINDS}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if self.c_psi is not None and not self.c_psi > 0:
            raise DomainError(f"C_psi must be positive, got {self.c_psi}")
        if self.kind == "tabulated" and self.table is None:
            raise DomainError("tabulated window needs a SampledSignal table")

    @property
    def label(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(sigma={self.sigma:g})"
        if self.kind in ("example4_g", "example4_gamma"):
            return f"{self.kind}(a={self.a:g})"
        return self.kind

    @property
    def psi_constant(self) -> float:
        return self.c_psi if self.c_psi is not None else calibrate_bastiaans_constant()

    def scaled(self, factor):
        return replace(self, scale=complex(self.scale) * complex(factor))

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "gaussian":
            values = gaussian_eval(self.sigma, t)
        elif self.kind == "box":
            values = box_eval(t)
        elif self.kind == "bastiaans":
            values = bastiaans_eval(self.psi_constant, t)
        elif self.kind == "example4_g":
            values = example4_g(self.a, t, check=False)
        elif self.kind == "example4_gamma":
            values = example4_gamma(self.a, t, check=False)
        else:
            table = self.table
            re = np.interp(t, table.t, table.values.real, left=0.0, right=0.0)
            im = np.interp(t, table.t, table.values.imag, left=0.0, right=0.0)
            values = re + 1j * im
        return np.asarray(values, dtype=complex) * self.scale

    __call__ = evaluate

    def fourier(self, omega):
        """hat f(w) = int f(t) exp(-2 pi i w t) dt where a closed form exists."""
        omega = np.asarray(omega, dtype=float)
        if self.kind == "gaussian":
            values = (2 * self.sigma) ** 0.25 * np.exp(-np.pi * self.sigma * omega ** 2)
        elif self.kind == "box":
            values = np.sinc(omega)
        elif self.kind == "example4_g":
            values = example4_profile(self.a * omega)
        elif self.kind == "example4_gamma":
            inside = (omega > 0) & (omega < 1.0 / self.a)
            with np.errstate(divide="ignore"):
                values = np.where(inside, self.a / np.where(inside, example4_profile(self.a * omega), 1.0), 0.0)
            values = np.where((omega == 0) | (omega == 1.0 / self.a), np.inf, values)
        else:
            raise DomainError(f"No closed-form Fourier transform for window kind '{self.kind}'")
        return np.asarray(values, dtype=complex) * self.scale

    def envelope(self, T):
        """Upper bound for sup_{|t| >= T} |f(t)|."""
        T = max(float(T), 0.0)
        if self.kind == "gaussian":
            bound = (2 / self.sigma) ** 0.25 * math.exp(-math.pi * T * T / self.sigma)
        elif self.kind == "box":
            bound = 1.0 if T <= 0.5 else 0.0
        elif self.kind == "bastiaans":
            bound = self.psi_constant
        elif self.kind == "example4_g":
            bound = special.beta(1.25, 1.25) / self.a
        elif self.kind == "example4_gamma":
            bound = special.beta(0.75, 0.75)
        else:
            mask = np.abs(self.table.t) >= T
            bound = float(np.max(np.abs(self.table.values[mask]))) if mask.any() else 0.0
        return abs(self.scale) * bound

    def tail_bound(self, T, p=1):
        """Upper bound for int_{|t| > T} |f|^p; infinite when no decay is claimed."""
        T = max(float(T), 0.0)
        if self.kind == "gaussian":
            c = (2 / self.sigma) ** 0.25
            bound = c ** p * math.sqrt(self.sigma / p) * special.erfc(T * math.sqrt(p * math.pi / self.sigma))
        elif self.kind == "box":
            bound = max(0.0, 1.0 - 2.0 * T)
        elif self.kind == "tabulated":
            mask = np.abs(self.table.t) > T
            bound = float(np.sum(np.abs(self.table.values[mask]) ** p) * self.table.grid.h)
        else:
            return math.inf
        return abs(self.scale) ** p * bound * (1 + 1e-12)

    def truncation(self, a, eps=None):
        """Preferred lattice radius K for the direct Zak sum, or None when another path is used."""
        eps = eps or DEFAULT_CONFIG["zak_tail_eps"]
        if self.kind == "gaussian":
            return int(math.ceil(math.sqrt(self.sigma * math.log(1.0 / eps) / math.pi) / a)) + 2
        if self.kind == "box":
            return int(math.ceil(0.5 / a)) + 1
        if self.kind == "tabulated":
            reach = max(abs(self.table.grid.t_min), abs(self.table.grid.t_max))
            return int(math.ceil(reach / a)) + 1
        return None

    def zak(self, x, omega, a):
        """Closed-form Z_a where one exists (Bastiaans resummation, band-limited spectral form), else None."""
        if self.kind == "bastiaans":
            if a != 1.0:
                raise DomainError(f"The Bastiaans window is defined for a = 1, got a={a}")
            return np.asarray(bastiaans_zak(self.psi_constant, x, omega), dtype=complex) * self.scale
        if self.kind in ("example4_g", "example4_gamma"):
            if a != self.a:
                raise DomainError(f"{self.label} is built for a={self.a}, got a={a}")
            x, omega = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(omega, dtype=float))
            nu = omega - np.floor(a * omega) / a
            with np.errstate(divide="ignore", invalid="ignore"):
                values = self.fourier(nu) / a * np.exp(2j * np.pi * nu * x)
            return values
        return None

    def sample(self, grid: Grid) -> SampledSignal:
        return SampledSignal(grid, self.evaluate(grid.points), self.evaluate)


def gaussian(sigma=1.0) -> WindowSpec:
    return WindowSpec("gaussian", sigma=sigma)


def box() -> WindowSpec:
    return WindowSpec("box")


def bastiaans(c_psi=None) -> WindowSpec:
    return WindowSpec("bastiaans", c_psi=c_psi)


def example_g(a=1.0) -> WindowSpec:
    return WindowSpec("example4_g", a=a)


def example_gamma(a=1.0) -> WindowSpec:
    return WindowSpec("example4_gamma", a=a)


def tabulated(signal: SampledSignal) -> WindowSpec:
    return WindowSpec("tabulated", table=signal)


def window_from_name(name, sigma=1.0, a=1.0) -> WindowSpec:
    factories = {
        "gaussian": lambda: gaussian(sigma),
        "box": box,
        "bastiaans": bastiaans,
        "example4_g": lambda: example_g(a),
        "example4_gamma": lambda: example_gamma(a),
    }
    if name not in factories:
        raise DomainError(f"Unknown window '{name}'. Expected one of {sorted(factories)}")
    return factories[name]()


def amalgam_partial_sums(window: WindowSpec, radii, samples_per_cell=64):
    """sum_{|k| <= K} sup_{[k, k+1]} |f| for each K, sup estimated on a fine grid per cell."""
    radii = sorted(int(K) for K in radii)
    K_max = radii[-1]
    offsets = (np.arange(samples_per_cell) + 0.5) / samples_per_cell
    cells = np.arange(-K_max, K_max + 1)
    t = (cells[:, None] + offsets[None, :]).ravel()
    sup = np.max(np.abs(window.evaluate(t)).reshape(len(cells), samples_per_cell), axis=1)
    return [float(np.sum(sup[(cells >= -K) & (cells <= K)])) for K in radii]
