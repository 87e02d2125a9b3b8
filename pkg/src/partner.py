"""Reproducing partner of the Gaussian Gabor system G(phi, 1, 1).

xi_0[k, l] = <gamma, T_k M_l psi> = F(g mu_k)[l] with g(t) = C_psi exp(pi t^2), the
correction c[k, l] that makes the columns of xi_{k,l} = S_{k,l} xi_0 + p_{k,l}
square-summable, and the diagnostics built on them.
"""

import hashlib
import logging
import math
import os
import pickle
from dataclasses import asdict, dataclass, replace
from functools import lru_cache

import numpy as np
from opentelemetry import trace
from scipy.signal import fftconvolve

from src.config import DEFAULT_CONFIG
from src.errors import DomainError, NumericError, TruncationError
from src.gabor import LatticeSeq, box_onb_coefficients
from src.numeric_core import Grid, SampledSignal, composite_gauss_legendre, dft_from_samples
from src.report import Report
from src.theta_kernel import vartheta
from src.tracing import get_opentelemetry_tracer, set_report_attributes
from src.windows import WindowSpec, bastiaans_eval, calibrate_bastiaans_constant, gaussian, gaussian_eval

logger = logging.getLogger(__name__)
tracer = get_opentelemetry_tracer(__name__)

E_PI_4 = math.exp(-math.pi / 4)
XI0_TARGET = 1e-10


@dataclass(frozen=True)
class PartnerConfig:
    lattice_radius: int = DEFAULT_CONFIG["lattice_radius"]
    quad_panels: int = DEFAULT_CONFIG["quad_panels"]
    quad_order: int = DEFAULT_CONFIG["quad_order"]
    c_psi: float | None = None
    series_terms: int = DEFAULT_CONFIG["series_terms"]
    correction_sign: int = DEFAULT_CONFIG["correction_sign"]
    max_partial_terms: int = DEFAULT_CONFIG["max_partial_terms"]
    partial_tail_target: float = DEFAULT_CONFIG["partial_tail_target"]
    box_radius: int = DEFAULT_CONFIG["box_radius"]
    cache_dir: str | None = None

    def __post_init__(self):
        for name in ("lattice_radius", "quad_panels", "quad_order", "max_partial_terms", "box_radius"):
            if getattr(self, name) < 1:
                raise DomainError(f"PartnerConfig.{name} must be positive, got {getattr(self, name)}")
        if self.series_terms < 6:
            raise DomainError(f"series_terms must be >= 6 for a G_k tail below 1e-14, got {self.series_terms}")
        if self.correction_sign not in (-1, 1):
            raise DomainError(f"correction_sign must be +1 or -1, got {self.correction_sign}")
        if self.c_psi is not None and not self.c_psi > 0:
            raise DomainError(f"C_psi must be positive, got {self.c_psi}")

    @classmethod
    def from_config(cls, config, **overrides):
        keys = ("lattice_radius", "quad_panels", "quad_order", "series_terms", "correction_sign",
                "max_partial_terms", "partial_tail_target", "box_radius", "cache_dir")
        values = {key: config[key] for key in keys if key in config}
        values.update(overrides)
        return cls(**values)

    @property
    def psi_constant(self) -> float:
        return self.c_psi if self.c_psi is not None else calibrate_bastiaans_constant()

    def resolved(self):
        """Copy with C_psi pinned, so cache keys do not depend on lazy calibration."""
        return self if self.c_psi is not None else replace(self, c_psi=calibrate_bastiaans_constant())

    def cache_key(self) -> str:
        fields = asdict(self.resolved())
        fields.pop("cache_dir")
        return hashlib.sha256(repr(sorted(fields.items())).encode()).hexdigest()[:16]

    def rule(self, panels=None):
        return composite_gauss_legendre(-0.5, 0.5, panels or self.quad_panels, self.quad_order)


# --- disk cache ---

def get_cached_result(cache_dir, key):
    """Retrieve a cached table if available"""
    if not cache_dir:
        return None
    cache_file = os.path.join(cache_dir, f"{key}.pkl")
    if os.path.exists(cache_file):
        try:
            with open(cache_file, "rb") as f:
                logger.info(f"Using cached table: {key}")
                return pickle.load(f)
        except Exception as e:
            logger.warning(f"Failed to load cached table {key}: {e}")
    return None


def save_to_cache(cache_dir, key, data):
    """Save a table to the cache directory"""
    if not cache_dir:
        return
    cache_file = os.path.join(cache_dir, f"{key}.pkl")
    try:
        os.makedirs(cache_dir, exist_ok=True)
        with open(cache_file, "wb") as f:
            pickle.dump(data, f)
        logger.info(f"Saved table to cache: {key}")
    except Exception as e:
        logger.warning(f"Failed to cache table {key}: {e}")


# --- scalar factors ---

def g_series(k, terms=None):
    """G_k = sum_{n >= 0} (-1)^n exp(-pi (n^2 + 2|k| n + n + 1/4))."""
    terms = terms or DEFAULT_CONFIG["series_terms"]
    k = np.abs(np.asarray(k, dtype=float))
    n = np.arange(terms, dtype=float)
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    exponents = -np.pi * (n * n + n + 0.25 + 2 * np.multiply.outer(k, n))
    values = np.exp(exponents) @ signs
    return float(values) if values.ndim == 0 else values


def _require_nonzero(k):
    k = np.asarray(k)
    if np.any(k == 0):
        raise DomainError("H_k is defined for k != 0 only; the k = 0 factor is G_0")
    return k


def h_factor(k, terms=None):
    """H_k = sgn(k) (1 - exp(-2 pi |k|)) G_k."""
    k = _require_nonzero(k)
    values = np.sign(k) * -np.expm1(-2 * np.pi * np.abs(k)) * g_series(k, terms)
    return float(values) if np.ndim(values) == 0 else values


def h_factor_defect(k, terms=None):
    """H_k - sgn(k) exp(-pi/4) = sgn(k) e^{-pi/4} (S - E (1 + S)) without cancellation.

    S = sum_{n >= 1} (-1)^n exp(-pi (n^2 + n + 2|k| n)), E = exp(-2 pi |k|).
    """
    terms = terms or DEFAULT_CONFIG["series_terms"]
    k = _require_nonzero(k)
    ak = np.abs(k).astype(float)
    n = np.arange(1, terms, dtype=float)
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    tail = np.exp(-np.pi * (n * n + n + 2 * np.multiply.outer(ak, n))) @ signs
    values = np.sign(k) * E_PI_4 * (tail - np.exp(-2 * np.pi * ak) * (1 + tail))
    return float(values) if np.ndim(values) == 0 else values


def mu_fourier(k, l):
    """F(mu_k)[l]: G_0 delta_0[l] for k = 0, (-1)^{l+k} H_k / (2 pi (k + i l)) otherwise."""
    if k == 0:
        return complex(g_series(0)) if l == 0 else 0j
    sign = -1.0 if (k + l) % 2 else 1.0
    return sign * h_factor(k) / (2 * math.pi * complex(k, l))


def mu_profile(k, t, terms=None):
    """mu_k(t) = (-1)^k exp(-pi |k|) G_k exp(-2 pi k t) with the exponents combined."""
    t = np.asarray(t, dtype=float)
    sign = -1.0 if k % 2 else 1.0
    return sign * g_series(k, terms) * np.exp(-np.pi * abs(k) - 2 * np.pi * k * t)


# --- xi_0 ---

def _xi0_integrand(ks, t, terms):
    """exp(pi t^2 - pi |k| - 2 pi k t) (-1)^k G_k, rows indexed by k."""
    ks = np.asarray(ks, dtype=float)
    exponent = np.pi * t[None, :] ** 2 - np.pi * np.abs(ks)[:, None] - 2 * np.pi * np.outer(ks, t)
    signs = np.where(np.mod(ks, 2) == 0, 1.0, -1.0)
    return (signs * g_series(ks, terms))[:, None] * np.exp(exponent)


def xi0_block(ks, ls, cfg: PartnerConfig, panels=None) -> np.ndarray:
    """xi_0[k, l] for every k in ks and l in ls: one DFT matrix product over the quadrature nodes."""
    rule = cfg.rule(panels)
    samples = _xi0_integrand(ks, rule.nodes, cfg.series_terms)
    return cfg.psi_constant * dft_from_samples(samples, rule, ls)


def xi0_eval(k: int, l: int, cfg: PartnerConfig) -> complex:
    """Single xi_0 entry; raises NumericError when halving the panel count moves it by more than 1e-10."""
    fine = complex(xi0_block([k], [l], cfg)[0, 0])
    coarse = complex(xi0_block([k], [l], cfg, panels=max(cfg.quad_panels // 2, 1))[0, 0])
    if abs(fine - coarse) > XI0_TARGET:
        raise NumericError(f"xi_0[{k}, {l}] misses its quadrature target", node=(k, l),
                           attained=abs(fine - coarse))
    return fine


def xi0_oracle(k: int, l: int, cfg: PartnerConfig) -> complex:
    """<gamma, T_k M_l psi> by quadrature of the Bastiaans series itself."""
    rule = cfg.rule()
    psi = bastiaans_eval(cfg.psi_constant, rule.nodes - k, N=cfg.series_terms, domain=abs(k) + 1)
    return complex(np.sum(psi * np.exp(-2j * np.pi * l * rule.nodes) * rule.weights))


@lru_cache(maxsize=8)
def _xi0_table_cached(K: int, cfg: PartnerConfig) -> np.ndarray:
    key = f"xi0_{K}_{cfg.cache_key()}"
    table = get_cached_result(cfg.cache_dir, key)
    if table is None:
        r = np.arange(-K, K + 1)
        table = xi0_block(r, r, cfg)
        save_to_cache(cfg.cache_dir, key, table)
    table = np.asarray(table)
    table.setflags(write=False)
    return table


def xi0_table(K: int, cfg: PartnerConfig) -> np.ndarray:
    """xi_0[k, l] for |k|, |l| <= K at position [k + K, l + K]."""
    return _xi0_table_cached(int(K), cfg.resolved())


def xi0_lattice(R: int, cfg: PartnerConfig) -> LatticeSeq:
    return LatticeSeq(xi0_table(R, cfg))


def decay_envelope(cfg: PartnerConfig, k_max=64) -> float:
    """C = C_psi max(2 pi G_0 int e^{pi t^2}, 2 sup_k G_k e^{pi/4}) from the L1 norms of g mu_k."""
    rule = cfg.rule()
    gauss_integral = float(np.sum(np.exp(np.pi * rule.nodes ** 2) * rule.weights))
    sup_g = float(np.max(g_series(np.arange(k_max + 1), cfg.series_terms)))
    return cfg.psi_constant * max(2 * math.pi * g_series(0, cfg.series_terms) * gauss_integral,
                                  2 * sup_g * math.exp(math.pi / 4))


def ring_maxima(radii, cfg: PartnerConfig):
    """max |xi_0[k, l]| over each ring |k| + |l| = r."""
    K = max(radii)
    table = np.abs(xi0_table(K, cfg))
    r = np.arange(-K, K + 1)
    taxicab = np.abs(r)[:, None] + np.abs(r)[None, :]
    return [float(np.max(table[taxicab == radius])) for radius in radii]


def index_shift(xi: LatticeSeq, k: int, l: int, fill=None) -> LatticeSeq:
    """(S_{k,l} xi)[n, m] = xi[n - k, m - l] on the same box.

    Entries whose source lies outside the stored box come from ``fill(n, m)``
    (vectorized) when given, and are zero otherwise.
    """
    R = xi.R
    n, m = xi.indices
    src_n, src_m = n - k, m - l
    inside = (np.abs(src_n) <= R) & (np.abs(src_m) <= R)
    values = np.zeros(n.shape, dtype=complex)
    values[inside] = xi.values[src_n[inside] + R, src_m[inside] + R]
    if fill is not None and not np.all(inside):
        values[~inside] = fill(src_n[~inside], src_m[~inside])
    return LatticeSeq(values)


def shifted_xi0(k: int, l: int, R: int, cfg: PartnerConfig) -> LatticeSeq:
    """S_{k,l} xi_0 on |n|, |m| <= R with out-of-box entries recomputed from a larger table."""
    K = R + max(abs(k), abs(l))
    table = xi0_table(K, cfg)
    return index_shift(LatticeSeq(table[K - R:K + R + 1, K - R:K + R + 1]), k, l,
                       fill=lambda n, m: table[n + K, m + K])


# --- F^{-1}(h_k) and the correction c ---

def _boundary_distance(k, t):
    return np.where(k > 0, t + 0.5, 0.5 - t)


def inverse_fourier_hk(k: int, t, method="closed", target=None, cfg: PartnerConfig | None = None):
    """F^{-1}(h_k)(t) on (-1/2, 1/2) for h_k[l] = (-1)^{k+l} / (k + i l).

    method="closed": (-1)^k sgn(k) 2 pi exp(-2 pi |k| d) / (1 - exp(-2 pi |k|)), d the distance
    to the boundary point the exponential decays from.
    method="partial": symmetric partial sum with L = ceil(2 / (pi target)) terms.
    """
    if k == 0:
        raise DomainError("h_k is undefined for k = 0")
    t = np.asarray(t, dtype=float)
    cfg = cfg or PartnerConfig()
    if method == "closed":
        sign = (-1.0 if k % 2 else 1.0) * math.copysign(1.0, k)
        return sign * 2 * np.pi * np.exp(-2 * np.pi * abs(k) * _boundary_distance(k, t)) / -math.expm1(-2 * math.pi * abs(k))
    if method != "partial":
        raise DomainError(f"Unknown method '{method}'. Expected 'closed' or 'partial'")
    target = target or cfg.partial_tail_target
    L = int(math.ceil(2.0 / (math.pi * target)))
    if L > cfg.max_partial_terms:
        raise TruncationError(f"Partial sums for F^-1(h_{k}) need {L} terms, above {cfg.max_partial_terms}",
                              attained=2.0 / (math.pi * cfg.max_partial_terms))
    ls = np.arange(-L, L + 1)
    coefficients = np.where(ls % 2 == 0, 1.0, -1.0) * (-1.0 if k % 2 else 1.0) / (k + 1j * ls)
    flat = t.ravel()
    values = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, 256):
        block = flat[start:start + 256]
        values[start:start + 256] = np.exp(2j * np.pi * np.outer(block, ls)) @ coefficients
    values = values.reshape(t.shape)
    return complex(values) if values.ndim == 0 else values


def c_profile(k: int, t, cfg: PartnerConfig):
    """s (2 pi)^{-1} sgn(k) e^{-pi/4} F^{-1}(h_k)(t) g(t), formed from one combined exponent."""
    if k == 0:
        return np.zeros(np.shape(t))
    t = np.asarray(t, dtype=float)
    sign = cfg.correction_sign * (-1.0 if k % 2 else 1.0)
    exponent = np.pi * t * t - np.pi / 4 - 2 * np.pi * abs(k) * _boundary_distance(k, t)
    return sign * cfg.psi_constant * np.exp(exponent) / -math.expm1(-2 * math.pi * abs(k))


def c_block(ks, ls, cfg: PartnerConfig) -> np.ndarray:
    rule = cfg.rule()
    samples = np.array([c_profile(int(k), rule.nodes, cfg) for k in ks])
    return dft_from_samples(samples, rule, ls)


def c_coeff(k: int, l: int, cfg: PartnerConfig) -> complex:
    """c[k, l] = F(c_profile_k)[l]; c[0, l] = 0."""
    if k == 0:
        return 0j
    return complex(c_block([k], [l], cfg)[0, 0])


@lru_cache(maxsize=8)
def _c_table_cached(K: int, cfg: PartnerConfig) -> np.ndarray:
    key = f"c_{K}_{cfg.cache_key()}"
    table = get_cached_result(cfg.cache_dir, key)
    if table is None:
        r = np.arange(-K, K + 1)
        table = c_block(r, r, cfg)
        save_to_cache(cfg.cache_dir, key, table)
    table = np.asarray(table)
    table.setflags(write=False)
    return table


def c_table(K: int, cfg: PartnerConfig) -> np.ndarray:
    return _c_table_cached(int(K), cfg.resolved())


def beta_identity(k: int, l: int, cfg: PartnerConfig) -> complex:
    """2 pi (-1)^{k+l} F(F^{-1}(c[k, .]) / g)[l] (k + i l); equals correction_sign sgn(k) e^{-pi/4}."""
    if k == 0:
        raise DomainError("beta is defined for k != 0")
    rule = cfg.rule()
    g = cfg.psi_constant * np.exp(np.pi * rule.nodes ** 2)
    ratio = c_profile(k, rule.nodes, cfg) / g
    coefficient = complex(dft_from_samples(ratio, rule, [l])[0])
    sign = -1.0 if (k + l) % 2 else 1.0
    return 2 * math.pi * sign * coefficient * complex(k, l)


# --- columns xi_{k,l}[n, m] ---

def xi_entry(k: int, l: int, n: int, m: int, corrected: bool, cfg: PartnerConfig) -> complex:
    """xi_{k,l}[n, m] = xi_0[n - k, m - l] + (corrected ? (-1)^{n+m} c[k, l] : 0)."""
    value = xi0_eval(n - k, m - l, cfg)
    if corrected:
        value += (-1.0 if (n + m) % 2 else 1.0) * c_coeff(k, l, cfg)
    return value


def _reflected_window(table, n, m, R):
    """table[n - k + K, m - l + K] for |k|, |l| <= R, K the table radius."""
    K = (table.shape[0] - 1) // 2
    r = np.arange(-R, R + 1)
    return np.array(table[np.ix_(n - r + K, m - r + K)], dtype=complex)


@dataclass(frozen=True, eq=False)
class XiColumn:
    n: int
    m: int
    R: int
    corrected: bool
    entries: np.ndarray

    def sums(self, radii):
        """T_r(n, m) = sum_{|k|,|l| <= r} |xi_{k,l}[n, m]|^2 for each r."""
        squared = np.abs(self.entries) ** 2
        return [float(np.sum(squared[self.R - r:self.R + r + 1, self.R - r:self.R + r + 1])) for r in radii]


def xi_column(n: int, m: int, R: int, corrected: bool, cfg: PartnerConfig) -> XiColumn:
    """Entries xi_{k,l}[n, m] for |k|, |l| <= R at position [k + R, l + R]."""
    K = R + max(abs(n), abs(m))
    table = xi0_table(K, cfg)
    entries = _reflected_window(table, n, m, R)
    if corrected:
        entries += (-1.0 if (n + m) % 2 else 1.0) * c_table(R, cfg)
    return XiColumn(n, m, R, corrected, entries)


def column_sum(n: int, m: int, R: int, corrected: bool, cfg: PartnerConfig) -> float:
    if R < 16:
        raise DomainError(f"column_sum needs R >= 16, got {R}")
    return xi_column(n, m, R, corrected, cfg).sums([R])[0]


@tracer.start_as_current_span("column_sums")
def column_sums(n: int, m: int, radii, corrected: bool, cfg: PartnerConfig):
    radii = sorted(int(r) for r in radii)
    if radii[0] < 16:
        raise DomainError(f"column sums need radii >= 16, got {radii[0]}")
    span = trace.get_current_span()
    span.set_attribute("column.n", n)
    span.set_attribute("column.m", m)
    span.set_attribute("column.corrected", corrected)
    return xi_column(n, m, radii[-1], corrected, cfg).sums(radii)


def fit_log_growth(radii, sums):
    """Least-squares T_R = alpha + beta ln R; returns (beta, alpha, relative residual)."""
    x = np.log(np.asarray(radii, dtype=float))
    y = np.asarray(sums, dtype=float)
    beta, alpha = np.polyfit(x, y, 1)
    residual = y - (alpha + beta * x)
    spread = float(np.linalg.norm(y - y.mean()))
    relative = float(np.linalg.norm(residual)) / spread if spread > 0 else math.inf
    return float(beta), float(alpha), relative


def column_sums_payload(n, m, radii, corrected, cfg: PartnerConfig):
    """JSON payload {n, m, radii, sums, corrected, log_slope}."""
    radii = sorted(int(r) for r in radii)
    sums = column_sums(n, m, radii, corrected, cfg)
    slope = fit_log_growth(radii, sums)[0] if len(radii) >= 2 else None
    return {"n": n, "m": m, "radii": radii, "sums": sums, "corrected": corrected, "log_slope": slope}


# --- partner coefficients and the weak identity ---

@dataclass(frozen=True)
class BoxCombination:
    """Finite combination sum_{(k,l)} a[k, l] gamma_{k,l} of the box ONB."""

    coefficients: tuple

    @classmethod
    def of(cls, mapping):
        return cls(tuple(sorted((tuple(key), complex(value)) for key, value in dict(mapping).items())))

    @property
    def radius(self) -> int:
        return max(max(abs(k), abs(l)) for (k, l), _ in self.coefficients)

    @property
    def label(self) -> str:
        return " + ".join(f"{value:.3g}*gamma[{k},{l}]" for (k, l), value in self.coefficients)

    def lattice_seq(self, R=None) -> LatticeSeq:
        R = max(R or 1, self.radius, 1)
        values = np.zeros((2 * R + 1, 2 * R + 1), dtype=complex)
        for (k, l), value in self.coefficients:
            values[k + R, l + R] += value
        return LatticeSeq(values)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=complex)
        for (k, l), value in self.coefficients:
            inside = (t >= k - 0.5) & (t < k + 0.5)
            total = total + value * np.where(inside, np.exp(2j * np.pi * l * (t - k)), 0.0)
        return total

    def sample(self, grid: Grid) -> SampledSignal:
        return SampledSignal.from_function(grid, self.evaluate)

    def norm_sq(self) -> float:
        return float(sum(abs(value) ** 2 for _, value in self.coefficients))


def box_coefficients(f, R: int) -> LatticeSeq:
    """<f, gamma_{k,l}> on |k|, |l| <= R for a box combination, a window or a sampled signal."""
    if isinstance(f, BoxCombination):
        seq = f.lattice_seq(R)
        if seq.R > R:
            raise DomainError(f"Box combination reaches radius {seq.R}, beyond {R}")
        return seq
    if isinstance(f, WindowSpec):
        f = f.sample(Grid.default())
    return box_onb_coefficients(f, R)


def gaussian_box_overlaps(D: int, J: int, cfg: PartnerConfig) -> np.ndarray:
    """O[d, j] = <phi_{0,0}, gamma_{d,j}> = F(phi(. + d))[j] for |d| <= D, |j| <= J."""
    rule = cfg.rule()
    ds = np.arange(-D, D + 1)
    samples = gaussian_eval(1.0, rule.nodes[None, :] + ds[:, None])
    return dft_from_samples(samples, rule, np.arange(-J, J + 1))


def partner_analysis(f, R_out: int, cfg: PartnerConfig, R=None) -> LatticeSeq:
    """<f, psi_{n,m}> for |n|, |m| <= R_out from the box coefficients of f on |k|, |l| <= R.

    (a * xi_0)[n, m] + (-1)^{n+m} sum_{k,l} a[k, l] c[k, l].
    """
    R = R or cfg.box_radius
    a = box_coefficients(f, R).values
    K = R_out + R
    shifted = fftconvolve(xi0_table(K, cfg), a, mode="valid")
    correction = complex(np.sum(a * c_table(R, cfg)))
    r = np.arange(-R_out, R_out + 1)
    signs = np.where((r[:, None] + r[None, :]) % 2 == 0, 1.0, -1.0)
    return LatticeSeq(shifted + signs * correction)


def partner_coeff(f, n: int, m: int, R: int, cfg: PartnerConfig) -> complex:
    """<f, psi_{n,m}> = sum_{|k|,|l| <= R} xi_{k,l}[n, m] <f, gamma_{k,l}>."""
    coefficients = box_coefficients(f, R).values
    column = xi_column(n, m, R, True, cfg)
    return complex(np.sum(column.entries * coefficients))


def _synthesis_weights(h, R_out: int, cfg: PartnerConfig) -> np.ndarray:
    """<phi_{n,m}, h> for |n|, |m| <= R_out."""
    r = np.arange(-R_out, R_out + 1)
    if isinstance(h, WindowSpec):
        if h.kind != "gaussian" or h.sigma != 1.0:
            raise DomainError(f"Weak identity supports h = phi or box combinations, got {h.label}")
        return vartheta(r[:, None], r[None, :]) * np.conj(complex(h.scale))
    b = box_coefficients(h, cfg.box_radius)
    Rb = b.R
    D = R_out + Rb
    overlaps = gaussian_box_overlaps(D, D, cfg)
    weights = np.zeros((2 * R_out + 1, 2 * R_out + 1), dtype=complex)
    for k in range(-Rb, Rb + 1):
        for l in range(-Rb, Rb + 1):
            value = b.get(k, l)
            if value == 0:
                continue
            weights += np.conj(value) * _reflected_window(overlaps, k, l, R_out)
    return weights


def exact_inner_product(f, h, cfg: PartnerConfig) -> complex:
    a = box_coefficients(f, cfg.box_radius)
    if isinstance(h, WindowSpec):
        overlaps = gaussian_box_overlaps(a.R, a.R, cfg)
        return complex(np.sum(a.values * np.conj(overlaps))) * np.conj(complex(h.scale))
    b = box_coefficients(h, cfg.box_radius)
    R = max(a.R, b.R)
    return complex(np.sum(_pad(a, R).values * np.conj(_pad(b, R).values)))


def _pad(seq: LatticeSeq, R: int) -> LatticeSeq:
    if seq.R == R:
        return seq
    values = np.zeros((2 * R + 1, 2 * R + 1), dtype=complex)
    values[R - seq.R:R + seq.R + 1, R - seq.R:R + seq.R + 1] = seq.values
    return LatticeSeq(values)


@tracer.start_as_current_span("weak_identity_check")
def weak_identity_check(f, h, cfg: PartnerConfig, radii=None, tolerance=None, label=None) -> Report:
    """|sum_{|n|,|m| <= R} <f, psi_{n,m}> <phi_{n,m}, h> - <f, h>| for growing R."""
    radii = sorted(radii or DEFAULT_CONFIG["weak_radii"])
    tolerance = tolerance if tolerance is not None else DEFAULT_CONFIG["weak_tolerance"]
    R_max = radii[-1]
    label = label or getattr(f, "label", "f")
    report = Report("weak_identity", config={"pair": label, "radii": radii, "box_radius": cfg.box_radius,
                                             "correction_sign": cfg.correction_sign})
    coefficients = partner_analysis(f, R_max, cfg).values
    weights = _synthesis_weights(h, R_max, cfg)
    target = exact_inner_product(f, h, cfg)
    terms = coefficients * weights
    partial = [complex(np.sum(terms[R_max - r:R_max + r + 1, R_max - r:R_max + r + 1])) for r in radii]
    errors = [abs(value - target) for value in partial]
    meta = {"partial_sums": partial, "errors": errors, "target": target}
    decreasing = all(b <= a for a, b in zip(errors[:-1], errors[1:]))
    report.add("error_decreasing", decreasing, errors[-1], None, **meta)
    report.check_le("final_error", errors[-1], tolerance)
    set_report_attributes(trace.get_current_span(), report)
    return report


def shift_lemma_residual(k: int, l: int, R: int, cfg: PartnerConfig) -> float:
    """|<D_G(S_{k,l} xi_0), phi> - <gamma_{k,l}, phi>| at truncation R."""
    shifted = shifted_xi0(k, l, R, cfg).values
    r = np.arange(-R, R + 1)
    synthesized = complex(np.sum(shifted * vartheta(r[:, None], r[None, :])))
    D = max(abs(k), abs(l), 1)
    target = np.conj(gaussian_box_overlaps(D, D, cfg)[k + D, l + D])
    return abs(synthesized - complex(target))


def standard_test_pairs():
    """Test pairs (f, h) from the dense class: finite box combinations and phi."""
    g00 = BoxCombination.of({(0, 0): 1.0})
    g10 = BoxCombination.of({(1, 0): 1.0})
    mixed = BoxCombination.of({(0, 0): 2 ** -0.5, (1, 1): 2 ** -0.5})
    g21 = BoxCombination.of({(2, 1): 1.0})
    g01 = BoxCombination.of({(0, 1): 1.0})
    return [
        ("gamma00_gamma00", g00, g00),
        ("gamma10_gamma00", g10, g00),
        ("mixed_mixed", mixed, mixed),
        ("gamma21_gamma21", g21, g21),
        ("gamma01_phi", g01, gaussian(1.0)),
    ]


def decay_check(R: int, cfg: PartnerConfig, report: Report | None = None) -> Report:
    """|xi_0[k, l]| <= C / (2 pi (1 + |k|)) on the box |k|, |l| <= R."""
    report = report or Report("xi0_decay", config={"R": R})
    table = np.abs(xi0_table(R, cfg))
    r = np.arange(-R, R + 1)
    bound = decay_envelope(cfg) / (2 * math.pi * (1 + np.abs(r)))[:, None]
    worst = float(np.max(table / bound))
    # equality holds at (0, 0): both sides are the L1 norm of g mu_0
    report.check_le("decay.ratio_to_envelope", worst, 1 + 1e-9, envelope=decay_envelope(cfg))
    return report


@tracer.start_as_current_span("shift_invariance_demo")
def shift_invariance_demo(cfg: PartnerConfig, radii=None, ring_radii=(16, 32, 64)) -> Report:
    """Uncorrected columns (forced by shift invariance) grow like ln R; corrected ones converge."""
    radii = sorted(radii or DEFAULT_CONFIG["column_radii"])
    report = Report("shift_invariance", config={"radii": radii, "ring_radii": list(ring_radii),
                                                "correction_sign": cfg.correction_sign})
    uncorrected = column_sums(0, 0, radii, False, cfg)
    slope, intercept, residual = fit_log_growth(radii, uncorrected)
    report.add("uncorrected.log_slope_positive", slope > 0, slope, 0.0, sums=uncorrected, intercept=intercept)
    report.check_le("uncorrected.fit_residual", residual, 0.2)

    corrected = column_sums(0, 0, radii, True, cfg)
    report.check_le("corrected.tail", corrected[-1] - corrected[-2], 1e-3, sums=corrected)

    # off the origin the k = 0 and k = n lines decay like 1/l: increments halve per doubling
    off_origin = column_sums(1, 1, radii, True, cfg)
    increments = np.diff(off_origin)
    report.check_le("corrected_11.tail", increments[-1], 2e-3, sums=off_origin)
    report.check_le("corrected_11.increment_ratio", float(np.max(increments[1:] / increments[:-1])), 0.6)

    maxima = ring_maxima(list(ring_radii), cfg)
    ratios = [b / a for a, b in zip(maxima[:-1], maxima[1:])]
    report.check_le("ring_maxima.ratio_per_doubling", max(ratios), 0.6, maxima=maxima)
    decay_check(max(ring_radii), cfg, report)
    set_report_attributes(trace.get_current_span(), report)
    return report
