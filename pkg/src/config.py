import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

ENV_PREFIX = "REPGABOR_"

# Default configuration settings - every numeric default of the package lives here
DEFAULT_CONFIG = {
    # desk-scale grid for inner products of Gaussian-type signals
    "grid_t_min": -6.0,
    "grid_t_max": 6.0,
    "grid_samples": 4096,
    # grid whose midpoints line up with the Zak x-nodes (h = 1/256)
    "zak_grid_t_min": -8.0,
    "zak_grid_t_max": 8.0,
    "zak_grid_samples": 4096,
    "zak_resolution": 512,
    "zak_tail_eps": 1e-14,
    "zak_tail_bound": 1e-10,
    "zak_inverse_cells": 8,
    "zero_threshold": 1e-6,
    "blowup_radii": [0.2, 0.1, 0.05, 0.025],
    "blowup_spread": 0.2,
    "exclusion_radius": 0.05,
    "quasiperiodicity_nodes": 64,
    # quadrature
    "quad_panels": 64,
    "quad_order": 32,
    "graded_panels": 8,
    "graded_order": 32,
    "graded_target": 1e-7,
    # windows
    "bastiaans_domain": 8.0,
    "bastiaans_terms": 6,
    "calibration_node": [0.25, 0.0],
    "lp_radii": [2.0, 4.0, 6.0, 8.0],
    # theta kernel
    "theta_radius": 5,
    "theta_grid": 1024,
    "theta_fd_step": 1e-3,
    "kernel_radius": 10,
    # partner
    "lattice_radius": 64,
    "series_terms": 8,
    "correction_sign": -1,
    "max_partial_terms": 200000,
    "partial_tail_target": 1e-9,
    "column_radius": 256,
    "column_radii": [32, 64, 128, 256],
    "weak_radii": [8, 16, 32, 64],
    "weak_tolerance": 0.02,
    "box_radius": 4,
    # example-pair figure grid
    "fig_t_min": -8.0,
    "fig_t_max": 8.0,
    "fig_samples": 1601,
    "seed": 42,
    "cache_dir": None,
    "log_level": "WARNING",
}

_INT_KEYS = {
    "grid_samples", "zak_grid_samples", "zak_resolution", "zak_inverse_cells",
    "quasiperiodicity_nodes", "quad_panels", "quad_order", "graded_panels", "graded_order",
    "bastiaans_terms", "theta_radius", "theta_grid", "kernel_radius", "lattice_radius",
    "series_terms", "correction_sign", "max_partial_terms", "column_radius", "box_radius",
    "fig_samples", "seed",
}
_STR_KEYS = {"cache_dir", "log_level"}


def _parse_env_value(key, raw, default):
    env_name = f"{ENV_PREFIX}{key.upper()}"
    if key in _STR_KEYS:
        return raw
    parser = int if key in _INT_KEYS else float
    try:
        return parser(raw)
    except ValueError:
        logger.warning(f"Invalid value for {env_name}: {raw!r}. Using default {default!r}.")
        return default


def load_config(overrides=None):
    """Returns a fresh copy of DEFAULT_CONFIG with REPGABOR_* environment values and overrides applied."""
    config = DEFAULT_CONFIG.copy()
    for key, default in DEFAULT_CONFIG.items():
        if isinstance(default, list):
            continue
        raw = os.getenv(f"{ENV_PREFIX}{key.upper()}")
        if raw is None or raw == "":
            continue
        config[key] = _parse_env_value(key, raw, default)
    if overrides:
        config.update({k: v for k, v in overrides.items() if v is not None})
    return config
