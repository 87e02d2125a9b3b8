"""Verification reports and atomic artifact writers."""

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def handle_json_float_values(data):
    """
    Handles special float values (NaN, Infinity, -Infinity) and numpy scalars,
    replacing them with values that can be serialized to JSON.
    NaN becomes null so that a missing measurement never reads as a passing zero.
    """
    if isinstance(data, dict):
        return {str(k): handle_json_float_values(v) for k, v in data.items()}
    elif isinstance(data, (list, tuple)):
        return [handle_json_float_values(item) for item in data]
    elif isinstance(data, np.ndarray):
        return handle_json_float_values(data.tolist())
    elif isinstance(data, (bool, np.bool_)):
        return bool(data)
    elif isinstance(data, (int, np.integer)):
        return int(data)
    elif isinstance(data, (complex, np.complexfloating)):
        return {"re": handle_json_float_values(float(data.real)), "im": handle_json_float_values(float(data.imag))}
    elif isinstance(data, (float, np.floating)):
        data = float(data)
        if math.isnan(data):
            return None
        elif math.isinf(data):
            return 1.0e308 if data > 0 else -1.0e308
        return data
    return data


def atomic_write_bytes(path, payload: bytes):
    """Writes payload to path via a temp file in the same directory and os.replace."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"Wrote {len(payload)} bytes to {path}")


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps_json(data) -> str:
    return json.dumps(handle_json_float_values(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, data):
    atomic_write_text(path, dumps_json(data))


def sidecar_path(artifact_path) -> str:
    root, _ = os.path.splitext(str(artifact_path))
    return f"{root}.json"


def write_dataframe_csv(df: pd.DataFrame, path, config=None):
    """Writes df as CSV; with a config, also writes the JSON sidecar that echoes it."""
    atomic_write_text(path, df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))
    if config is not None:
        write_json(sidecar_path(path), {"artifact": os.path.basename(str(path)), "rows": len(df),
                                        "columns": list(df.columns), "config": config})


@dataclass
class Check:
    check: str
    value: float | None
    tolerance: float | None
    passed: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "check": self.check,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
            "meta": self.meta,
        }


@dataclass
class Report:
    """Named list of checks with the config that produced them.

    ``passed`` is the conjunction of all checks; an empty report passes.
    """

    name: str
    checks: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check, passed, value=None, tolerance=None, **meta) -> Check:
        entry = Check(check, _as_float(value), _as_float(tolerance), bool(passed), meta)
        self.checks.append(entry)
        if not entry.passed:
            logger.info(f"[{self.name}] check '{check}' failed: value={value} tolerance={tolerance}")
        return entry

    def check_le(self, check, value, tolerance, **meta) -> Check:
        """value <= tolerance; a non-finite value fails."""
        value = float(value)
        return self.add(check, math.isfinite(value) and value <= tolerance, value, tolerance, **meta)

    def check_ge(self, check, value, bound, **meta) -> Check:
        value = float(value)
        return self.add(check, math.isfinite(value) and value >= bound, value, bound, **meta)

    def check_close(self, check, value, expected, tolerance, **meta) -> Check:
        deviation = abs(complex(value) - complex(expected))
        return self.add(check, deviation <= tolerance, deviation, tolerance,
                        measured=value, expected=expected, **meta)

    def warn(self, message):
        logger.warning(f"[{self.name}] {message}")
        self.warnings.append(message)

    def get(self, check) -> Check:
        for entry in self.checks:
            if entry.check == check:
                return entry
        raise KeyError(check)

    def merge(self, other, prefix=None):
        """Appends the checks and warnings of another report, optionally prefixing check names."""
        for entry in other.checks:
            name = f"{prefix}.{entry.check}" if prefix else entry.check
            self.checks.append(Check(name, entry.value, entry.tolerance, entry.passed, dict(entry.meta)))
        self.warnings.extend(f"{prefix}: {w}" if prefix else w for w in other.warnings)
        return self

    def to_dict(self):
        return {
            "report": self.name,
            "passed": self.passed,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def write_json(self, path):
        atomic_write_text(path, self.to_json())

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]


def _as_float(value):
    if value is None:
        return None
    if isinstance(value, (complex, np.complexfloating)):
        return float(abs(value))
    return float(value)
