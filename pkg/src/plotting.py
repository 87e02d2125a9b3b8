"""Static SVG figures with JSON sidecars.

Figures are rendered with the Agg backend into memory, with a fixed SVG hash salt
and no date metadata, so identical inputs give byte-identical files.
"""

import io
import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.report import atomic_write_bytes, sidecar_path, write_json  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "repgabor"


def _render_svg(fig) -> bytes:
    buffer = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buffer.getvalue()


def plot_complex_panels(panels, path, config=None, title=None):
    """One subplot per (label, t, values): solid real part, dashed imaginary part.

    Writes ``path`` (SVG) and a sidecar JSON next to it with the config echo and the
    plotted ranges. Returns the sidecar payload.
    """
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 3.6), squeeze=False)
    ranges = []
    for ax, (label, t, values) in zip(axes[0], panels):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=complex)
        ax.plot(t, values.real, "-", color="black", linewidth=1.0, label="Re")
        ax.plot(t, values.imag, "--", color="black", linewidth=1.0, label="Im")
        ax.set_title(label)
        ax.set_xlabel("t")
        ax.grid(True, linewidth=0.3)
        ax.legend(loc="upper right", fontsize=8)
        ranges.append({
            "label": label,
            "t_min": float(t[0]),
            "t_max": float(t[-1]),
            "samples": int(t.size),
            "re_min": float(values.real.min()),
            "re_max": float(values.real.max()),
            "im_min": float(values.imag.min()),
            "im_max": float(values.imag.max()),
        })
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    atomic_write_bytes(path, _render_svg(fig))
    payload = {"figure": os.path.basename(str(path)), "panels": ranges, "config": config or {}}
    write_json(sidecar_path(path), payload)
    logger.info(f"Wrote figure {path} with {len(panels)} panels")
    return payload

