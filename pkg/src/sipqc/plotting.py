"""PNG figures written next to the CSV outputs (needs the optional ``plot`` extra)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _figure(nrows: int = 1, height: float = 3.2):
    try:
        from matplotlib.backends.backend_agg import FigureCanvasAgg
        from matplotlib.figure import Figure
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("plotting needs matplotlib: pip install 'sipqc[plot]'") from exc
    fig = Figure(figsize=(6.4, height * nrows), layout="constrained")
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, 1, squeeze=False)[:, 0]
    return fig, axes


def _save(fig, path: Path) -> Path:
    # fixed metadata keeps the PNG bytes reproducible
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def field_profile(rows: list[dict], path: Path) -> Path:
    x = np.array([r["x_m"] for r in rows]) * 1e6
    fig, (ax_b, ax_g) = _figure(2)
    ax_b.plot(x, [r["B_per_A"] for r in rows], "-", label="thin wire")
    ax_b.plot(x, [r["B_oracle"] for r in rows], "o", ms=3, label="square conductor")
    ax_b.set_ylabel("B per amp (T/A)")
    ax_b.legend(frameon=False)
    ax_g.plot(x, np.array([r["G_per_A"] for r in rows]) / 1e5, "-")
    ax_g.plot(x, np.array([r["G_oracle"] for r in rows]) / 1e5, "o", ms=3)
    ax_g.set_ylabel(r"G per amp ($10^5$ T/(m A))")
    ax_g.set_xlabel(r"x ($\mu$m)")
    return _save(fig, path)


def readout(times: np.ndarray, signal: np.ndarray, freqs: np.ndarray, spectrum: np.ndarray,
            amplitudes: np.ndarray, path: Path) -> Path:
    fig, (ax_t, ax_f, ax_q) = _figure(3, height=2.6)
    ax_t.plot(times * 1e6, signal.real, lw=0.5)
    ax_t.set_xlabel(r"t ($\mu$s)")
    ax_t.set_ylabel("Re s(t)")
    ax_f.plot(freqs / 1e6, spectrum.real, lw=0.5)
    ax_f.set_xlabel("f (MHz)")
    ax_f.set_ylabel("Re S(f)")
    ax_q.bar(np.arange(amplitudes.size), amplitudes, width=1.0)
    ax_q.axhline(0, color="k", lw=0.5)
    ax_q.set_xlabel("qubit")
    ax_q.set_ylabel("bin amplitude")
    return _save(fig, path)


def echoes(report: dict, path: Path) -> Path:
    fig, (ax,) = _figure()
    rows = report["echoes"]
    for site in sorted({r["site"] for r in rows}):
        pts = [(r["t_s"] * 1e6, r["amplitude"]) for r in rows if r["site"] == site]
        ax.plot(*zip(*pts), "o-", ms=3, label=site)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(r"echo centre ($\mu$s)")
    ax.set_ylabel("transverse amplitude")
    ax.legend(frameon=False)
    return _save(fig, path)
