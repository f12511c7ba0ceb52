"""Report files: flat key/value metrics, delimited tables, and figures.

Every CLI report path writes the delimited data first and then renders a
matching matplotlib figure next to it, so results stay scriptable and
eyeballable at the same time.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

FIGSIZE = (6.0, 4.0)


def format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_metrics(path, metrics: dict) -> None:
    """Flat ``key = value`` lines, one metric per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in metrics.items():
            fh.write(f"{key} = {format_value(value)}\n")


def write_table(path, header, rows, sep: str = "\t") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(sep.join(header) + "\n")
        for row in rows:
            fh.write(sep.join(format_value(v) for v in row) + "\n")


def bench_figure(path, points, exponent: float) -> None:
    """Log-log forward time against voxel count with the fitted power law."""
    m = np.array([p.n_voxels for p in points], dtype=float)
    t = np.array([p.forward_seconds for p in points], dtype=float)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(m, t, "o", label="measured")
    coeff = np.exp(np.polyfit(np.log(m), np.log(t), 1)[1])
    ax.loglog(m, coeff * m ** exponent, "--",
              label=f"fit: t ~ M^{exponent:.3f}")
    ax.loglog(m, t[0] * (m / m[0]) ** (4.0 / 3.0), ":", label="M^(4/3) guide")
    ax.set_xlabel("voxel count M")
    ax.set_ylabel("forward wall time [s]")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def residual_figure(path, residuals) -> None:
    """Relative residual per CGLS iteration on a log axis."""
    residuals = np.asarray(residuals, dtype=float)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    positive = residuals > 0
    ax.semilogy(np.arange(residuals.size)[positive], residuals[positive], "-o",
                markersize=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def slice_figure(path, image, k: int | None = None) -> None:
    """Middle (or given) z-slice of a reconstructed image."""
    g = image.grid
    k = g.m_z // 2 if k is None else k
    plane = image.values.reshape(g.m_z, g.m_s, g.m_s)[k]  # axes (j, i)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    im = ax.imshow(plane, origin="lower", cmap="viridis")
    ax.set_xlabel("voxel i (x)")
    ax.set_ylabel("voxel j (y)")
    ax.set_title(f"z-slice k={k}")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
