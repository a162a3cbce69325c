"""Authenticity diagnostics: KDE curves, 2-D PCA, and SVG/CSV plot export.

The t-SNE embedding lives in tsne.py; this module holds the closed-form
diagnostics and the (deliberately minimal) SVG writer.
"""

import csv
from xml.sax.saxutils import escape

import numpy as np


def silverman_bandwidth(values):
    """0.9 * min(std, IQR/1.34) * n^(-1/5); a zero factor falls back to the
    other one so a clustered-but-spread sample still gets a usable width."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    sigma = values.std(ddof=1)
    q75, q25 = np.percentile(values, [75, 25])
    iqr_term = (q75 - q25) / 1.34
    candidates = [c for c in (sigma, iqr_term) if c > 0]
    if not candidates:
        return 0.0
    return 0.9 * min(candidates) * n ** (-0.2)


def kde_curve(values, grid_points=256):
    """Gaussian KDE on a grid spanning [min - 3h, max + 3h].

    Degenerate inputs (no spread) produce a narrow spike representation
    centered on the common value instead of NaNs.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("kde_curve needs at least one value")
    h = silverman_bandwidth(values) if values.size >= 2 else 0.0
    if h == 0.0:
        # spike: a tight gaussian of fixed tiny width around the single value
        center = float(values[0])
        width = max(abs(center) * 1e-3, 1e-3)
        grid = np.linspace(center - 4 * width, center + 4 * width, grid_points)
        density = np.exp(-0.5 * ((grid - center) / width) ** 2) / (width * np.sqrt(2 * np.pi))
        return grid, density
    grid = np.linspace(values.min() - 3 * h, values.max() + 3 * h, grid_points)
    z = (grid[:, None] - values[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (values.size * h * np.sqrt(2 * np.pi))
    return grid, density


def pca_project(matrix, k=2):
    """Center, eigendecompose the covariance, project onto the top-k axes.

    Returns (projected n x k, eigenvalues descending, components k x d).
    Component signs are fixed so each axis' largest-magnitude entry is
    positive.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n, d = matrix.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if k > d:
        raise ValueError("k exceeds the feature count")
    centered = matrix - matrix.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    for j in range(d):
        lead = np.argmax(np.abs(eigvecs[:, j]))
        if eigvecs[lead, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    components = eigvecs[:, :k].T
    return centered @ components.T, eigvals, components


# ---------------------------------------------------------------------------
# plot export

SVG_WIDTH, SVG_HEIGHT, SVG_MARGIN = 640, 440, 50
SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _scale_points(xs, ys, x_range, y_range):
    x_lo, x_hi = x_range
    y_lo, y_hi = y_range
    span_x = (x_hi - x_lo) or 1.0
    span_y = (y_hi - y_lo) or 1.0
    w = SVG_WIDTH - 2 * SVG_MARGIN
    h = SVG_HEIGHT - 2 * SVG_MARGIN
    px = SVG_MARGIN + (np.asarray(xs) - x_lo) / span_x * w
    py = SVG_HEIGHT - SVG_MARGIN - (np.asarray(ys) - y_lo) / span_y * h
    return px, py


def export_plot(series, kind, path, title=""):
    """Write an SVG plot plus a sibling CSV of the plotted data.

    series: list of (name, xs, ys). kind "kde" draws polylines, "scatter"
    draws circle groups. The CSV carries columns series,x,y.
    """
    if kind not in ("kde", "scatter"):
        raise ValueError(f"unknown plot kind {kind!r}")
    path = str(path)
    all_x = np.concatenate([np.asarray(xs, dtype=np.float64) for _, xs, _ in series])
    all_y = np.concatenate([np.asarray(ys, dtype=np.float64) for _, _, ys in series])
    x_range = (float(all_x.min()), float(all_x.max()))
    y_range = (float(all_y.min()), float(all_y.max()))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{SVG_WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]
    for i, (name, xs, ys) in enumerate(series):
        color = SERIES_COLORS[i % len(SERIES_COLORS)]
        px, py = _scale_points(xs, ys, x_range, y_range)
        parts.append(f'<g id="{escape(name)}">')
        if kind == "kde":
            points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
            )
        else:
            for x, y in zip(px, py):
                parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}" fill-opacity="0.6"/>')
        parts.append("</g>")
        legend_y = 40 + 16 * i
        parts.append(
            f'<text x="{SVG_WIDTH - SVG_MARGIN - 120}" y="{legend_y}" fill="{color}" '
            f'font-family="sans-serif" font-size="12">{escape(name)}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")

    csv_path = path.rsplit(".", 1)[0] + ".csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "x", "y"])
        for name, xs, ys in series:
            for x, y in zip(xs, ys):
                writer.writerow([name, format(float(x), ".10g"), format(float(y), ".10g")])
    return path, csv_path
