"""CSV readers and figure builders.

Every plotted number is read verbatim from the input table; this module
draws, it never derives. Anything worth plotting that is not literally a
CSV column has to be emitted by the producing CLI first.
"""

import csv

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotgen"  # stable SVG element ids

import matplotlib.pyplot as plt
from matplotlib import colormaps, colors


class SchemaError(Exception):
    pass


class EmptyInputError(Exception):
    pass


SCHEMAS = {
    "family": ("sample", "slope", "x", "value"),
    "beta-panels": ("sample", "slope", "x", "value"),
    "covariance": ("theta", "R_hat", "stderr"),
    "kernels": ("n_period", "t", "y", "pn", "rho", "abs_err"),
}

_CMAP = colormaps["viridis"]


def read_table(path: str, kind: str) -> dict:
    """Parse one CSV into column lists, enforcing the kind's exact header."""
    expected = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != expected:
            found = ",".join(header) if header else "an empty file"
            raise SchemaError(f"{path}: kind '{kind}' needs columns "
                              f"{','.join(expected)}, found {found}")
        rows = []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(expected):
                raise SchemaError(f"{path}:{lineno}: expected "
                                  f"{len(expected)} cells, found {len(row)}")
            try:
                rows.append([float(tok) for tok in row])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric cell")
    if not rows:
        raise EmptyInputError(f"{path}: header only, no data rows")
    return {name: [row[i] for row in rows] for i, name in enumerate(expected)}


def _value_colors(vals):
    """Fixed colormap keyed by numeric value, stable across runs."""
    uniq = sorted(set(vals))
    if len(uniq) == 1:
        return {uniq[0]: _CMAP(0.5)}
    norm = colors.Normalize(uniq[0], uniq[-1])
    return {v: _CMAP(norm(v)) for v in uniq}


def _grouped(keys, xs, ys):
    series = {}
    for key, x, y in zip(keys, xs, ys):
        bucket = series.setdefault(key, ([], []))
        bucket[0].append(x)
        bucket[1].append(y)
    return series


def draw_family(ax, table) -> None:
    """One curve per (sample, slope) pair, color-keyed by slope."""
    color = _value_colors(table["slope"])
    series = _grouped(list(zip(table["sample"], table["slope"])),
                      table["x"], table["value"])
    labeled = set()
    for (sample, slope), (xs, ys) in sorted(series.items()):
        label = f"slope {slope:g}" if slope not in labeled else None
        labeled.add(slope)
        ax.plot(xs, ys, color=color[slope], linewidth=1.2, label=label)
    ax.legend(fontsize=8, loc="upper left")


def draw_covariance(ax, table) -> None:
    """Covariance curve with one marker and error bar per table row."""
    ax.errorbar(table["theta"], table["R_hat"], yerr=table["stderr"],
                marker="o", markersize=4, capsize=3, linewidth=1.2,
                color=_CMAP(0.25))


def draw_kernels(ax, table) -> None:
    """Kernel error against period count, one line per spacetime point."""
    color = _value_colors(table["t"])
    series = _grouped(list(zip(table["t"], table["y"])),
                      table["n_period"], table["abs_err"])
    labeled = set()
    for (t, _), (ns, errs) in sorted(series.items()):
        label = f"t={t:g}" if t not in labeled else None
        labeled.add(t)
        ax.plot(ns, errs, color=color[t], alpha=0.55, linewidth=1.0,
                label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(fontsize=8, loc="lower left")


_DRAW = {
    "family": draw_family,
    "covariance": draw_covariance,
    "kernels": draw_kernels,
}

AXIS_DEFAULTS = {
    "family": ("x", "value"),
    "beta-panels": ("x", "value"),
    "covariance": ("theta", "R(theta)"),
    "kernels": ("periods", "absolute error"),
}


def build_figure(kind: str, tables, labels, title: str = "",
                 xlabel: str = "", ylabel: str = ""):
    """Assemble the figure for a kind; beta-panels gets one axis per table."""
    xlabel = xlabel or AXIS_DEFAULTS[kind][0]
    ylabel = ylabel or AXIS_DEFAULTS[kind][1]
    if kind == "beta-panels":
        fig, axes = plt.subplots(1, len(tables),
                                 figsize=(4.0 * len(tables), 3.6),
                                 sharey=True, layout="constrained")
        axes = [axes] if len(tables) == 1 else list(axes)
        for ax, table, label in zip(axes, tables, labels):
            draw_family(ax, table)
            ax.set_title(label, fontsize=10)
            ax.set_xlabel(xlabel)
        axes[0].set_ylabel(ylabel)
    else:
        fig, ax = plt.subplots(figsize=(6.0, 4.0), layout="constrained")
        _DRAW[kind](ax, tables[0])
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
    if title:
        fig.suptitle(title)
    return fig


def save_figure(fig, path: str) -> None:
    """Write the image; embedded dates are suppressed so repeat renders of
    the same input are byte-identical."""
    kwargs = {"dpi": 150}
    lower = path.lower()
    if lower.endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    elif lower.endswith(".pdf"):
        kwargs["metadata"] = {"CreationDate": None}
    fig.savefig(path, **kwargs)
    plt.close(fig)
