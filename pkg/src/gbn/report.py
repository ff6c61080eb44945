"""Figure rendering for the report paths.

Accompanies the delimited outputs: the benchmark writes a grouped-bar SHD
chart per structure, the prevalence simulation a proportion-vs-p line plot
per group size. Rendering goes straight to files through the Agg canvas, so
no interactive backend is touched.
"""

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_BAR_COLORS = ("#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c")


def render_benchmark_figure(result, path):
    """Mean SHD per method, grouped by sample size, one panel per structure.

    Methods that failed every replicate at some sample size get no bar
    there, matching how memory refusals are reported in the tables.
    """
    structures = list(dict.fromkeys(r.structure for r in result.rows))
    methods = list(dict.fromkeys(r.method for r in result.rows))
    sizes = sorted(set(r.sample_size for r in result.rows))
    fig = Figure(figsize=(max(4.0, 3.6 * len(structures)), 3.6))
    axes = fig.subplots(1, len(structures), squeeze=False)[0]
    width = 0.8 / max(1, len(methods))
    for ax, structure in zip(axes, structures):
        for mi, method in enumerate(methods):
            xs, ys = [], []
            for si, size in enumerate(sizes):
                try:
                    row = result.row(structure, method, size)
                except KeyError:
                    continue
                if row.mean_shd is None:
                    continue
                xs.append(si + mi * width)
                ys.append(row.mean_shd)
            ax.bar(
                xs,
                ys,
                width=width,
                label=method,
                color=_BAR_COLORS[mi % len(_BAR_COLORS)],
            )
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(sizes))])
        ax.set_xticklabels([str(s) for s in sizes])
        ax.set_xlabel("sample size")
        ax.set_title(structure)
    axes[0].set_ylabel("mean SHD")
    axes[-1].legend(fontsize=8)
    fig.tight_layout()
    FigureCanvasAgg(fig).print_png(path)


def render_prevalence_figure(cells, path):
    """Proportion of groupwise-faithful pairs against arc probability,
    one line per group size."""
    sizes = sorted(set(c.group_size for c in cells))
    fig = Figure(figsize=(5.0, 3.6))
    ax = fig.subplots()
    for si, size in enumerate(sizes):
        pts = sorted((c.p, c.proportion) for c in cells if c.group_size == size)
        ax.plot(
            [p for p, _ in pts],
            [q for _, q in pts],
            marker="o",
            label=f"group size {size}",
            color=_BAR_COLORS[si % len(_BAR_COLORS)],
        )
    ax.set_xlabel("arc probability p")
    ax.set_ylabel("proportion groupwise faithful")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    FigureCanvasAgg(fig).print_png(path)
