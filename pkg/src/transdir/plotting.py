"""Render the plot-data series of a report as PNG figures."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.family": "sans-serif",
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.linewidth": 0.8,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 120,
    "svg.hashsalt": "transdir",
}

TITLES = {
    "fig1_languages": ("Accuracy by language (mean over feature sets)", "languages"),
    "fig2_chunk_size": ("Pooled chunks, POS bigrams", "tokens per chunk"),
    "fig3a_fw_pos3": ("Function words + top-k POS trigrams", "k"),
    "fig3b_fw_pos2": ("Function words + top-k POS bigrams", "k"),
}


def _save(fig, path):
    # no Software/date metadata, so repeated runs write identical bytes
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def render_figures(series, out_dir):
    out_dir = Path(out_dir)
    written = []
    with plt.rc_context(RC):
        for stem, points in series.items():
            title, xlabel = TITLES.get(stem, (stem, "x"))
            xs = [x for x, _ in points]
            ys = [100 * y for _, y in points]
            fig, ax = plt.subplots()
            if stem == "fig1_languages":
                ax.bar(range(len(xs)), ys, color="0.5", width=0.6)
                ax.set_xticks(range(len(xs)), [str(x) for x in xs])
                ax.set_ylim(min(ys + [50]) - 5, 100)
            else:
                ax.plot(xs, ys, marker="o", color="k", lw=1)
                if stem == "fig2_chunk_size":
                    ax.invert_xaxis()
            ax.axhline(50, ls="--", color="gray", lw=0.8)
            ax.set_xlabel(xlabel)
            ax.set_ylabel("accuracy (%)")
            ax.set_title(title)
            fig.tight_layout()
            path = out_dir / f"{stem}.png"
            _save(fig, path)
            written.append(path)
    return written
