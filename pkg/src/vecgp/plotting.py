"""Static SVG charts for benchmark reports."""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.ticker import LogLocator, NullFormatter  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "svg.hashsalt": "vecgp",  # stable element ids across renders
    "svg.fonttype": "none",
}


def _decade_axis(axis):
    axis.set_major_locator(LogLocator(base=10.0, numticks=99))
    axis.set_minor_locator(LogLocator(base=10.0, subs=np.arange(2, 10) * 0.1, numticks=99))
    axis.set_minor_formatter(NullFormatter())


def _span_decades(ax, which, values):
    """Widen a log axis so it starts and ends on whole decades."""
    lo = 10.0 ** np.floor(np.log10(min(values)))
    hi = 10.0 ** np.ceil(np.log10(max(values)))
    if hi <= lo:
        hi = lo * 10.0
    (ax.set_xlim if which == "x" else ax.set_ylim)(lo, hi)


def scaling_figure(report):
    """Average total run time against point count, one series per backend."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs_all, ys_all = [], []
        for backend in dict.fromkeys(e.backend for e in report.entries):
            done = sorted(
                (e for e in report.entries if e.backend == backend and not e.dnf_reason),
                key=lambda e: e.points,
            )
            if not done:
                continue
            x = [e.points for e in done]
            y = [e.avg_total_s for e in done]
            err = [e.std_total_s for e in done]
            ax.errorbar(x, y, yerr=err, marker="o", capsize=3, label=backend)
            xs_all += x
            ys_all += [v for v in y if v > 0]
        ax.set_xscale("log")
        ax.set_yscale("log")
        _decade_axis(ax.xaxis)
        _decade_axis(ax.yaxis)
        if xs_all:
            _span_decades(ax, "x", xs_all)
        if ys_all:
            _span_decades(ax, "y", ys_all)
        ax.set_xlabel("fitness cases (points)")
        ax.set_ylabel("average total time (s)")
        ax.set_title("Run time by domain size")
        if xs_all:
            ax.legend()
        fig.tight_layout()
    return fig


def mean_trajectories(report):
    """Per test set, the generation-wise mean best RMSE over one backend's runs."""
    out = {}
    for side in dict.fromkeys(r.test_side for r in report.records):
        runs = [r for r in report.records if r.test_side == side]
        # backends replay identical paths, so one backend's runs suffice
        backend = runs[0].backend
        trajs = [r.trajectory for r in runs if r.backend == backend]
        n = min(len(t) for t in trajs)
        out[side] = np.mean([t[:n] for t in trajs], axis=0)
    return out


def fitness_figure(report):
    """Best RMSE per generation, one line per test set."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for side, traj in mean_trajectories(report).items():
            ax.plot(np.arange(len(traj)), traj, label=f"{side}^2 ({side * side:,} points)")
        ax.set_xlabel("generation")
        ax.set_ylabel("best RMSE (mean over runs)")
        ax.set_title("Best fitness across generations")
        if report.records:
            ax.legend()
        fig.tight_layout()
    return fig


def save_svg(fig, path) -> None:
    with plt.rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_report(report, out_dir):
    """Write ``scaling.svg`` and ``fitness.svg`` into ``out_dir``; return the paths."""
    paths = []
    for name, make in (("scaling.svg", scaling_figure), ("fitness.svg", fitness_figure)):
        path = os.path.join(out_dir, name)
        save_svg(make(report), path)
        paths.append(path)
    return paths
