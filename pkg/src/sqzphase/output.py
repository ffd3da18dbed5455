"""CSV emission and optional figure rendering.

Floats are written with 17 significant digits so they read back bit-exact.
Missing values (a variance that needs more repetitions, ``1/(N F)`` where F
vanishes) are written as empty fields.  Every file starts with one
``# meta:`` line.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence

from .bayes import PosteriorGrid
from .bounds import BoundsReport
from .experiments import ExperimentReport, PurityRow

BOUNDS_HEADER = ("theta", "fisher", "inv_NF", "sql", "ocrb", "qcrb")
POSTERIOR_HEADER = ("theta", "density")
TRIALS_HEADER = ("theta", "rep", "map", "post_var")
AGGREGATE_HEADER = ("theta", "emp_var", "mean_post_var", "stderr", "sql", "ocrb", "qcrb")
PURITY_HEADER = ("purity", "r", "r_prime", "delta_theta_theory", "delta_theta_empirical")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def csv_text(meta: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [meta, ",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def bounds_rows(reports: Iterable[BoundsReport]):
    return [(b.theta, b.fisher, b.inv_nf, b.sql, b.ocrb, b.qcrb) for b in reports]


def posterior_rows(post: PosteriorGrid):
    return list(zip(post.thetas.tolist(), post.density.tolist()))


def trial_rows(report: ExperimentReport):
    return [(t.theta_true, t.rep, t.map_estimate, t.posterior_variance) for t in report.trials]


def aggregate_rows(report: ExperimentReport):
    return [(a.theta, a.emp_var, a.mean_post_var, a.stderr, a.sql, a.ocrb, a.qcrb) for a in report.aggregates]


def purity_rows(rows: Iterable[PurityRow]):
    return [(p.purity, p.r, p.r_prime, p.delta_theta_theory, p.delta_theta_empirical) for p in rows]


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def sibling(path, tag: str) -> Path:
    """``results.csv`` -> ``results_<tag>.csv``."""
    p = Path(path)
    return p.with_name(f"{p.stem}_{tag}{p.suffix or '.csv'}")


# Rendering is a convenience on top of the CSVs and needs matplotlib.


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> None:
    import matplotlib
    import matplotlib.pyplot as plt

    fig.tight_layout()
    # fixed id salt and no timestamp, so re-rendering gives the same file
    with matplotlib.rc_context({"svg.hashsalt": "sqzphase"}):
        fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def plot_posteriors(curves: dict, theta_true: Optional[float], path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for n, post in sorted(curves.items(), reverse=True):
        ax.plot(post.thetas, post.density, label=f"N = {n}")
    if theta_true is not None:
        ax.axvline(theta_true, color="0.5", lw=0.8, ls=":")
    ax.set_xlabel(r"$\theta$ (rad)")
    ax.set_ylabel(r"$p(\theta\,|\,x)$")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_sweep(report: ExperimentReport, path) -> None:
    import numpy as np

    from .bounds import fisher_information, ocrb, qcrb, sql
    from .state import mean_photon_number

    plt = _pyplot()
    st, n = report.state, report.n_samples
    fig, ax = plt.subplots(figsize=(5, 3.5))
    fine = np.linspace(1e-3, np.pi / 2 - 1e-3, 400)
    ax.semilogy(fine, 1.0 / (n * fisher_information(st, fine)), color="0.6", lw=0.8, label="1/(NF)")
    ax.axhline(sql(mean_photon_number(st), n), color="tab:blue", ls=":", label="SQL")
    ax.axhline(ocrb(st, n), color="tab:orange", ls="--", label="OCRB")
    ax.axhline(qcrb(st, n), color="tab:green", ls="-.", label="QCRB")
    pts = [a for a in report.aggregates if a.emp_var is not None]
    ax.errorbar(
        [a.theta for a in pts],
        [a.emp_var for a in pts],
        yerr=[a.stderr or 0.0 for a in pts],
        fmt="o",
        color="tab:red",
        mfc="none",
        label=r"Var[$\theta$]",
    )
    top = max([a.emp_var for a in pts] + [sql(mean_photon_number(st), n)])
    ax.set_ylim(0.5 * qcrb(st, n), 5.0 * top)
    ax.set_xlabel(r"$\theta$ (rad)")
    ax.set_ylabel("variance")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def plot_purity_scan(rows: Sequence[PurityRow], path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot([p.purity for p in rows], [p.delta_theta_theory for p in rows], "s-", label="theory")
    emp = [p for p in rows if p.delta_theta_empirical is not None]
    if emp:
        ax.plot([p.purity for p in emp], [p.delta_theta_empirical for p in emp], "o", color="tab:red", mfc="none", label="simulated")
    ax.set_xlabel("purity")
    ax.set_ylabel(r"$\Delta\theta$ (rad)")
    ax.legend(frameon=False)
    _save(fig, path)


def emit_plot_data(kind: str, data, directory, meta: str, theta_true: Optional[float] = None, render: bool = True) -> list[Path]:
    """Write the figure-analogue CSVs (and an SVG when ``render``) into ``directory``.

    ``kind`` is ``"posterior"`` (``data``: dict N -> PosteriorGrid),
    ``"sweep"`` (an ExperimentReport) or ``"purity"`` (PurityRow list).
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    if kind == "posterior":
        for n, post in sorted(data.items()):
            p = d / f"posterior_N{n}.csv"
            write_text(p, csv_text(meta, POSTERIOR_HEADER, posterior_rows(post)))
            written.append(p)
        renderer = lambda path: plot_posteriors(data, theta_true, path)  # noqa: E731
    elif kind == "sweep":
        for name, header, rows in (
            ("sweep_aggregate.csv", AGGREGATE_HEADER, aggregate_rows(data)),
            ("sweep_trials.csv", TRIALS_HEADER, trial_rows(data)),
        ):
            write_text(d / name, csv_text(meta, header, rows))
            written.append(d / name)
        renderer = lambda path: plot_sweep(data, path)  # noqa: E731
    elif kind == "purity":
        write_text(d / "purity_scan.csv", csv_text(meta, PURITY_HEADER, purity_rows(data)))
        written.append(d / "purity_scan.csv")
        renderer = lambda path: plot_purity_scan(data, path)  # noqa: E731
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    if render:
        svg = d / f"{kind}.svg"
        renderer(svg)
        written.append(svg)
    return written
