"""One rendering function per experiment figure.

Every function takes the experiment output directory and returns a
matplotlib ``Figure``; :func:`render` dispatches by figure name and writes
the image.  No statistics are computed here — slopes, bands, and exact
reference curves are read from the CSV tables and ``summary.json`` that the
experiment already wrote.  Only axis transforms (log scales, guide lines of
a given slope) happen at render time.
"""

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .loader import load_summary, load_table  # noqa: E402


def _guide_line(ax, x, y0, slope, label):
    """Straight guide of the given log-log slope anchored at (x[0], y0)."""
    x = np.asarray(x, dtype=float)
    ax.plot(x, y0 * (x / x[0]) ** slope, "k--", lw=1.0,
            label=f"{label} (slope {slope:g})")


def _groups(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def fig_oracle_compare(input_dir):
    t = load_table(os.path.join(input_dir, "oracle_compare.csv"),
                   ["time", "empirical_var", "exact_var", "stderr"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(t["time"], t["empirical_var"], yerr=t["stderr"], fmt="o",
                ms=4, capsize=3, label="solver ensemble")
    ax.plot(t["time"], t["exact_var"], "k-", lw=1.0, label="exact variance")
    ax.set_xlabel("time")
    ax.set_ylabel("probe variance")
    ax.legend(frameon=False)
    return fig


def fig_moments(input_dir):
    t = load_table(os.path.join(input_dir, "moments.csv"),
                   ["gap", "moment", "stderr"])
    summary = load_summary(input_dir)
    ref = summary["results"].get("reference", 0.5)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(t["gap"], t["moment"], yerr=t["stderr"], fmt="o", ms=4,
                capsize=3, label="empirical moment")
    _guide_line(ax, t["gap"], t["moment"][0], ref, "reference")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("time gap")
    ax.set_ylabel("increment moment")
    slope = summary["results"]["slope"]
    ax.set_title(f"fitted slope {slope:.3f}")
    ax.legend(frameon=False)
    return fig


def _fig_holder(input_dir, ylabel):
    t = load_table(os.path.join(input_dir, "holder.csv"), ["scale", "level"])
    summary = load_summary(input_dir)
    res = summary["results"]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(t["scale"], t["level"], "o", ms=4, label="measured")
    _guide_line(ax, t["scale"], t["level"][0], res["reference"], "theoretical")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("time gap")
    ax.set_ylabel(ylabel)
    lo, hi = res["band"]
    ax.set_title(
        f"fitted slope {res['slope']:.3f} "
        f"(band [{lo:g}, {hi:g}], reference {res['reference']:g})"
    )
    ax.legend(frameon=False)
    return fig


def fig_holder_path(input_dir):
    return _fig_holder(input_dir, "mean sup increment")


def fig_holder_lt(input_dir):
    return _fig_holder(input_dir, "mean sup local-time increment")


def fig_occupation(input_dir):
    occ = load_table(os.path.join(input_dir, "occupation.csv"),
                     ["bin_center_1", "density"])
    agr = load_table(os.path.join(input_dir, "agreement.csv"),
                     ["point", "histogram", "fourier"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.plot(occ["bin_center_1"], occ["density"], "-", lw=1.0)
    ax1.set_xlabel("level")
    ax1.set_ylabel("mean occupation density")
    ax2.plot(agr["point"], agr["histogram"], "o", ms=4, label="histogram")
    ax2.plot(agr["point"], agr["fourier"], "x", ms=5, label="Fourier inversion")
    ax2.set_xlabel("level")
    ax2.set_ylabel("local time estimate")
    ax2.legend(frameon=False)
    fig.tight_layout()
    return fig


def fig_sobolev(input_dir):
    t = load_table(os.path.join(input_dir, "sobolev.csv"),
                   ["alpha", "radius", "estimate", "stderr"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    for alpha in _groups(t["alpha"]):
        sel = t["alpha"] == alpha
        ax.errorbar(t["radius"][sel], t["estimate"][sel],
                    yerr=t["stderr"][sel], fmt="o-", ms=4, capsize=3,
                    label=f"alpha = {alpha:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("frequency cutoff radius")
    ax.set_ylabel("Sobolev energy")
    ax.legend(frameon=False)
    return fig


def fig_smallball(input_dir):
    t = load_table(os.path.join(input_dir, "smallball.csv"),
                   ["epsilon", "criterion", "stderr"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(t["epsilon"], t["criterion"], yerr=t["stderr"], fmt="o-",
                ms=4, capsize=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("ball radius")
    dim = t.meta.get("dimension", "?")
    ax.set_ylabel("small-ball criterion")
    ax.set_title(f"dimension {dim}")
    return fig


def fig_charfn(input_dir):
    t = load_table(os.path.join(input_dir, "charfn.csv"),
                   ["scale", "v", "modulus", "stderr", "exact"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(t["scale"], t["modulus"], yerr=t["stderr"], fmt="o", ms=4,
                capsize=3, label="empirical")
    finite = np.isfinite(t["exact"])
    if finite.any():
        order = np.argsort(t["scale"][finite])
        ax.plot(t["scale"][finite][order], t["exact"][finite][order], "k--",
                lw=1.0, label="exact Gaussian")
    ax.set_yscale("log")
    ax.set_xlabel("dimensionless scale  |v| (t-s)^{1/4}")
    ax.set_ylabel("characteristic-function modulus")
    ax.legend(frameon=False)
    return fig


def fig_density(input_dir):
    t = load_table(os.path.join(input_dir, "density.csv"),
                   ["pair_s", "pair_t", "z", "density", "exact"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    pairs = _groups(list(zip(t["pair_s"], t["pair_t"])))
    exact_drawn = False
    for s, tt in pairs:
        sel = (t["pair_s"] == s) & (t["pair_t"] == tt)
        ax.plot(t["z"][sel], t["density"][sel], "-", lw=1.2,
                label=f"gap {tt - s:g}")
        exact = t["exact"][sel]
        if not exact_drawn and np.isfinite(exact).all():
            ax.plot(t["z"][sel], exact, "k--", lw=1.0, label="exact Gaussian")
            exact_drawn = True
    ax.set_xlabel("rescaled increment  z")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    return fig


def fig_simulate(input_dir):
    path = os.path.join(input_dir, "path.csv")
    t = load_table(path, ["time"])
    comps = [c for c in t.columns if c.startswith("u_")]
    if not comps:
        from .loader import SchemaError

        raise SchemaError(path, {"u_1"})
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for c in comps:
        ax.plot(t["time"], t[c], lw=0.7, label=c)
    ax.set_xlabel("time")
    ax.set_ylabel("probe value")
    ax.legend(frameon=False)
    return fig


FIGURES = {
    "simulate": fig_simulate,
    "oracle-compare": fig_oracle_compare,
    "moments": fig_moments,
    "occupation": fig_occupation,
    "sobolev": fig_sobolev,
    "holder-path": fig_holder_path,
    "holder-lt": fig_holder_lt,
    "smallball": fig_smallball,
    "charfn": fig_charfn,
    "density": fig_density,
}


def render(input_dir, figure, output, dpi=150):
    if figure not in FIGURES:
        raise ValueError(
            f"unknown figure {figure!r}; choose from {sorted(FIGURES)}"
        )
    fig = FIGURES[figure](input_dir)
    fig.savefig(output, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return output
