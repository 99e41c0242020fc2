#!/usr/bin/env python3
"""Render the simulator's CSV outputs as figures.

Consumes only the documented CSV schemas written by ``sim run`` -- no
simulator internals, no recomputation of statistics -- and writes one
vector image per figure id:

    python3 plots/render.py --figure fig4a --in results/ --out figs/

CDF figures use a log-scaled probability axis; rate figures overlay the
published reference outage rates as horizontal guide lines when they are
available (fig4a).
"""

import argparse
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURES = ("fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6", "fig8", "fig9")

CODE_ORDER = ("c1", "c2", "c4", "c8", "c12")
CODE_STYLE = {
    "c1": dict(color="#777777", marker="o"),
    "c2": dict(color="#1f77b4", marker="^"),
    "c4": dict(color="#2ca02c", marker="s"),
    "c8": dict(color="#d62728", marker="D"),
    "c12": dict(color="#9467bd", marker="p"),
}

# published reference outage rates overlaid on fig4a as guides
REFERENCE_RATES = {"c1": 0.0107173, "c2": 0.0557161, "c4": 0.105969,
                   "c8": 0.126370, "c12": 0.117364}


class SchemaError(ValueError):
    pass


def load_csv(path, required):
    """Read one CSV, insisting on the required columns."""
    if not os.path.exists(path):
        raise SchemaError(f"missing input file {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{os.path.basename(path)}: missing "
                                  f"column {col!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{os.path.basename(path)} has no data rows")
    return rows


def _series(rows, key_col, x_col, y_col):
    out = {}
    for r in rows:
        out.setdefault(r[key_col], []).append((float(r[x_col]),
                                               float(r[y_col])))
    return {k: sorted(v) for k, v in out.items()}


def _code_label(cid):
    return f"{cid[1:]}-port"


def _new_axes(xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3, linestyle="--")
    return fig, ax


def _plot_cdf(ax, rows, key_col, label_map=None):
    for key, pts in sorted(_series(rows, key_col, "snr_db", "cdf").items()):
        x, y = zip(*pts)
        ax.semilogy(x, y, label=(label_map or {}).get(key, key))
    ax.set_ylim(1e-4, 1.0)
    ax.legend(fontsize=8)


def render_fig2(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig2_cdf.csv"),
                    ("setup", "drm", "snr_db", "cdf"))
    setups = sorted({r["setup"] for r in rows})
    fig, axes = plt.subplots(1, len(setups), figsize=(9.0, 3.6),
                             sharey=True)
    axes = [axes] if len(setups) == 1 else list(axes)
    for ax, setup in zip(axes, setups):
        _plot_cdf(ax, [r for r in rows if r["setup"] == setup], "drm")
        ax.set_title(setup)
        ax.set_xlabel("SNR [dB]")
        ax.grid(True, alpha=0.3, linestyle="--")
    axes[0].set_ylabel("CDF")
    return fig


def render_fig3(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig3_cdf.csv"),
                    ("code", "policy", "snr_db", "cdf"))
    fig, ax = _new_axes("received SNR [dB]", "CDF")
    for code in sorted({r["code"] for r in rows}):
        for policy in ("baseline", "optimized"):
            sel = [r for r in rows
                   if r["code"] == code and r["policy"] == policy]
            if not sel:
                continue
            pts = sorted((float(r["snr_db"]), float(r["cdf"])) for r in sel)
            x, y = zip(*pts)
            style = "--" if policy == "baseline" else "-"
            ax.semilogy(x, y, style,
                        label=f"{_code_label(code)} {policy}")
    ax.set_ylim(1e-4, 1.0)
    ax.legend(fontsize=8)
    return fig


def _render_rate_vs_m(in_dir, csv_name, y_col, hw_col, guides=False):
    rows = load_csv(os.path.join(in_dir, csv_name),
                    ("m", "code", y_col, hw_col, "n_trials"))
    fig, ax = _new_axes("base station antennas", "outage rate [bpcu]")
    for cid in CODE_ORDER:
        pts = [(float(r["m"]), float(r[y_col]), float(r[hw_col]))
               for r in rows if r["code"] == cid]
        if not pts:
            continue
        pts.sort()
        x, y, hw = zip(*pts)
        ax.errorbar(x, y, yerr=hw, label=_code_label(cid),
                    **CODE_STYLE[cid], markersize=4, capsize=2)
    if guides:
        for cid, ref in REFERENCE_RATES.items():
            ax.axhline(ref, color=CODE_STYLE[cid]["color"], alpha=0.4,
                       linewidth=0.8, linestyle=":", gid="guide")
    ax.set_yscale("log")
    ax.legend(fontsize=8, ncol=2)
    return fig


def render_fig4a(in_dir):
    return _render_rate_vs_m(in_dir, "fig4a.csv", "r_eps_ostbc", "ci_ostbc",
                             guides=True)


def render_fig4b(in_dir):
    return _render_rate_vs_m(in_dir, "fig4b.csv", "r_eps_ostbc", "ci_ostbc")


def render_fig5(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig5.csv"),
                    ("intervals", "code", "r_eps", "ci_halfwidth"))
    fig, ax = _new_axes("coherence intervals", "outage rate [bpcu]")
    for cid in CODE_ORDER:
        pts = sorted((float(r["intervals"]), float(r["r_eps"]))
                     for r in rows if r["code"] == cid)
        if pts:
            x, y = zip(*pts)
            ax.loglog(x, y, label=_code_label(cid), **CODE_STYLE[cid],
                      markersize=4)
    ax.legend(fontsize=8)
    return fig


def render_fig6(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig6.csv"),
                    ("n_bits", "code", "l_min", "preferred"))
    fig, ax = _new_axes("message length [bit]", "coherence intervals")
    for cid in CODE_ORDER:
        pts = sorted((float(r["n_bits"]), int(r["l_min"])) for r in rows
                     if r["code"] == cid and int(r["l_min"]) > 0)
        if pts:
            x, y = zip(*pts)
            ax.step(x, y, where="post", label=_code_label(cid),
                    color=CODE_STYLE[cid]["color"])
    ax.legend(fontsize=8)
    return fig


def render_fig8(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig8.csv"),
                    ("intervals", "code", "total_bits", "ci_halfwidth"))
    fig, ax = _new_axes("coherence intervals",
                        "bits per channel-use budget")
    for cid in CODE_ORDER:
        pts = [(float(r["intervals"]), float(r["total_bits"]),
                float(r["ci_halfwidth"])) for r in rows if r["code"] == cid]
        if pts:
            pts.sort()
            x, y, hw = zip(*pts)
            ax.errorbar(x, y, yerr=hw, label=_code_label(cid),
                        **CODE_STYLE[cid], markersize=4, capsize=2)
    ax.legend(fontsize=8)
    return fig


def render_fig9(in_dir):
    rows = load_csv(os.path.join(in_dir, "fig9.csv"),
                    ("code", "setup", "r_eps", "ci_halfwidth"))
    fig, ax = _new_axes("code size (antenna ports)", "outage rate [bpcu]")
    setups = ("single", "reuse4", "reuse3", "reuse1")
    styles = {"single": "-", "reuse4": "--", "reuse3": ":", "reuse1": "-."}
    for setup in setups:
        pts = []
        for r in rows:
            if r["setup"] == setup:
                pts.append((int(r["code"][1:]), float(r["r_eps"])))
        if pts:
            pts.sort()
            x, y = zip(*pts)
            ax.semilogy(x, y, styles[setup], marker="x", label=setup)
    ax.set_xticks([1, 2, 4, 8])
    ax.legend(fontsize=8)
    return fig


RENDERERS = {
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4a": render_fig4a,
    "fig4b": render_fig4b,
    "fig5": render_fig5,
    "fig6": render_fig6,
    "fig8": render_fig8,
    "fig9": render_fig9,
}


def render(figure, in_dir, out_dir):
    """Render one figure id; returns the path of the written image."""
    if figure not in RENDERERS:
        raise SchemaError(f"unknown figure {figure!r}")
    fig = RENDERERS[figure](in_dir)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{figure}.svg")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--figure", required=True,
                    help="figure id, or 'all' for every renderable input")
    ap.add_argument("--in", dest="in_dir", default="results")
    ap.add_argument("--out", dest="out_dir", default="figs")
    args = ap.parse_args(argv)
    figures = FIGURES if args.figure == "all" else [args.figure]
    status = 0
    for figure in figures:
        try:
            print(render(figure, args.in_dir, args.out_dir))
        except SchemaError as exc:
            print(f"{figure}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
