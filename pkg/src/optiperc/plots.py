"""Figure rendering for run and suite outputs.

Every suite CSV has a companion PNG so results can be eyeballed without
external tooling.  Rendering is headless (Agg) and purely a view of the
delimited data; the CSVs remain the byte-reproducible artifacts.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_BAR_COLORS = {5.0: "#1f77b4", 8.0: "#ff7f0e", 10.0: "#2ca02c", 16.0: "#d62728"}


def _save(fig, path):
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_phase_response(table, path):
    """Toy-model output vs common phase, one panel per relative phase."""
    n = len(table.phi_r_values)
    fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.4), sharey=True)
    axes = np.atleast_1d(axes)
    styles = ["-", "--", ":"]
    for i, (ax, phi_r) in enumerate(zip(axes, table.phi_r_values)):
        for m, u in enumerate(table.inputs):
            ax.plot(np.degrees(table.phi_c_grid), table.outputs[i, :, m],
                    styles[m % len(styles)], label=f"u={u}")
        ax.set_title(f"relative phase {math.degrees(phi_r):.0f} deg")
        ax.set_xlabel("common phase (deg)")
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("output intensity")
    axes[-1].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def _grouped_ber_bars(ax, rows, group_key, xlabels, rates):
    """Bars of BER by category, grouped by bit rate; error-free bars hollow."""
    width = 0.8 / max(len(rates), 1)
    for j, rate in enumerate(rates):
        xs, ys, free = [], [], []
        for i, label in enumerate(xlabels):
            matches = [r for r in rows if r[group_key] == label
                       and r["bit_rate_gbps"] == rate]
            if not matches:
                continue
            r = matches[0]
            xs.append(i + (j - (len(rates) - 1) / 2) * width)
            ys.append(max(r["ber"], r["ber_limit"]))
            free.append(r["error_free"])
        color = _BAR_COLORS.get(rate, None)
        solid = [(x, y) for x, y, f in zip(xs, ys, free) if not f]
        hollow = [(x, y) for x, y, f in zip(xs, ys, free) if f]
        if solid:
            ax.bar(*zip(*solid), width=width, color=color, label=f"{rate:g} Gbps")
        if hollow:
            ax.bar(*zip(*hollow), width=width, color=color, alpha=0.3,
                   label=f"{rate:g} Gbps (error-free)" if not solid else None)
    ax.set_yscale("log")
    ax.set_xticks(range(len(xlabels)))
    ax.set_xticklabels(xlabels, rotation=45)
    ax.set_ylabel("BER")
    ax.grid(axis="y", alpha=0.3)
    ax.legend(fontsize=7)


def render_pattern_bars(rows, path):
    patterns = sorted({r["pattern"] for r in rows}, key=lambda p: (len(p), p))
    rates = sorted({r["bit_rate_gbps"] for r in rows})
    fig, ax = plt.subplots(figsize=(8.5, 4))
    _grouped_ber_bars(ax, rows, "pattern", patterns, rates)
    ax.set_xlabel("target pattern")
    fig.tight_layout()
    _save(fig, path)


def render_xor_bars(rows, path):
    delays = sorted({r["delay_bits"] for r in rows})
    rates = sorted({r["bit_rate_gbps"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    _grouped_ber_bars(ax, rows, "delay_bits", delays, rates)
    floor = {r["delay_bits"]: r["separability_floor"] for r in rows}
    xs = range(len(delays))
    ax.plot(list(xs), [max(floor[d], 1e-12) for d in delays], "k-", lw=1.5,
            label="linear separability floor")
    ax.set_xlabel("XOR delay (bits)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def render_sampling_map(rows, path):
    """BER vs intra-bit sampling time, one curve per attenuation."""
    attens = sorted({r["attenuation_db"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    for a in attens:
        sel = sorted((r for r in rows if r["attenuation_db"] == a),
                     key=lambda r: r["sampling_time_ps"])
        ax.semilogy([r["sampling_time_ps"] for r in sel],
                    [max(r["ber"], r["ber_limit"]) for r in sel],
                    "o-", ms=3, label=f"{a:g} dB")
    ax.set_xlabel("sampling time from bit start (ps)")
    ax.set_ylabel("BER")
    ax.grid(alpha=0.3)
    ax.legend(title="attenuation", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_model_comparison(rows, path):
    models = []
    for r in rows:
        if r["model"] not in models:
            models.append(r["model"])
    fig, ax = plt.subplots(figsize=(7, 4))
    styles = {"complex": "ro-", "real-perceptron": "v-", "reservoir-mean": "k--",
              "reservoir-best": "k-"}
    for m in models:
        sel = sorted((r for r in rows if r["model"] == m),
                     key=lambda r: r["sampling_time_ps"])
        ax.semilogy([r["sampling_time_ps"] for r in sel],
                    [max(r["ber"], r["ber_limit"]) for r in sel],
                    styles.get(m, "o-"), ms=3, label=m)
    ax.set_xlabel("sampling time from bit start (ps)")
    ax.set_ylabel("BER")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_decode_trace(rows, path):
    """Input intensity, output level, and encoded phase bit per bit slot."""
    bits = [r["bit_index"] for r in rows]
    fig, ax = plt.subplots(figsize=(9, 3.6))
    ax.plot(bits, [r["input_level"] for r in rows], "b.-", lw=0.8, ms=3,
            label="input intensity")
    ax.plot(bits, [r["output_level"] for r in rows], "r.--", lw=0.8, ms=3,
            label="output intensity")
    ax.step(bits, [r["phase_bit"] for r in rows], "0.6", where="mid",
            label="encoded phase bit")
    ax.set_xlabel("bit index")
    ax.set_ylabel("level")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_convergence(history, path):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    iters = [h[0] for h in history]
    losses = [max(h[1], 0.5) for h in history]
    ax.semilogy(iters, losses, "o-", ms=3)
    ax.set_xlabel("swarm iteration")
    ax.set_ylabel("best training loss (mismatch count)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def render_level_histograms(hists, threshold, path):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    colors = {"00": "#888888", "01": "#1f77b4", "10": "#d62728", "11": "#2ca02c"}
    all_levels = [v for levels in hists.values() for v in levels]
    if all_levels:
        bins = np.linspace(min(all_levels), max(all_levels), 60)
        for symbol, levels in sorted(hists.items()):
            if levels:
                ax.hist(levels, bins=bins, alpha=0.55, color=colors[symbol],
                        label=f"'{symbol}'")
    if threshold is not None and math.isfinite(threshold):
        ax.axvline(threshold, color="k", ls="--", lw=1, label="threshold")
    ax.set_xlabel("sampled output level")
    ax.set_ylabel("count")
    ax.legend(fontsize=8, title="prev,cur bits")
    fig.tight_layout()
    _save(fig, path)
