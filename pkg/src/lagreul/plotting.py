"""Offline figures for audit summaries (Agg backend, PNG output)."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def ratio_chart(rows, path):
    """Bar chart of ``measured / bound`` per audit, colored by verdict; returns ``path`` or ``None`` if empty."""
    if not rows:
        return None
    labels = [r["audit_id"] for r in rows]
    ratios = [float(r["ratio"]) if r["ratio"] not in (None, "inf") else np.nan for r in rows]
    colors = {"PASS": "tab:green", "FAIL": "tab:red", "INCONCLUSIVE": "tab:gray"}
    fig, ax = plt.subplots(figsize=(8, 0.25 * len(rows) + 1.5))
    y = np.arange(len(rows))
    ax.barh(y, ratios, color=[colors.get(r["verdict"], "tab:blue") for r in rows])
    ax.axvline(1.0, color="k", lw=0.8, ls="--")
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=6)
    ax.set_xscale("log")
    ax.set_xlabel("measured / bound")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def trace_chart(rows, path):
    """Picard distances per iteration on a log scale."""
    if not rows:
        return None
    it = [r["iteration"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key in ("distance", "dx", "dtau", "dv"):
        vals = [max(float(r[key]), 1e-300) for r in rows]
        ax.semilogy(it, vals, marker="o", ms=3, label=key)
    ax.set_xlabel("iteration")
    ax.set_ylabel("path distance")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
