"""Static figures for a campaign log. Reads the log, writes PNGs, nothing else."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import storage  # noqa: E402
from .config import CampaignConfig  # noqa: E402
from .trainer import discretize_target  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "savefig.dpi": 150,
}


def _kl_by_iteration(rows, best_curve, path):
    it = np.array([r["iteration"] for r in rows])
    mean = np.array([r["kl_mean"] for r in rows])
    lo = mean - np.array([r["kl_min"] for r in rows])
    hi = np.array([r["kl_max"] for r in rows]) - mean
    fig, ax = plt.subplots()
    ax.errorbar(it, mean, yerr=[lo, hi], fmt="o", capsize=3, label="final KL over repeats (mean, min-max)")
    ax.step(it, best_curve, where="post", color="C3", label="best so far (median repeat)")
    for r in rows:
        ax.annotate(r["ansatz"], (r["iteration"], r["kl_mean"]), fontsize=6, xytext=(3, 3),
                    textcoords="offset points")
    ax.set_xlabel("iteration")
    ax.set_ylabel("KL(trained || target)")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _training_curves(rec, path):
    fb = rec["feedback"]
    epochs = np.arange(1, len(fb["entropy_values"]) + 1)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(epochs, fb["discriminator_loss_values"], label="discriminator")
    ax1.plot(epochs, fb["generator_loss_values"], label="generator")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.legend(fontsize=7)
    ax2.plot(epochs, fb["entropy_values"], color="C2")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("KL(trained || target)")
    ax2.set_yscale("log")
    fig.suptitle(f"iteration {rec['iteration']}: {rec['spec']['blocks']}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _distribution(rec, target_probs, path):
    trained = np.asarray(rec["median_trace"]["distributions"][-1])
    k = np.arange(len(trained))
    fig, ax = plt.subplots()
    ax.bar(k - 0.2, target_probs, width=0.4, label="target")
    ax.bar(k + 0.2, trained, width=0.4, label="trained")
    ax.set_xlabel("grid point")
    ax.set_ylabel("probability")
    ax.set_xticks(k)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_figures(log_dir, out_dir) -> list[Path]:
    """Write KL-by-iteration, best-run training curves and best-run distribution PNGs."""
    manifest = storage.load_manifest(log_dir)
    records = storage.load_iterations(log_dir)
    rows = storage.report_rows(log_dir)
    if not rows:
        from .errors import EmptyCampaign

        raise EmptyCampaign(f"campaign in {log_dir} has no completed iterations")
    cfg = CampaignConfig.from_dict(manifest["config"])
    target = discretize_target(cfg.target, cfg.n_qubits)
    best_iter = (manifest.get("best") or records[-1]["best"])["iteration"]
    best_rec = next(r for r in records if r["iteration"] == best_iter)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "kl_by_iteration.png", out / "best_training_curves.png", out / "best_distribution.png"]
    with plt.rc_context(STYLE):
        _kl_by_iteration(rows, [r["best"]["final_kl"] for r in records], paths[0])
        _training_curves(best_rec, paths[1])
        _distribution(best_rec, target.probs, paths[2])
    return paths
