"""Standalone SVG figures for occlusion, trajectories and hallucinations.

Every plot is built from the CSV artifact the matching interpret stage
writes, so the report stage can redraw figures without the model. Output
is deterministic: Agg backend, a fixed SVG hash salt and no date metadata.
"""

from __future__ import annotations

import io
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from . import styles  # noqa: E402

plt.rcParams["svg.hashsalt"] = styles.SVG_HASH_SALT
plt.rcParams["font.size"] = styles.PLOT_FONT_SIZE


def _to_svg(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def plot_occlusion(
    frame: pd.DataFrame,
    class_name: str,
    top_n: int = styles.OCCLUSION_TOP_N,
    title: str = "",
) -> bytes:
    """Horizontal bars of the ``top_n`` largest AUC drops for ``class_name``.

    ``frame`` has the occlusion CSV columns (feature, group, class, delta_auc, rank).
    Bars are coloured by feature group.
    """
    rows = frame[frame["class"] == class_name].sort_values("rank", kind="stable").head(top_n)
    fig, ax = plt.subplots(figsize=(6, 0.45 * max(len(rows), 1) + 1.2))
    deltas = rows["delta_auc"].fillna(0.0).to_numpy()
    positions = np.arange(len(rows))[::-1]
    colors = [styles.GROUP_COLORS.get(g, "#444444") for g in rows["group"]]
    ax.barh(positions, deltas, color=colors)
    ax.set_yticks(positions)
    ax.set_yticklabels(rows["feature"].tolist())
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel(f"AUC drop ({class_name})")
    ax.set_title(title or f"Top {len(rows)} occluded features")

    seen = []
    for group in rows["group"]:
        if group not in seen:
            seen.append(group)
    handles = [plt.Rectangle((0, 0), 1, 1, color=styles.GROUP_COLORS.get(g, "#444444")) for g in seen]
    if handles:
        ax.legend(handles, seen, loc="lower right", frameon=False)
    return _to_svg(fig)


def plot_trajectories(
    frame: pd.DataFrame,
    features: Optional[Sequence[str]] = None,
    title: str = "",
) -> bytes:
    """Mean trajectories with standard-deviation error bars, top vs bottom.

    ``frame`` has the trajectory CSV columns (feature, hour, mean, std, polarity).
    One panel per feature; ``features`` defaults to the first four in the file.
    """
    if features is None:
        features = list(dict.fromkeys(frame["feature"]))[: styles.TRAJECTORY_FEATURES]
    features = list(features)
    fig, axes = plt.subplots(1, max(len(features), 1), figsize=(3.2 * max(len(features), 1), 3), squeeze=False)
    for ax, feature in zip(axes[0], features):
        rows = frame[frame["feature"] == feature]
        for polarity, part in rows.groupby("polarity", sort=True):
            part = part.sort_values("hour", kind="stable")
            ax.errorbar(
                part["hour"], part["mean"], yerr=part["std"],
                label=polarity, color=styles.POLARITY_COLORS.get(polarity), capsize=3,
            )
        ax.set_title(feature)
        ax.set_xlabel("Hour of lookback")
    axes[0][0].legend(frameon=False)
    if title:
        fig.suptitle(title)
    return _to_svg(fig)


def plot_hallucination(
    frame: pd.DataFrame,
    features: Optional[Sequence[str]] = None,
    title: str = "",
) -> bytes:
    """Line plot of a synthesized input, one line per feature.

    ``frame`` has the hallucination CSV columns (feature, hour, value).
    ``features`` defaults to those that move the most over the lookback.
    """
    if features is None:
        features = hallucination_features(frame)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for feature in features:
        part = frame[frame["feature"] == feature].sort_values("hour", kind="stable")
        ax.plot(part["hour"], part["value"], marker="o", label=feature)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("Hour of lookback")
    ax.set_ylabel("Input value")
    ax.set_title(title or "Activation-maximizing input")
    if features:
        ax.legend(frameon=False, fontsize=styles.PLOT_FONT_SIZE - 1, loc="center left", bbox_to_anchor=(1.0, 0.5))
    return _to_svg(fig)


def hallucination_features(frame: pd.DataFrame, n: int = styles.HALLUCINATION_FEATURES) -> List[str]:
    """Features with the largest range over hours; ties keep file order."""
    spread = frame.groupby("feature", sort=False)["value"].agg(lambda v: float(v.max() - v.min()))
    order = np.argsort(-spread.to_numpy(), kind="stable")[:n]
    return [spread.index[i] for i in order]
