"""Report emission: delimited CSV outputs plus SVG figures.

CSV nulls serialize as empty fields.  Figures are rendered with
matplotlib's SVG backend pinned to deterministic settings so repeated
seeded runs produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams["svg.hashsalt"] = "banditrec"
matplotlib.rcParams["svg.fonttype"] = "none"

from .errors import BanditRecError  # noqa: E402

METRIC_NAMES = ("auc", "ctr", "precision", "recall")

_POLICY_COLORS = {"LinTS": "#1f77b4", "LinUCB": "#ff7f0e", "LogUCB": "#2ca02c"}


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_arm_report(reports, path) -> None:
    """report_arms.csv: per-policy per-arm matched counts and mean rewards.

    Folds are aggregated: matched counts sum, rewards are matched-count
    weighted means.
    """
    by_policy: dict[str, dict[str, list]] = {}
    for rep in reports:
        agg = by_policy.setdefault(
            rep.policy_name,
            {
                "arms": rep.arm_names,
                "matched": [0] * len(rep.arm_names),
                "reward": [0.0] * len(rep.arm_names),
            },
        )
        for i, (count, mean) in enumerate(
            zip(rep.matched_counts, rep.expected_rewards)
        ):
            agg["matched"][i] += count
            if mean is not None:
                agg["reward"][i] += mean * count
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "arm", "n_matched", "mean_expected_reward"])
        for policy in sorted(by_policy):
            agg = by_policy[policy]
            for i, arm in enumerate(agg["arms"]):
                n = agg["matched"][i]
                mean = agg["reward"][i] / n if n else None
                writer.writerow([policy, arm, n, _fmt(mean)])


def write_metric_report(reports, path) -> None:
    """report_metrics.csv: one row per policy, fold and k."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "fold", "k"] + list(METRIC_NAMES))
        for rep in sorted(reports, key=lambda r: (r.policy_name, r.fold)):
            n_k = len(rep.curves["auc"])
            for ki in range(n_k):
                writer.writerow(
                    [rep.policy_name, rep.fold, ki + 1]
                    + [_fmt(rep.curves[m][ki]) for m in METRIC_NAMES]
                )


def _aggregate_rewards(reports):
    by_policy: dict[str, tuple[list, list]] = {}
    arm_names = None
    for rep in reports:
        arm_names = rep.arm_names
        matched, reward = by_policy.setdefault(
            rep.policy_name, ([0] * len(rep.arm_names), [0.0] * len(rep.arm_names))
        )
        for i, (count, mean) in enumerate(
            zip(rep.matched_counts, rep.expected_rewards)
        ):
            matched[i] += count
            if mean is not None:
                reward[i] += mean * count
    means = {
        policy: [r / n if n else None for n, r in zip(matched, reward)]
        for policy, (matched, reward) in by_policy.items()
    }
    return arm_names, means


def _save_svg(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _no_data(ax) -> None:
    ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)


def emit_plots(reports, out_dir) -> list[Path]:
    """Render the grouped reward bar chart and the four metric curves.

    Returns the list of written SVG paths (always five files).
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BanditRecError(f"cannot create output directory {out_dir}: {exc}")
    reports = list(reports)
    written = []

    arm_names, reward_means = _aggregate_rewards(reports)
    fig, ax = plt.subplots(figsize=(7, 4))
    if arm_names and reward_means:
        policies = sorted(reward_means)
        width = 0.8 / len(policies)
        base = range(len(arm_names))
        for pi, policy in enumerate(policies):
            values = [v if v is not None else 0.0 for v in reward_means[policy]]
            ax.bar(
                [b + pi * width for b in base],
                values,
                width=width,
                label=policy,
                color=_POLICY_COLORS.get(policy),
            )
        ax.set_xticks([b + 0.4 - width / 2 for b in base])
        ax.set_xticklabels(arm_names, rotation=20, ha="right", fontsize=8)
        ax.set_ylabel("mean expected reward")
        ax.legend()
    else:
        _no_data(ax)
    ax.set_title("Expected reward per strategy arm")
    path = out_dir / "expected_rewards.svg"
    _save_svg(fig, path)
    written.append(path)

    for metric in METRIC_NAMES:
        fig, ax = plt.subplots(figsize=(6, 4))
        drew = False
        for policy in sorted({rep.policy_name for rep in reports}):
            policy_reports = [r for r in reports if r.policy_name == policy]
            if not policy_reports:
                continue
            n_k = len(policy_reports[0].curves[metric])
            ks, values = [], []
            for ki in range(n_k):
                defined = [
                    r.curves[metric][ki]
                    for r in policy_reports
                    if r.curves[metric][ki] is not None
                ]
                if defined:
                    ks.append(ki + 1)
                    values.append(sum(defined) / len(defined))
            if ks:
                ax.plot(
                    ks,
                    values,
                    marker="o",
                    label=policy,
                    color=_POLICY_COLORS.get(policy),
                )
                drew = True
        if drew:
            ax.set_xlabel("k")
            ax.set_ylabel(metric)
            ax.set_ylim(-0.05, 1.05)
            ax.legend()
        else:
            _no_data(ax)
        ax.set_title(f"{metric} at top-k")
        path = out_dir / f"{metric}.svg"
        _save_svg(fig, path)
        written.append(path)
    return written
