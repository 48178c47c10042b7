"""Publication-style rendering of the CLI's figure CSVs.

Reads only the documented CSV schemas (comment-headed tables written by the
``agehawkes fig1`` and ``fig2`` commands) and never recomputes any model
quantity.  Rendering is pinned for determinism: fixed SVG hash salt, no date
metadata, and a sha256 of the input file embedded as provenance, so the same
CSV always yields a byte-identical image.
"""

from __future__ import annotations

import hashlib
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "agehawkes-figures"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIG1_REQUIRED = ("mu", "alpha", "a_inf_analytic", "a_inf_sim")
FIG2_REQUIRED = ("alpha", "beta", "sigma")


class MissingColumnError(ValueError):
    pass


def read_table(path):
    """Parse a comment-headed CSV into (comments dict, float-column dict)."""
    comments: dict[str, str] = {}
    names = None
    cols: dict[str, list[float]] = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    comments[key.strip()] = val.strip()
                continue
            if names is None:
                names = line.split(",")
                cols = {c: [] for c in names}
                continue
            for c, v in zip(names, line.split(",")):
                cols[c].append(float(v))
    return comments, {c: np.asarray(v) for c, v in cols.items()}


def _require(cols, names, path):
    missing = [c for c in names if c not in cols]
    if missing:
        raise MissingColumnError(f"{path}: missing column(s) {', '.join(missing)}")


def _checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _groups(keys):
    """Unique values in first-appearance order."""
    seen = []
    for k in keys:
        if k not in seen:
            seen.append(k)
    return seen


def _save(fig, out, checksum) -> None:
    out = Path(out)
    metadata = {"Source": f"input-sha256={checksum}"}
    if out.suffix.lower() == ".svg" or out.suffix == "":
        out = out.with_suffix(".svg")
        metadata["Date"] = None  # drop the timestamp so reruns are identical
        fig.savefig(out, format="svg", metadata=metadata)
    else:
        fig.savefig(out, metadata=metadata)
    plt.close(fig)


def render_fig1(csv_path, out_path) -> dict:
    """Two-panel steady-activity figure: log-log left, linear-rate right.

    One curve per connectivity group with analytic lines and simulation
    markers (error bars when ``sim_se`` is present), plus slope guides at
    exponents 1 and 1/2 on the log-log panel.
    """
    comments, cols = read_table(csv_path)
    _require(cols, FIG1_REQUIRED, csv_path)
    warnings: list[str] = []
    if "sim_se" in cols:
        errors = cols["sim_se"]
    else:
        errors = None
        warnings.append("sim_se column missing: markers drawn without error bars")
        print(f"warning: {warnings[-1]}", file=sys.stderr)

    alphas = _groups(cols["alpha"])
    checksum = _checksum(csv_path)
    fig, (ax_log, ax_lin) = plt.subplots(1, 2, figsize=(11, 4.5))
    cmap = plt.get_cmap("viridis")
    for i, alpha in enumerate(alphas):
        sel = cols["alpha"] == alpha
        mu = cols["mu"][sel]
        order = np.argsort(mu)
        mu = mu[order]
        analytic = cols["a_inf_analytic"][sel][order]
        sim = cols["a_inf_sim"][sel][order]
        color = cmap(i / max(len(alphas) - 1, 1))
        label = f"alpha={alpha:g}"
        for ax in (ax_log, ax_lin):
            ax.plot(mu, analytic, "-", color=color, label=label)
            if errors is not None:
                ax.errorbar(mu, sim, yerr=errors[sel][order], fmt="o",
                            color=color, markersize=4, capsize=2, linestyle="none")
            else:
                ax.plot(mu, sim, "o", color=color, markersize=4)

    positive = cols["a_inf_analytic"][cols["a_inf_analytic"] > 0]
    mu_all = cols["mu"]
    mu_lo = float(mu_all.min())
    mu_hi = float(np.sqrt(mu_all.min() * mu_all.max()))
    a_anchor = float(np.quantile(positive, 0.05))
    for slope, style in ((1.0, "--"), (0.5, ":")):
        guide = a_anchor * (np.array([mu_lo, mu_hi]) / mu_lo) ** slope
        ax_log.plot([mu_lo, mu_hi], guide, style, color="gray", linewidth=1)
        ax_log.text(mu_hi, guide[-1], f" m={slope:g}", color="gray",
                    fontsize=8, va="center")

    ax_log.set_xscale("log")
    ax_log.set_yscale("log")
    ax_lin.set_xscale("log")
    for ax in (ax_log, ax_lin):
        ax.set_xlabel("input rate mu")
        ax.set_ylabel("steady activity")
    ax_log.set_title("log-log")
    ax_lin.set_title("linear rate axis")
    if len(alphas) > 1:
        ax_lin.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    _save(fig, out_path, checksum)
    return {
        "panels": 2,
        "curves": len(alphas),
        "checksum": checksum,
        "warnings": warnings,
    }


def render_fig2(csv_path, out_path) -> dict:
    """Sensitivity shape curves, one per load value, each scaled to its peak.

    The vertical scales are intentionally normalized away (shape comparison);
    a red vertical marker shows the recorded optimal connectivity for the
    load value 0.01 when the marker table carries it.  Non-finite sensitivity
    values (the pole sentinel) leave a gap in the curve.
    """
    comments, cols = read_table(csv_path)
    _require(cols, FIG2_REQUIRED, csv_path)
    warnings: list[str] = []
    markers = {
        key[len("alpha_m["):-1]: float(val)
        for key, val in comments.items()
        if key.startswith("alpha_m[") and key.endswith("]")
    }
    if not markers:
        warnings.append("no alpha_m marker table in comments: markers skipped")
        print(f"warning: {warnings[-1]}", file=sys.stderr)

    betas = _groups(cols["beta"])
    checksum = _checksum(csv_path)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    cmap = plt.get_cmap("plasma")
    for i, beta in enumerate(betas):
        sel = cols["beta"] == beta
        alpha = cols["alpha"][sel]
        order = np.argsort(alpha)
        alpha = alpha[order]
        sigma = cols["sigma"][sel][order]
        finite = np.isfinite(sigma)
        peak = float(sigma[finite].max()) if finite.any() else 1.0
        shaped = np.where(finite, sigma / peak, np.nan)
        ax.plot(alpha, shaped, "-", color=cmap(i / max(len(betas) - 1, 1)),
                label=f"beta={beta:g}")

    marker_value = markers.get("0.01")
    if marker_value is not None and np.isfinite(marker_value):
        ax.axvline(marker_value, color="red", linewidth=1.2)
    else:
        marker_value = None

    ax.set_xlabel("connectivity strength alpha")
    ax.set_ylabel("sensitivity (per-curve normalized)")
    if len(betas) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path, checksum)
    return {
        "panels": 1,
        "curves": len(betas),
        "marker_alpha_m": marker_value,
        "checksum": checksum,
        "warnings": warnings,
    }


def script_main(renderer, argv) -> int:
    if len(argv) != 3:
        print(f"usage: {Path(argv[0]).name} <csv> <out-image>", file=sys.stderr)
        return 2
    try:
        summary = renderer(argv[1], argv[2])
    except (MissingColumnError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {argv[2]}: {summary['panels']} panel(s), {summary['curves']} curve(s)"
    )
    return 0
