"""Deterministic study reports: Gardner-Altman estimation plots and text summaries.

The SVG is hand-rolled (no plotting dependency) and a pure function of its
spec: fixed-format coordinates, seeded tie jitter, stable element order.
Rendering twice from the same spec yields identical bytes, which is what
lets ``gridbench report`` regenerate plots from a stored record verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySamples

SWARM_RADIUS = 4.0


def _fmt(value: float) -> str:
    """Fixed numeric-label format shared by plot and summary."""
    return format(float(value), ".6g")


def _px(value: float) -> str:
    return format(float(value), ".2f")


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


@dataclass(frozen=True)
class EstimationPlotSpec:
    """Inputs for one Gardner-Altman plot of paired per-dataset metric values."""

    metric_name: str
    group_a_name: str
    group_b_name: str
    a_values: tuple[float, ...]
    b_values: tuple[float, ...]
    comparison: dict  # stored ComparisonResult document (see stats module)
    jitter_seed: int = 0
    width: int = 640
    height: int = 400

    def __post_init__(self):
        if len(self.a_values) == 0 or len(self.b_values) == 0:
            raise EmptySamples("estimation plot needs at least one value per group")
        if len(self.a_values) != len(self.b_values):
            raise EmptySamples("groups must be paired (equal length)")


def _swarm_positions(values, x_center, y_of, rng):
    """Greedy 1-D non-overlap placement with seeded jitter for exact ties."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    placed: list[tuple[float, float]] = []
    out = [None] * len(values)
    seen: dict[float, int] = {}
    step = 2.0 * SWARM_RADIUS + 1.0
    for i in order:
        y = y_of(values[i])
        ties = seen.get(values[i], 0)
        seen[values[i]] = ties + 1
        if ties:
            y += float(rng.uniform(-0.5, 0.5))
        k = 0
        while True:
            for candidate in ((k, -k) if k else (0,)):
                x = x_center + candidate * step
                if all((x - px) ** 2 + (y - py) ** 2 >= (2 * SWARM_RADIUS) ** 2
                       for px, py in placed):
                    placed.append((x, y))
                    out[i] = (x, y)
                    break
            if out[i] is not None:
                break
            k += 1
    return out


def gardner_altman_svg(spec: EstimationPlotSpec) -> str:
    """Render both groups as swarms plus a difference axis with the bootstrap CI."""
    a = np.asarray(spec.a_values, dtype=np.float64)
    b = np.asarray(spec.b_values, dtype=np.float64)
    ci = spec.comparison["bootstrap_ci"]
    estimate = float(spec.comparison["point_estimate"])

    width, height = spec.width, spec.height
    top, bottom = 48.0, height - 56.0
    left_a, left_b = width * 0.22, width * 0.46
    diff_x = width * 0.80

    lo_v = float(min(a.min(), b.min()))
    hi_v = float(max(a.max(), b.max()))
    if hi_v == lo_v:
        lo_v, hi_v = lo_v - 1.0, hi_v + 1.0
    pad = 0.08 * (hi_v - lo_v)
    lo_v, hi_v = lo_v - pad, hi_v + pad

    def y_of(value):
        return bottom - (value - lo_v) / (hi_v - lo_v) * (bottom - top)

    d_lo = min(0.0, float(ci["low"]))
    d_hi = max(0.0, float(ci["high"]))
    if d_hi == d_lo:
        d_lo, d_hi = d_lo - 1.0, d_hi + 1.0
    d_pad = 0.15 * (d_hi - d_lo)
    d_lo, d_hi = d_lo - d_pad, d_hi + d_pad

    def y_diff(value):
        return bottom - (value - d_lo) / (d_hi - d_lo) * (bottom - top)

    rng = np.random.default_rng(spec.jitter_seed)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{_px(width / 2)}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="monospace">{_esc(spec.metric_name)}</text>',
    ]

    # shared value axis with 5 ticks
    axis_x = width * 0.08
    lines.append(f'<line x1="{_px(axis_x)}" y1="{_px(top)}" x2="{_px(axis_x)}" '
                 f'y2="{_px(bottom)}" stroke="#000000" stroke-width="1"/>')
    for i in range(5):
        tick = lo_v + (hi_v - lo_v) * i / 4
        ty = y_of(tick)
        lines.append(f'<line x1="{_px(axis_x - 4)}" y1="{_px(ty)}" x2="{_px(axis_x)}" '
                     f'y2="{_px(ty)}" stroke="#000000" stroke-width="1"/>')
        lines.append(f'<text x="{_px(axis_x - 8)}" y="{_px(ty + 4)}" text-anchor="end" '
                     f'font-size="10" font-family="monospace">{_fmt(tick)}</text>')

    for values, x_center, name, color in (
            (a, left_a, spec.group_a_name, "#1f77b4"),
            (b, left_b, spec.group_b_name, "#d62728")):
        for x, y in _swarm_positions(list(values), x_center, y_of, rng):
            lines.append(f'<circle class="swarm-point" cx="{_px(x)}" cy="{_px(y)}" '
                         f'r="{_px(SWARM_RADIUS)}" fill="{color}" fill-opacity="0.85"/>')
        lines.append(f'<text x="{_px(x_center)}" y="{_px(bottom + 20)}" '
                     f'text-anchor="middle" font-size="12" '
                     f'font-family="monospace">{_esc(name)}</text>')

    # difference axis: zero line, CI bar, point-estimate marker
    lines.append(f'<line x1="{_px(diff_x)}" y1="{_px(top)}" x2="{_px(diff_x)}" '
                 f'y2="{_px(bottom)}" stroke="#888888" stroke-width="1"/>')
    zero_y = y_diff(0.0)
    lines.append(f'<line class="zero-line" x1="{_px(diff_x - 30)}" y1="{_px(zero_y)}" '
                 f'x2="{_px(diff_x + 30)}" y2="{_px(zero_y)}" stroke="#000000" '
                 f'stroke-width="1" stroke-dasharray="4,3"/>')
    lines.append(f'<line class="ci-bar" x1="{_px(diff_x)}" y1="{_px(y_diff(ci["low"]))}" '
                 f'x2="{_px(diff_x)}" y2="{_px(y_diff(ci["high"]))}" '
                 f'stroke="#000000" stroke-width="3"/>')
    lines.append(f'<circle class="point-estimate" cx="{_px(diff_x)}" '
                 f'cy="{_px(y_diff(estimate))}" r="5" fill="#000000"/>')

    labels = [
        f"mean diff = {_fmt(estimate)}",
        f"{_fmt(ci['level'] * 100)}% CI [{_fmt(ci['low'])}, {_fmt(ci['high'])}] "
        f"({ci['method']})",
    ]
    if spec.comparison.get("cohens_d") is not None:
        labels.append(f"d = {_fmt(spec.comparison['cohens_d'])} "
                      f"({spec.comparison['effect_label']})")
    wilcoxon = spec.comparison.get("wilcoxon") or {}
    if wilcoxon.get("p_value") is not None:
        labels.append(f"p = {_fmt(wilcoxon['p_value'])}")
    for i, text in enumerate(labels):
        lines.append(f'<text x="{_px(diff_x + 12)}" y="{_px(top + 14 + 16 * i)}" '
                     f'text-anchor="start" font-size="11" '
                     f'font-family="monospace">{_esc(text)}</text>')

    lines.append("</svg>")
    return "\n".join(lines)


# --- plain-text study summary -------------------------------------------------

METRIC_COLUMNS = (
    ("classification", "false_positive_rate"),
    ("classification", "auc"),
    ("classification", "balanced_accuracy"),
    ("classification", "mcc"),
    ("explanation", "explanation_error"),
    ("explanation", "sens_max"),
    ("explanation", "auc_morf"),
    ("robustness", "mean_delta_adv"),
    ("robustness", "lipschitz_lower"),
    ("timings", "train_time"),
    ("timings", "predict_time"),
    ("timings", "explain_time"),
)


def _metric_value(entry: dict, family: str, name: str):
    value = entry.get(family, {}).get(name)
    return "-" if value is None else _fmt(value)


def text_summary(record: dict) -> str:
    """Tabulate per-dataset metrics for both algorithms plus the statistics block."""
    out = []
    out.append(f"study {record['study_id']}")
    out.append(f"created {record['created_at']}   master_seed {record['master_seed']}")
    out.append(f"reproducibility_digest {record['reproducibility_digest']}")
    out.append("")
    out.append("datasets:")
    for ds in record["datasets"]:
        out.append(f"  {ds['name']}: n={ds['n_rows']} "
                   f"(train {ds['n_train']} / test {ds['n_test']}), "
                   f"hash {ds['content_hash'][:12]}")
    out.append("")

    by_key = {(m["algorithm"], m["dataset"]): m for m in record["metrics"]}
    algorithms = sorted({m["algorithm"] for m in record["metrics"]})
    out.append("metrics (per dataset, per algorithm):")
    header = "  {:<18} {:<12}".format("dataset", "algorithm") + "".join(
        " {:>12}".format(name if len(name) <= 12 else name[:12])
        for _, name in METRIC_COLUMNS)
    out.append(header)
    for ds in record["datasets"]:
        for algo in algorithms:
            entry = by_key.get((algo, ds["name"]))
            if entry is None:
                continue
            row = "  {:<18} {:<12}".format(ds["name"][:18], algo)
            row += "".join(" {:>12}".format(_metric_value(entry, fam, name))
                           for fam, name in METRIC_COLUMNS)
            out.append(row)
    out.append("")

    comparisons = record.get("comparison", [])
    if comparisons:
        out.append("statistics (algorithm a - algorithm b, per metric):")
        for comp in comparisons:
            wilcoxon = comp["wilcoxon"]
            if comp.get("wilcoxon_incomputable"):
                w_text = f"wilcoxon incomputable ({comp['wilcoxon_incomputable']})"
            else:
                w_text = (f"W={_fmt(wilcoxon['statistic'])} "
                          f"p={_fmt(wilcoxon['p_value'])} "
                          f"n_eff={wilcoxon['n_effective']} [{wilcoxon['method']}]")
            if comp.get("cohens_d_incomputable"):
                d_text = f"d incomputable ({comp['cohens_d_incomputable']})"
            else:
                d_text = f"d={_fmt(comp['cohens_d'])} ({comp['effect_label']})"
            ci = comp["bootstrap_ci"]
            out.append(f"  {comp['metric_name']}: diff={_fmt(comp['point_estimate'])}  "
                       f"{w_text}  {d_text}  "
                       f"CI[{_fmt(ci['low'])}, {_fmt(ci['high'])}] ({ci['method']})")
    return "\n".join(out) + "\n"
