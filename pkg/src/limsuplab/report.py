"""Figure rendering for produced reports.

Reads the delimited/JSON artifacts the commands write and renders matplotlib
figures next to them.  Figures are a convenience view; the CSV/JSON files
remain the machine contract.
"""

from __future__ import annotations

import csv
import json
import os
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_ubiquity_csv(csv_path: str, out_png: str) -> str:
    """Capture ratio against window level, one line per ball."""
    rows = list(csv.DictReader(open(csv_path)))
    by_ball = {}
    for r in rows:
        by_ball.setdefault(r["ball"], []).append((int(r["n"]), float(r["ratio"])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in sorted(by_ball.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.set_xlabel("window level n")
    ax.set_ylabel("m(B ∩ Δ(ρ,n)) / m(B)")
    ax.set_ylim(0, 1.05)
    ax.axhline(0.5, color="grey", lw=0.8, ls="--")
    ax.legend(fontsize=8)
    return _save(fig, out_png)


def render_quasi_csv(csv_path: str, out_png: str) -> str:
    rows = list(csv.DictReader(open(csv_path)))
    qs = [int(r["Q"]) for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(qs, [float(r["ratio"]) for r in rows], marker="o")
    ax1.set_xlabel("horizon Q")
    ax1.set_ylabel("pairwise ratio R(Q)")
    ax2.plot(qs, [float(r["borel_cantelli_bound"]) for r in rows], marker="s", color="tab:green")
    ax2.set_xlabel("horizon Q")
    ax2.set_ylabel("divergence lower bound")
    return _save(fig, out_png)


def render_tree_jsonl(jsonl_path: str, out_png: str, max_balls: int = 50_000) -> str:
    """Ball centres by level, sized by radius (log scale on radius)."""
    levels = {}
    with open(jsonl_path) as fh:
        for i, line in enumerate(fh):
            if i >= max_balls:
                break
            rec = json.loads(line)
            num, den = rec["center"].split("/")
            rn, rd = rec["radius"].split("/")
            levels.setdefault(rec["level"], []).append((int(num) / int(den), int(rn) / int(rd)))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for lvl, pts in sorted(levels.items()):
        ax.scatter([p[0] for p in pts], [lvl] * len(pts), s=2, label=f"level {lvl} ({len(pts)} shown)")
    ax.set_xlabel("centre")
    ax.set_ylabel("level")
    ax.set_yticks(sorted(levels))
    ax.legend(fontsize=8, loc="upper right")
    return _save(fig, out_png)


def render_verdict_json(json_path: str, out_png: str) -> str:
    doc = json.load(open(json_path))
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.axis("off")
    lines = [
        f"system: {doc['system']}",
        f"psi: {doc['psi']}" + (f"   f: {doc['f']}" if doc.get("f") else ""),
        f"ambient measure: {doc['lebesgue']}    generalized: {doc['hausdorff']}",
    ]
    if doc.get("dimension"):
        lines.append(f"critical exponent: {doc['dimension']['fraction']} = {doc['dimension']['value']:.6g}")
    lines.append("")
    for t in doc["trace"]:
        mark = {"satisfied": "+", "claimed": "+", "verified": "~", "failed": "-", "undecided": "?"}[t["status"]]
        lines.append(f" [{mark}] {t['tag']}: {t['hypothesis']}")
    ax.text(0.01, 0.98, "\n".join(lines), va="top", family="monospace", fontsize=8)
    return _save(fig, out_png)


def render_all(directory: str) -> List[str]:
    """Render a figure for every recognized artifact in a directory."""
    made = []
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        stem, ext = os.path.splitext(name)
        out = os.path.join(directory, stem + ".png")
        try:
            if name.endswith(".ubiquity.csv"):
                made.append(render_ubiquity_csv(path, out))
            elif name.endswith(".quasi.csv"):
                made.append(render_quasi_csv(path, out))
            elif name.endswith(".tree.jsonl"):
                made.append(render_tree_jsonl(path, out))
            elif name.endswith(".verdict.json"):
                made.append(render_verdict_json(path, out))
        except Exception as e:  # a bad artifact should not stop the walk
            print(f"skipping {name}: {e}")
    return made
