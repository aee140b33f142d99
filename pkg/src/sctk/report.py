"""Experiment reports: delimited data plus rendered figures.

Two studies back the toolchain's headline claims and are rerun here on
demand: suite sizes of the H strategy against the W baseline, and mutation
scores of generated suites.  Each writes a CSV next to PNG figures so the
numbers stay greppable while the distributions stay visible.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from random import Random

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .experiments import mutation_experiment, random_minimal_fsm, size_comparison
from .testgen import generate_h


def write_size_report(out_dir, num_refs: int = 20, seed: int = 7) -> dict:
    """H vs W suite sizes over random minimal references; returns a summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples, _ = size_comparison(num_refs, seed)

    csv_path = out_dir / "suite_sizes.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ref", "states_n", "inputs", "h_cases", "h_symbols", "w_cases", "w_symbols", "ratio_h_over_w"])
        for idx, s in enumerate(samples):
            writer.writerow([idx, s.n, s.k, s.h_cases, s.h_symbols, s.w_cases, s.w_symbols, f"{s.ratio:.4f}"])

    ratios = [s.ratio for s in samples]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(ratios, bins=12, color="#4878cf", edgecolor="black")
    ax.axvline(1.0, color="red", linestyle="--", linewidth=1, label="parity")
    ax.set_xlabel("H symbols / W symbols")
    ax.set_ylabel("references")
    ax.set_title(f"Suite size ratio over {len(samples)} random references")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "suite_size_ratio.png")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter([s.w_symbols for s in samples], [s.h_symbols for s in samples], color="#4878cf")
    lim = max(max(s.w_symbols for s in samples), max(s.h_symbols for s in samples)) * 1.05
    ax.plot([0, lim], [0, lim], color="gray", linestyle=":", linewidth=1)
    ax.set_xlim(0, lim)
    ax.set_ylim(0, lim)
    ax.set_xlabel("W suite total symbols")
    ax.set_ylabel("H suite total symbols")
    ax.set_title("Suite sizes per reference")
    fig.tight_layout()
    fig.savefig(out_dir / "suite_sizes.png")
    plt.close(fig)

    return {
        "csv": str(csv_path),
        "figures": [str(out_dir / "suite_size_ratio.png"), str(out_dir / "suite_sizes.png")],
        "references": len(samples),
        "fraction_h_le_w": sum(1 for s in samples if s.h_symbols <= s.w_symbols) / len(samples),
        "mean_ratio": sum(ratios) / len(ratios),
        "max_ratio": max(ratios),
    }


def write_mutation_report(out_dir, num_refs: int = 10, mutants: int = 2000, seed: int = 11) -> dict:
    """Mutation scores of generated H suites; returns a summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = Random(seed)
    rows = []
    for idx in range(num_refs):
        n = rng.randint(2, 6)
        k = rng.randint(2, 4)
        ref = random_minimal_fsm(n, k, 2, rng)
        suite = generate_h(ref, n)
        outcome = mutation_experiment(ref, suite, mutants, Random(rng.randrange(2**31)))
        rows.append((idx, n, k, outcome))

    csv_path = out_dir / "mutation_scores.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ref", "states_n", "inputs", "sampled", "distinct", "equivalent", "killed", "survivors", "score"])
        for idx, n, k, outcome in rows:
            writer.writerow(
                [idx, n, k, outcome.sampled, outcome.distinct, outcome.equivalent,
                 outcome.killed, len(outcome.survivors), f"{outcome.score:.4f}"]
            )

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([r[0] for r in rows], [r[3].score for r in rows], color="#6acc65", edgecolor="black")
    ax.set_ylim(0, 1.05)
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel("reference")
    ax.set_ylabel("mutation score")
    ax.set_title(f"Mutation score per reference ({mutants} sampled mutants each)")
    fig.tight_layout()
    fig.savefig(out_dir / "mutation_scores.png")
    plt.close(fig)

    return {
        "csv": str(csv_path),
        "figures": [str(out_dir / "mutation_scores.png")],
        "references": num_refs,
        "min_score": min(r[3].score for r in rows),
        "total_survivors": sum(len(r[3].survivors) for r in rows),
    }


def write_report(out_dir, num_refs: int = 20, mutants: int = 2000, seed: int = 7) -> dict:
    """Both studies plus a machine-readable summary.json."""
    out_dir = Path(out_dir)
    summary = {
        "sizes": write_size_report(out_dir, num_refs=num_refs, seed=seed),
        "mutation": write_mutation_report(out_dir, num_refs=max(num_refs // 2, 1), mutants=mutants, seed=seed + 1),
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    summary["summary"] = str(out_dir / "summary.json")
    return summary
