"""Figure renderers for the experiment CSVs.

One function per experiment, named ``render_<experiment>``, taking the
in-memory ExperimentResult and the target PNG path. Rendering is
optional everywhere; the CSV stays the canonical output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_DPI = 120


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_fpr_membership(result, path) -> None:
    ns = [row[0] for row in result.rows]
    emp = [row[1] for row in result.rows]
    theory = [row[2] for row in result.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, theory, "-", color="tab:blue", label="model")
    ax.plot(ns, emp, "o", color="tab:red", ms=4, label="measured")
    ax.set_xlabel("inserted elements n")
    ax.set_ylabel("false positive rate")
    ax.set_yscale("log")
    ax.set_title(f"m={result.notes.get('m')}, k={result.notes.get('k')}")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def render_mem_accesses(result, path) -> None:
    labels = [f"{row[0]}\n{row[1]}" for row in result.rows]
    reads = [row[3] for row in result.rows]
    qps = [row[5] for row in result.rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    x = range(len(labels))
    ax1.bar(x, reads, color="tab:blue")
    ax1.set_xticks(list(x), labels, fontsize=7)
    ax1.set_ylabel("window reads per query")
    ax2.bar(x, [q / 1e6 for q in qps], color="tab:green")
    ax2.set_xticks(list(x), labels, fontsize=7)
    ax2.set_ylabel("queries per second (millions)")
    _save(fig, path)


render_throughput = render_mem_accesses


def render_association_clear(result, path) -> None:
    outcome_rows = [
        row
        for row in result.rows
        if row[0] == "shbf-a" and row[1] != "balanced" and row[6] not in ("", 0.0)
    ]
    clear_rows = [row for row in result.rows if row[1] == "balanced"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))

    labels = [f"{row[2]}\n({row[1]})" for row in outcome_rows]
    x = range(len(labels))
    ax1.bar(x, [row[6] for row in outcome_rows], color="lightgray", label="model")
    ax1.plot(x, [row[5] for row in outcome_rows], "o", color="tab:red", label="measured")
    ax1.set_xticks(list(x), labels, fontsize=6, rotation=45)
    ax1.set_yscale("log")
    ax1.set_ylabel("outcome probability")
    ax1.legend()

    names = [row[0] for row in clear_rows]
    ax2.bar(range(len(names)), [row[5] for row in clear_rows], color="tab:blue")
    for i, row in enumerate(clear_rows):
        ax2.axhline(row[6], ls="--", color="gray", lw=0.8)
    ax2.set_xticks(range(len(names)), names)
    ax2.set_ylabel("clear-answer fraction")
    ax2.set_ylim(0, 1.05)
    _save(fig, path)


def render_multiplicity_cr(result, path) -> None:
    def series(structure, population):
        rows = [r for r in result.rows if r[1] == structure and r[2] == population]
        return [r[0] for r in rows], rows

    fig, ax = plt.subplots(figsize=(6, 4))
    ks, rows = series("shbf-x", "members")
    ax.plot(ks, [r[5] for r in rows], "o-", color="tab:blue", label="shifting, measured")
    ax.plot(ks, [r[6] for r in rows], "--", color="tab:blue", label="shifting, model")
    ks, rows = series("shbf-x", "non_members")
    ax.plot(ks, [r[5] for r in rows], "s-", color="tab:cyan", label="shifting, non-members")
    ks, rows = series("spectral", "members")
    ax.plot(ks, [r[5] for r in rows], "^-", color="tab:orange", label="spectral, measured")
    ax.set_xlabel("hash functions k")
    ax.set_ylabel("correctness rate")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
