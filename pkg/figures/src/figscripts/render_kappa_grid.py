"""Panel grid over the localizer resolution parameter: one panel per kappa
value found in a kappa-sweep CSV, shared axes, index and gap per panel.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .common import (
    POSITION_SWEEP_HEADER,
    FigureSpec,
    effective_nu,
    load_table,
    run_script,
    save,
    sidecar_hash,
    stamp,
)


def build_figure(spec: FigureSpec):
    table = load_table(spec.inputs[0], POSITION_SWEEP_HEADER)
    kappas = []
    for kap in table["kappa"]:  # preserve first-appearance order
        if kap not in kappas:
            kappas.append(kap)
    n = len(kappas)
    n_cols = min(3, n)
    n_rows = (n + n_cols - 1) // n_cols
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(3.2 * n_cols, 2.6 * n_rows),
        sharex=True, sharey=True, squeeze=False,
    )
    nu_all = effective_nu(table)
    for slot, kap in enumerate(kappas):
        ax = axes[slot // n_cols][slot % n_cols]
        sel = table["kappa"] == kap
        ax.step(table["x0"][sel], nu_all[sel], where="mid", color="tab:blue")
        twin = ax.twinx()
        twin.plot(table["x0"][sel], table["mu"][sel], color="tab:orange", lw=0.8)
        twin.set_yscale("log")
        twin.tick_params(axis="y", labelsize=6, colors="tab:orange")
        ax.set_title(f"kappa = {kap:g}", fontsize=8)
    for slot in range(n, n_rows * n_cols):
        axes[slot // n_cols][slot % n_cols].set_axis_off()
    for row in range(n_rows):
        axes[row][0].set_ylabel("local index")
    for col in range(n_cols):
        axes[n_rows - 1][col].set_xlabel("probe coordinate x0")
    fig.tight_layout()
    mark = sidecar_hash(spec.inputs[0])
    stamp(fig, mark)
    save(fig, spec.out, mark)
    plt.close(fig)
    return fig, kappas


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render one index/gap panel per kappa from a kappa-sweep CSV."
    )
    parser.add_argument("sweep", type=Path, help="kappa-sweep CSV (position schema)")
    parser.add_argument("--out", type=Path, required=True)
    args = parser.parse_args(argv)
    spec = FigureSpec(kind="kappa-grid", inputs=[args.sweep], out=args.out)
    return run_script(lambda: build_figure(spec))


if __name__ == "__main__":
    sys.exit(main())
