"""Step plot of the local index along the rank coordinate, one series per
input sweep (typically one per decay-to-drive ratio), with an optional gap
subplot underneath.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .common import (
    POSITION_SWEEP_HEADER,
    FigureSpec,
    effective_nu,
    load_table,
    run_script,
    save,
    sidecar_hash,
    sidecar_parameters,
    stamp,
)


def build_figure(spec: FigureSpec):
    n_rows = 2 if spec.options.get("with_gap") else 1
    fig, axes = plt.subplots(
        n_rows, 1, sharex=True, figsize=(6.0, 2.6 * n_rows), squeeze=False
    )
    ax_nu = axes[0][0]
    ax_mu = axes[1][0] if n_rows == 2 else None
    hashes = []
    for i, path in enumerate(spec.inputs):
        table = load_table(path, POSITION_SWEEP_HEADER)
        label = spec.labels[i] if i < len(spec.labels) else None
        if label is None:
            params = sidecar_parameters(path)
            ratio = params.get("gamma_over_omega")
            label = f"decay/drive = {ratio:g}" if ratio is not None else Path(path).stem
        ax_nu.step(table["x0"], effective_nu(table), where="mid", label=label)
        if ax_mu is not None:
            ax_mu.plot(table["x0"], table["mu"], label=label)
        hashes.append(sidecar_hash(path))
    ax_nu.set_ylabel("local index")
    ax_nu.legend(fontsize=8)
    ax_nu.axhline(0.0, color="0.8", lw=0.6, zorder=0)
    (ax_mu or ax_nu).set_xlabel("probe coordinate x0")
    if ax_mu is not None:
        ax_mu.set_ylabel("localizer gap")
        ax_mu.set_yscale("log")
    fig.tight_layout()
    stamp(fig, " ".join(sorted(set(hashes))))
    save(fig, spec.out, hashes[0])
    plt.close(fig)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render index-vs-position step plots from position-sweep CSVs."
    )
    parser.add_argument("inputs", nargs="+", type=Path, help="position-sweep CSV files")
    parser.add_argument("--out", type=Path, required=True, help="output image path")
    parser.add_argument("--label", action="append", default=[],
                        help="series label, one per input (default: from sidecar)")
    parser.add_argument("--with-gap", action="store_true",
                        help="add a localizer-gap subplot")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind="position-sweep", inputs=args.inputs, out=args.out,
        labels=args.label, options={"with_gap": args.with_gap},
    )
    return run_script(lambda: build_figure(spec))


if __name__ == "__main__":
    sys.exit(main())
