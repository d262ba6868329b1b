"""Rank-resolved eigenmode weights overlaid on the local topological domain
structure: one panel per mode, bars for the weights, a step trace for the
index along the same rank axis.
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
    MODE_WEIGHT_HEADER,
    POSITION_SWEEP_HEADER,
    FigureSpec,
    SchemaError,
    effective_nu,
    load_table,
    run_script,
    save,
    sidecar_hash,
    stamp,
)


def build_figure(spec: FigureSpec):
    weights_path, sweep_path = spec.inputs
    weights = load_table(weights_path, MODE_WEIGHT_HEADER)
    sweep = load_table(sweep_path, POSITION_SWEEP_HEADER)
    modes = spec.options.get("modes")
    available = sorted({int(m) for m in weights["mode_index"]})
    if modes is None:
        modes = available
    else:
        unknown = set(modes) - set(available)
        if unknown:
            raise SchemaError(
                f"{Path(weights_path).name}: requested modes {sorted(unknown)} not present"
            )
    n = len(modes)
    fig, axes = plt.subplots(
        1, n, figsize=(3.4 * n, 3.0), sharey=True, squeeze=False
    )
    nu = effective_nu(sweep)
    for ax, mode in zip(axes[0], modes):
        sel = weights["mode_index"] == mode
        ks = weights["k"][sel]
        ws = weights["w_k"][sel]
        lam = complex(weights["re_lambda"][sel][0], weights["im_lambda"][sel][0])
        ax.bar(ks, ws, width=0.8, color="tab:blue", alpha=0.7, label="rank weight")
        twin = ax.twinx()
        twin.step(sweep["x0"], nu, where="mid", color="tab:red", lw=1.0,
                  label="local index")
        twin.set_ylim(min(-1.5, nu.min() - 0.5), max(1.5, nu.max() + 0.5))
        twin.tick_params(axis="y", labelsize=7, colors="tab:red")
        ax.set_title(f"mode at {lam:.3g}", fontsize=8)
        ax.set_xlabel("rank k / probe coordinate")
    axes[0][0].set_ylabel("weight")
    fig.tight_layout()
    mark = sidecar_hash(weights_path)
    stamp(fig, mark)
    save(fig, spec.out, mark)
    plt.close(fig)
    return fig, axes[0]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Overlay rank-resolved mode weights on the index domain structure."
    )
    parser.add_argument("weights", type=Path, help="mode-weight CSV")
    parser.add_argument("sweep", type=Path, help="position-sweep CSV")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--mode", action="append", type=int,
                        help="mode index to draw; repeatable (default: all present)")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind="mode-overlay", inputs=[args.weights, args.sweep], out=args.out,
        options={"modes": args.mode},
    )
    return run_script(lambda: build_figure(spec))


if __name__ == "__main__":
    sys.exit(main())
