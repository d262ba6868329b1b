"""Heatmap of the local index over the complex-frequency plane with the
generator's eigenvalues overlaid as hollow circles.
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
    EIGENVALUE_HEADER,
    SPECTRAL_SWEEP_HEADER,
    FigureSpec,
    SchemaError,
    diverging_norm,
    effective_nu,
    load_table,
    run_script,
    save,
    sidecar_hash,
    stamp,
)


def build_figure(spec: FigureSpec):
    plane_path, eig_path = spec.inputs
    table = load_table(plane_path, SPECTRAL_SWEEP_HEADER)
    eigs = load_table(eig_path, EIGENVALUE_HEADER)
    re = np.unique(table["re_lambda0"])
    im = np.unique(table["im_lambda0"])
    if re.size * im.size != table["re_lambda0"].size:
        raise SchemaError(f"{Path(plane_path).name}: rows do not form a rectangular grid")
    nu = effective_nu(table).reshape(re.size, im.size)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(
        re, im, nu.T, cmap=spec.colormap, norm=diverging_norm(nu), shading="nearest"
    )
    ax.scatter(
        eigs["re_lambda"], eigs["im_lambda"], facecolors="none",
        edgecolors="black", s=28, lw=0.8, marker=spec.marker,
        label="generator eigenvalues",
    )
    fig.colorbar(mesh, ax=ax, label="local index")
    ax.set_xlabel("Re probe frequency")
    ax.set_ylabel("Im probe frequency")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    mark = sidecar_hash(plane_path)
    stamp(fig, mark)
    save(fig, spec.out, mark)
    plt.close(fig)
    return fig, ax


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render an index heatmap over the complex-frequency plane."
    )
    parser.add_argument("plane", type=Path, help="spectral-sweep CSV")
    parser.add_argument("eigenvalues", type=Path, help="eigenvalue overlay CSV")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--colormap", default="coolwarm")
    parser.add_argument("--marker", default="o")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind="spectral-plane", inputs=[args.plane, args.eigenvalues],
        out=args.out, colormap=args.colormap, marker=args.marker,
    )
    return run_script(lambda: build_figure(spec))


if __name__ == "__main__":
    sys.exit(main())
