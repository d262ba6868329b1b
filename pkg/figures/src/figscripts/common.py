"""Shared plumbing for the figure scripts: strict CSV schema handling,
sidecar provenance hashes, and the diverging index colormap.

The input schemas are the ones the computation CLI writes; they are treated
as frozen interfaces.  A file whose header deviates in any way (missing,
extra, or reordered columns) is rejected with an error naming the offending
columns, and the script exits nonzero.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

POSITION_SWEEP_HEADER = "x0,re_lambda0,im_lambda0,kappa,nu,mu,well_defined"
SPECTRAL_SWEEP_HEADER = "re_lambda0,im_lambda0,x0,kappa,nu,mu,well_defined"
EIGENVALUE_HEADER = "index,re_lambda,im_lambda"
MODE_WEIGHT_HEADER = "mode_index,re_lambda,im_lambda,k,w_k"


class SchemaError(Exception):
    pass


@dataclass
class FigureSpec:
    """What to draw: kind, inputs, styling, and output target."""

    kind: str
    inputs: list[Path]
    out: Path
    colormap: str = "coolwarm"
    marker: str = "o"
    labels: list[str] = field(default_factory=list)
    options: dict = field(default_factory=dict)


def load_table(path, expected_header: str) -> dict[str, np.ndarray]:
    """Read a CSV whose header must match `expected_header` byte for byte."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}")
    lines = text.strip().split("\n")
    header = lines[0]
    if header != expected_header:
        got = header.split(",")
        want = expected_header.split(",")
        missing = [c for c in want if c not in got]
        unknown = [c for c in got if c not in want]
        parts = [f"schema mismatch in {path.name}"]
        if missing:
            parts.append(f"missing columns: {', '.join(missing)}")
        if unknown:
            parts.append(f"unknown columns: {', '.join(unknown)}")
        if not missing and not unknown:
            parts.append(f"column order must be: {expected_header}")
        raise SchemaError("; ".join(parts))
    columns = {name: [] for name in expected_header.split(",")}
    for lineno, line in enumerate(lines[1:], start=2):
        values = line.split(",")
        if len(values) != len(columns):
            raise SchemaError(f"{path.name}:{lineno}: expected {len(columns)} fields")
        for name, value in zip(columns, values):
            try:
                columns[name].append(float(value))
            except ValueError:
                raise SchemaError(f"{path.name}:{lineno}: bad value {value!r} in {name}")
    return {name: np.array(vals) for name, vals in columns.items()}


def sidecar_hash(csv_path) -> str:
    """Provenance stamp: hash of the run sidecar next to a CSV (wall clock
    excluded so identical runs agree).  Falls back to 'no-sidecar'."""
    directory = Path(csv_path).parent
    sidecars = sorted(directory.glob("*_meta.json"))
    if not sidecars:
        return "no-sidecar"
    data = json.loads(sidecars[0].read_text())
    data.pop("wall_clock_seconds", None)
    canon = json.dumps(data, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def sidecar_parameters(csv_path) -> dict:
    directory = Path(csv_path).parent
    sidecars = sorted(directory.glob("*_meta.json"))
    if not sidecars:
        return {}
    return json.loads(sidecars[0].read_text()).get("parameters", {})


def effective_nu(table) -> np.ndarray:
    """nu with ill-defined samples masked to zero (no index without a gap)."""
    return np.where(table["well_defined"] == 1, table["nu"], 0.0)


def diverging_norm(nu_values):
    """Symmetric color scale centered at zero so the sign structure reads."""
    from matplotlib.colors import TwoSlopeNorm

    span = max(1.0, float(np.abs(nu_values).max()))
    return TwoSlopeNorm(vmin=-span, vcenter=0.0, vmax=span)


def stamp(fig, text: str):
    fig.text(0.995, 0.005, text, ha="right", va="bottom", fontsize=6, alpha=0.7)


def save(fig, out_path, hash_text: str):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    metadata = None
    if out_path.suffix.lower() == ".png":
        metadata = {"run-metadata-hash": hash_text}
    fig.savefig(out_path, dpi=200, metadata=metadata)


def run_script(build):
    """Wrap a renderer: schema problems exit 1 with the reason on stderr."""
    try:
        build()
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
