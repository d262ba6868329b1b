"""Deterministic file output: CSV writers with fixed schemas and 17-digit
round-trip formatting, plus the JSON metadata sidecar every run emits.

Schemas (headers are part of the interface and must not drift):

    position sweep   x0,re_lambda0,im_lambda0,kappa,nu,mu,well_defined
    spectral sweep   re_lambda0,im_lambda0,x0,kappa,nu,mu,well_defined
    eigenvalues      index,re_lambda,im_lambda
    hoppings         k,q,re_tplus,im_tplus,re_tminus,im_tminus,re_gamma,
                     im_gamma,re_wplus,im_wplus,re_wminus,im_wminus
    observables      t,jx,jy,jz
    coefficients     t,re_a_<k>_<q>,im_a_<k>_<q>,...
    mode weights     mode_index,re_lambda,im_lambda,k,w_k

The kappa-sweep file reuses the position-sweep schema with rows grouped by
kappa in list order.  `well_defined` is written as 1/0.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np

POSITION_SWEEP_HEADER = "x0,re_lambda0,im_lambda0,kappa,nu,mu,well_defined"
SPECTRAL_SWEEP_HEADER = "re_lambda0,im_lambda0,x0,kappa,nu,mu,well_defined"
EIGENVALUE_HEADER = "index,re_lambda,im_lambda"
HOPPING_HEADER = (
    "k,q,re_tplus,im_tplus,re_tminus,im_tminus,re_gamma,im_gamma,"
    "re_wplus,im_wplus,re_wminus,im_wminus"
)
OBSERVABLE_HEADER = "t,jx,jy,jz"
MODE_WEIGHT_HEADER = "mode_index,re_lambda,im_lambda,k,w_k"

ARTIFACT_VERSION = "0.1.0"


def fmt(x) -> str:
    """Format a float with 17 significant digits (round-trip exact)."""
    return format(float(x), ".17g")


def write_csv(path, header: str, rows) -> Path:
    """Write rows (iterables of already-formatted strings) under a header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def sweep_rows_position(sweep):
    lam0 = sweep.metadata["lambda0"]
    kap = sweep.metadata["kappa"]
    for x0, s in zip(sweep.x_grid, sweep.samples):
        yield (
            fmt(x0), fmt(lam0.real), fmt(lam0.imag), fmt(kap),
            fmt(s.nu), fmt(s.mu), "1" if s.well_defined else "0",
        )


def sweep_rows_spectral(sweep):
    x0 = sweep.metadata["x0"]
    kap = sweep.metadata["kappa"]
    for s in sweep.samples:
        yield (
            fmt(s.lambda0.real), fmt(s.lambda0.imag), fmt(x0), fmt(kap),
            fmt(s.nu), fmt(s.mu), "1" if s.well_defined else "0",
        )


def eigenvalue_rows(eigenvalues):
    for i, lam in enumerate(eigenvalues):
        yield (str(i), fmt(lam.real), fmt(lam.imag))


def hopping_rows(hop):
    for n, (k, q) in enumerate(hop.labels):
        yield (
            str(k), str(q),
            fmt(hop.tplus[n].real), fmt(hop.tplus[n].imag),
            fmt(hop.tminus[n].real), fmt(hop.tminus[n].imag),
            fmt(hop.gamma_onsite[n].real), fmt(hop.gamma_onsite[n].imag),
            fmt(hop.wplus[n].real), fmt(hop.wplus[n].imag),
            fmt(hop.wminus[n].real), fmt(hop.wminus[n].imag),
        )


def observable_rows(times, jx, jy, jz):
    for t, x, y, z in zip(times, jx, jy, jz):
        yield (fmt(t), fmt(x), fmt(y), fmt(z))


def coefficient_header(labels) -> str:
    cols = ["t"]
    for k, q in labels:
        cols.append(f"re_a_{k}_{q}")
        cols.append(f"im_a_{k}_{q}")
    return ",".join(cols)


def coefficient_rows(times, coefficients):
    for t, vec in zip(times, coefficients):
        row = [fmt(t)]
        for a in vec:
            row.append(fmt(a.real))
            row.append(fmt(a.imag))
        yield tuple(row)


def mode_weight_rows(table):
    for mode in range(table.n_modes):
        lam = table.eigenvalues[mode]
        for k, w in enumerate(table.weights[mode]):
            yield (str(mode), fmt(lam.real), fmt(lam.imag), str(k), fmt(w))


class RunWriter:
    """Collects output files and emits one JSON sidecar for the run."""

    def __init__(self, out_dir, command: str, parameters: dict, tolerances: dict | None = None):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.parameters = parameters
        self.tolerances = tolerances or {}
        self.outputs: list[str] = []
        self._start = time.perf_counter()

    def csv(self, name: str, header: str, rows) -> Path:
        path = write_csv(self.out_dir / name, header, rows)
        self.outputs.append(path.name)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.outputs.append(path.name)
        return path

    def finish(self, extra: dict | None = None) -> Path:
        """Write the sidecar.  Wall-clock is informational and is the one
        field that varies between otherwise identical runs."""
        meta = {
            "artifact_version": ARTIFACT_VERSION,
            "command": self.command,
            "parameters": self.parameters,
            "tolerances": self.tolerances,
            "outputs": sorted(self.outputs),
            "wall_clock_seconds": time.perf_counter() - self._start,
        }
        if extra:
            meta.update(extra)
        path = self.out_dir / f"{self.command}_meta.json"
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path


def metadata_hash(sidecar_path) -> str:
    """Stable hash of a sidecar's regeneration-relevant content (wall clock
    excluded), used by figure scripts to stamp their provenance."""
    data = json.loads(Path(sidecar_path).read_text())
    data.pop("wall_clock_seconds", None)
    canon = json.dumps(data, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
