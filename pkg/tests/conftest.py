import json
from pathlib import Path

import numpy as np
import pytest

import spintop as st

CONFIG = json.loads((Path(__file__).parent / "acceptance_config.json").read_text())


@pytest.fixture(scope="session")
def acceptance_config():
    return CONFIG


@pytest.fixture(scope="session")
def rep4():
    return st.SpinRepresentation.from_n_spins(4)


@pytest.fixture(scope="session")
def basis4(rep4):
    return st.build_tensor_basis(rep4)


@pytest.fixture(scope="session")
def rep10():
    return st.SpinRepresentation.from_n_spins(10)


@pytest.fixture(scope="session")
def basis10(rep10):
    return st.build_tensor_basis(rep10)


def liouv_for(n, omega, gamma, basis=None):
    rep = st.SpinRepresentation.from_n_spins(n)
    if basis is None:
        basis = st.build_tensor_basis(rep)
    params = st.ModelParameters(omega=omega, gamma_rate=gamma, n_spins=n)
    return st.build_superoperator(rep, params, basis)


def run_cli(argv, cwd=None):
    """Invoke the CLI in-process; returns the exit code."""
    from spintop.cli import main

    return main([str(a) for a in argv])


def read_csv_columns(path):
    """Parse one of the package CSVs into {column: float array} (headers kept)."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    cols = {h: [] for h in header}
    for line in lines[1:]:
        for h, val in zip(header, line.split(",")):
            cols[h].append(float(val))
    return {h: np.array(v) for h, v in cols.items()}
