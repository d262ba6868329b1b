"""Fixture data for the figure tests, generated once through the spintop CLI
(the computation package is a test dependency only; the renderers themselves
never import it).
"""

from pathlib import Path

import pytest

from spintop.cli import main as spintop_main


def cli(argv):
    code = spintop_main([str(a) for a in argv])
    assert code == 0, f"fixture CLI run failed: {argv}"


@pytest.fixture(scope="session")
def data(tmp_path_factory):
    """Reduced-grid runs of the acceptance parameter families."""
    root = tmp_path_factory.mktemp("figdata")
    runs = {
        # criterion-5 family: position sweeps at N=20 for two decay ratios
        "pos_g1": ["localizer-x", "--n-spins", 20, "--omega", 1, "--gamma", 1,
                   "--x-step", 0.5],
        "pos_g2": ["localizer-x", "--n-spins", 20, "--omega", 1, "--gamma", 2,
                   "--x-step", 0.5],
        "pos_g0": ["localizer-x", "--n-spins", 10, "--omega", 1, "--gamma", 0,
                   "--x-step", 0.5],
        # criterion-10 family: spectral plane + eigenvalue overlay at N=10
        "plane": ["localizer-plane", "--n-spins", 10, "--omega", 1,
                  "--gamma", 0.75, "--x0", 1,
                  "--re-min", -2.5, "--re-max", 0.25,
                  "--im-min", -1.6, "--im-max", 1.6,
                  "--re-count", 21, "--im-count", 21],
        # criterion-11 family: mode weights at N=10
        "modes": ["modes", "--n-spins", 10, "--omega", 1, "--gamma", 1.5],
        # criterion-6 family: kappa sweep at N=10 with the six panel values
        "kappa": ["kappa-sweep", "--n-spins", 10, "--omega", 1, "--gamma", 1,
                  "--kappa-list", "0.01,0.1,0.5,1,2,5", "--x-step", 0.5],
    }
    paths = {}
    for name, argv in runs.items():
        out = root / name
        cli(argv + ["--out-dir", out])
        paths[name] = out
    return paths
