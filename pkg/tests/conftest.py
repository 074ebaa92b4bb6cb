import os

import pytest

from uavrelay import metrics
from uavrelay.cli import load_preset

JOBS = min(4, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def accept_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="session")
def preset_sweeps():
    """Monte Carlo sweeps for the relay/path-loss/antenna presets."""
    return {name: metrics.monte_carlo_sweep(load_preset(name), jobs=JOBS)
            for name in ("fig4", "fig5", "fig6", "fig7")}
