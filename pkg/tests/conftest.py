import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stlworkbench.world import default_grid, load_demo

DEMO_DIR = Path(__file__).parent.parent / "src" / "stlworkbench" / "data" / "demos"


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def demos(grid):
    def load(name, label="positive"):
        return load_demo(DEMO_DIR / f"{name}.demo", grid, label)

    return load
