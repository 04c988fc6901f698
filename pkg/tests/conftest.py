import os

import numpy as np
import pytest

from artsoh import synthetic

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ring_image():
    return synthetic.canonical_shape("ring")


def rgb_from_gray(gray):
    return np.repeat(np.asarray(gray, dtype=np.float64)[..., None], 3, axis=2)


def tad_root():
    """Dataset root of the public TAD archive, if the environment provides one."""
    root = os.environ.get("ARTSOH_TAD_ROOT")
    return root if root and os.path.isdir(root) else None


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
