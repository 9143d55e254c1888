"""
Shared pytest fixtures
"""

import numpy as np
import pytest

from paintseq import create_settings
from paintseq.fixtures import case_study, tipping_point
from paintseq.models import make_instance

PALETTE = ['red', 'white', 'blue']


def random_instance(seed, n=3, colors=None):
    """Random valid instance: colors from a small palette, p uniform in [0, 1)"""
    rng = np.random.default_rng(seed)
    colors = colors or [PALETTE[k] for k in rng.integers(0, len(PALETTE), size=n)]
    styles = [('A', 'B')[k] for k in rng.integers(0, 2, size=n)]
    repair = rng.uniform(0.0, 1.0, size=(n, n))
    np.fill_diagonal(repair, 0.0)
    return make_instance(
        colors, styles,
        changeover_rate=float(rng.uniform(1.0, 50.0)),
        repair_rate=float(rng.uniform(0.0, 200.0)),
        repair_matrix=repair,
    )


@pytest.fixture
def settings():
    return create_settings('testing')


@pytest.fixture
def case():
    return case_study()


@pytest.fixture
def tipping():
    return tipping_point()


@pytest.fixture
def red_white_red():
    return make_instance(['red', 'white', 'red'], ['A', 'B', 'B'], changeover_rate=20.0)
