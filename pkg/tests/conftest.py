"""Shared configurations for the lab tests."""

import pytest

from toda_ward_lab.simulation.fieldsim import McParams
from toda_ward_lab.symbolic.algebra import Weight
from toda_ward_lab.verification.freefield import BoundaryInsertion, BulkInsertion, InsertionConfig

GAMMA = 0.6
Q_SCALAR = GAMMA + 2 / GAMMA


@pytest.fixture
def small_params():
    """Cheap Monte Carlo settings: a coarse cloud and two short chains."""
    return McParams(samples=64, chains=2, bulk_grid=(8, 4), boundary_points=16,
                    batch_size=32, seed=7)


@pytest.fixture
def interacting_config():
    """One bulk and two boundary insertions inside the Seiberg bounds at gamma = 0.6."""
    return InsertionConfig(
        bulk=(BulkInsertion(0.3 + 1.0j, Weight(3.0, 3.0)),),
        boundary=(BoundaryInsertion(-0.5, Weight(2.0, 2.0)), BoundaryInsertion(0.8, Weight(2.0, 2.0))),
        mu_bulk=(1.0, 1.0),
        mu_boundary=((0.5, 0.5), (0.5, 0.5)),
        gamma=GAMMA,
    )


@pytest.fixture
def bulk_only_config():
    """Interacting configuration without boundary insertions or boundary potential."""
    return InsertionConfig(
        bulk=(BulkInsertion(-0.4 + 0.8j, Weight(2.5, 2.5)), BulkInsertion(0.5 + 1.2j, Weight(2.5, 2.5))),
        mu_bulk=(1.0, 0.8),
        gamma=GAMMA,
    )


@pytest.fixture
def free_neutral_config():
    """Neutral configuration without potential; the last boundary weight absorbs the charge."""
    last = 2 * (Q_SCALAR - 1.0 - 0.5)
    return InsertionConfig(
        bulk=(BulkInsertion(0.3 + 1.0j, Weight(1.0, 1.0)),),
        boundary=(BoundaryInsertion(-0.5, Weight(1.0, 1.0)), BoundaryInsertion(0.8, Weight(last, last))),
        mu_bulk=(0.0, 0.0),
        mu_boundary=((0.0, 0.0), (0.0, 0.0)),
        gamma=GAMMA,
    )
