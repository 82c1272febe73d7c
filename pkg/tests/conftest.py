from __future__ import annotations

import pytest

from agentbom import scenarios

ATTACK_IDS = tuple(s for s in scenarios.SCENARIO_IDS if s != "benign_baseline")


@pytest.fixture(scope="session")
def fixtures():
    """Every scenario generated once at seed 0."""
    return {sid: scenarios.generate(sid, seed=0) for sid in scenarios.SCENARIO_IDS}


@pytest.fixture(scope="session")
def graphs(fixtures):
    """The corresponding built graphs, also shared across the session."""
    return {sid: fx.build() for sid, fx in fixtures.items()}
