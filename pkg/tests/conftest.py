from __future__ import annotations

import pytest

from latentbench import curation

MASTER_SEED = 20240501


@pytest.fixture(scope="session")
def lite_suite():
    return curation.sample_suite(curation.LITE_PROFILE, MASTER_SEED)


@pytest.fixture(scope="session")
def lite_by_env(lite_suite):
    by_env: dict[str, list] = {}
    for task in lite_suite:
        by_env.setdefault(task.env_kind, []).append(task)
    return by_env
