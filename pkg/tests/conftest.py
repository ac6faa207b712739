import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rro.score_model import EmpiricalComplement, ExponentialComplement, SupportedSet  # noqa: E402

INSTANCES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "instances")

YOUTUBE_SCORES = [100, 500, 700, 3000, 6000]
WORKED_SUPPORTED = [10, 15, 40, 114]
WORKED_COMPLEMENT = {
    "200": [10, 24, 35, 60, 80, 100, 200, 220],
    "120": [10, 24, 35, 60, 80, 100, 120, 220],
}


def instance_path(name):
    return os.path.join(INSTANCES_DIR, name)


@pytest.fixture
def micro():
    """Two entries {5, 12} against a complement {10, 20}."""
    return SupportedSet.from_scores([5, 12]), EmpiricalComplement([10, 20])


@pytest.fixture
def youtube():
    return SupportedSet.from_scores(YOUTUBE_SCORES), ExponentialComplement(0.8)


@pytest.fixture(params=sorted(WORKED_COMPLEMENT))
def worked_example(request):
    return SupportedSet.from_scores(WORKED_SUPPORTED), EmpiricalComplement(WORKED_COMPLEMENT[request.param])
