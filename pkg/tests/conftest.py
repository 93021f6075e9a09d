import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zebra.builder import EXAMPLE_NAMES, standard_example  # noqa: E402
from zebra.surface_core import validate_surface  # noqa: E402


@functools.lru_cache(maxsize=None)
def load(name):
    return validate_surface(standard_example(name))


@pytest.fixture
def surface():
    return load


@pytest.fixture(params=EXAMPLE_NAMES)
def any_surface(request):
    return request.param, load(request.param)
