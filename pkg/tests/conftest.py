import pytest

from svcembed import ResourceView, warmup_kernels
from support import four_pm_tree


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    # jit compilation must not leak into any timed assertion
    warmup_kernels()


@pytest.fixture
def fourpm():
    return four_pm_tree()


@pytest.fixture
def fourpm_avail(fourpm):
    return ResourceView.pristine(fourpm)
