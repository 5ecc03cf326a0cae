import numpy as np
import pytest

from ruledkit import RuledPatch, SampleGrid, TolerancePolicy, make_builtin_patch


@pytest.fixture
def tol():
    return TolerancePolicy()


def small_patch(name: str, t_samples: int = 41, **grid_kw) -> RuledPatch:
    """Builtin patch on a reduced grid for unit tests."""
    fc = make_builtin_patch(name)
    grid = SampleGrid.uniform(fc.interval, t_samples, **grid_kw)
    return RuledPatch(fc, grid)


@pytest.fixture
def cone_patch():
    return small_patch("circular_cone")


@pytest.fixture
def helicoid_patch():
    return small_patch("helicoid_frame")


@pytest.fixture
def tangent_dev_patch():
    return small_patch("tangent_developable_helix")


@pytest.fixture
def cylinder_patch():
    return small_patch("cylinder_helix")


@pytest.fixture
def product_patch():
    return small_patch("tangent_developable_product")


@pytest.fixture
def two_rotation_patch():
    return small_patch("two_rotation_r5")


def unit(dim, i):
    v = np.zeros(dim)
    v[i] = 1.0
    return v
