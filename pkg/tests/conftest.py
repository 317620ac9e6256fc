from __future__ import annotations

import pytest

from compactify.acceptance import (
    ONE_POINT_FAMILY,
    TWO_COORD_FAMILY,
    TWO_POINT_FAMILY,
    AcceptanceContext,
)
from compactify.compactification import BuildParams, build_compactification
from compactify.functions import Cos, StereoX, StereoY, Tanh

# Small windows keep unit-test builds under a second while preserving the
# qualitative closure structure (saturated tanh tails, dense cosine orbits).
SMALL = BuildParams(r_image=5.0, r_tail_lo=5.0, r_tail_hi=200.0, grid_step=0.05)


@pytest.fixture(scope="session")
def ctx() -> AcceptanceContext:
    return AcceptanceContext()


@pytest.fixture(scope="session")
def two_point_model(ctx):
    return ctx.model(TWO_POINT_FAMILY)


@pytest.fixture(scope="session")
def one_point_model(ctx):
    return ctx.model(ONE_POINT_FAMILY)


@pytest.fixture(scope="session")
def gamma_model(ctx):
    return ctx.model(TWO_COORD_FAMILY)


@pytest.fixture(scope="session")
def small_two_point():
    return build_compactification((Tanh(),), SMALL)


@pytest.fixture(scope="session")
def small_gamma():
    return build_compactification((Tanh(), Cos()), SMALL)


@pytest.fixture(scope="session")
def small_one_point():
    return build_compactification((StereoX(), StereoY()), SMALL)
