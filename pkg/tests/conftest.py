from __future__ import annotations

import pytest

from qboltz.layout import GridSpec, VelocityTable, build_layout
from qboltz.reflection import Box


@pytest.fixture(scope="session")
def grid8() -> GridSpec:
    return GridSpec((8, 8))


@pytest.fixture(scope="session")
def layout_8x8_m1(grid8):
    return build_layout(grid8, VelocityTable.from_lists([[1], [1]]))


@pytest.fixture(scope="session")
def layout_8x8_m12(grid8):
    return build_layout(grid8, VelocityTable.from_lists([[1, 2], [1, 2]]))


@pytest.fixture(scope="session")
def center_box() -> Box:
    return Box((3, 3), (4, 4))
