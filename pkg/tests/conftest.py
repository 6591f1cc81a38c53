"""Shared default problem setup used across the test modules.

The defaults match the canonical run configuration: source region
[-1, 1]^2 with a 9x9 node grid, a cell-centered 11x11 sensor grid on
[-3, 3]^2, the tilted plane (0.2, -0.1, -1.5) inside the box
[-0.25, 0.25]^2 x [-2, -1.4], and a smooth off-center bump slip.
"""

import numpy as np
import pytest

from halfcrack import ParamBox, PlaneParams, SensorSet, SlipGrid, SourceRegion, assemble_A


@pytest.fixture(scope="session")
def region():
    return SourceRegion(-1.0, 1.0, -1.0, 1.0, 9, 9)


@pytest.fixture(scope="session")
def sensors():
    return SensorSet.grid(-3.0, 3.0, -3.0, 3.0, 11, 11)


@pytest.fixture(scope="session")
def m_true():
    return PlaneParams(0.2, -0.1, -1.5)


@pytest.fixture(scope="session")
def box():
    return ParamBox(PlaneParams(-0.25, -0.25, -2.0), PlaneParams(0.25, 0.25, -1.4), 0.5)


@pytest.fixture(scope="session")
def slip(region):
    return SlipGrid.from_family(
        region, "bump", amplitude=1.0, center1=0.1, center2=-0.05, radius=0.8
    )


@pytest.fixture(scope="session")
def fine_data(sensors, m_true):
    """Crime-free synthetic data: twice finer slip grid, higher quadrature."""
    region_fine = SourceRegion(-1.0, 1.0, -1.0, 1.0, 17, 17)
    slip_fine = SlipGrid.from_family(
        region_fine, "bump", amplitude=1.0, center1=0.1, center2=-0.05, radius=0.8
    )
    return assemble_A(m_true, region_fine, sensors, 6).apply(slip_fine)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
