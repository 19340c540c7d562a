import pytest

from frictionfusion import SGrid, VehicleState, calibrate_prior, fuse, plan, turn_scenario
from frictionfusion.fusion import assemble_input


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure the algorithms."""
    grid = SGrid(ds=5.0, s_f=50.0)
    series = assemble_input(grid, 0.5, 0.1)
    fuse(calibrate_prior(), series)
    scenario = turn_scenario()
    plan(VehicleState(s=0.0, d=0.0, v=12.0, t=0.0), scenario,
         [0.4] * grid.n_points, grid)
    yield
