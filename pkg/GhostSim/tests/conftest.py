import pytest
import logManager
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec

# two slits seen at a short distance: small grids, runs in a fraction of a second
SMALL_SCENARIO = """\
kind: focused_image
method: montecarlo
seed: 7
wavelength: 693 nm
source_half_width: 1 mm
z1: 200 mm
z2: 200 mm
mask: double_slit
slit_width: 150 um
slit_separation: 500 um
n_realizations: 256
"""

SMALL_HBT = """\
kind: hbt
seed: 11
coherence_time: 0.1 ns
duration: 20 us
dt: 10 ps
bin_width: 10 ps
tac_window: 5 ns
start_rate: 8 GHz
stop_rate: 1 GHz
"""


@pytest.fixture
def fig2_source():
    """Uniform source of 1.67 mm diameter at 692.9 nm."""
    return SourceSpec.uniform(692.9e-9, 0.835e-3)


@pytest.fixture
def fig2_geometry():
    return OpticalGeometry(1.7, 1.7)


@pytest.fixture
def fig3_source():
    return SourceSpec.uniform(693e-9, 6e-3)


@pytest.fixture
def write_scenario(tmp_path):
    def write(text, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    # drop file handlers a test may have attached
    logManager.logger.configure_logger("INFO")
