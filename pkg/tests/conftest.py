import numpy as np
import pytest

from homodyne_bell import PipelineConfig, run_pipeline

XI_STAR = 1.0 / np.sqrt(2.0)
CHI_STAR = np.pi / 4.0


@pytest.fixture(scope="session")
def pipeline_state():
    """The three-iteration, photon-subtracted source state at xi = 1/sqrt2."""
    return run_pipeline(PipelineConfig(xi=XI_STAR)).final_state
