"""End-to-end experiments on the standard synthetic scenes, run with `pytest -m slow`"""

import numpy as np
import pytest

from acmswap import bench
from acmswap.bench import Scene, SyntheticSpec

pytestmark = pytest.mark.slow

TWO_BLOB = SyntheticSpec(Scene.TWO_BLOB, 128, 128, (200.0, 50.0), 80.0, noise=5.0)
FOUR_REGION = SyntheticSpec(Scene.FOUR_REGION, 128, 128, noise=5.0, seed=1)
VESSEL = SyntheticSpec(Scene.VESSEL, 128, 128, noise=5.0, seed=2)

WINDOW = 20


def _windowed_descent(trace):
    starts, ends = trace[:-WINDOW], trace[WINDOW:]
    return bool(np.all(ends <= starts + 1e-3 * np.abs(starts)))


@pytest.fixture(scope="module")
def two_blob():
    image, truth = bench.generate(TWO_BLOB)
    return image, truth, bench.standard_inits(image.shape)


@pytest.fixture(scope="module")
def rsf_robustness(two_blob):
    image, truth, inits = two_blob
    return bench.robustness_suite("rsf", image, truth, inits, workers=4)


def test_improved_rsf_every_init(rsf_robustness):
    table = rsf_robustness.table
    improved = table[table["polarity"] == "bright_object"]
    original = table[table["polarity"] == "off"]
    assert len(table) == 8
    assert (improved["dsc"] >= 0.95).all()
    assert (original["dsc"] < 0.90).any()


@pytest.mark.parametrize("name", ["lif", "lgdf"])
def test_improved_models_every_init(name, two_blob):
    image, truth, inits = two_blob
    suite = bench.single_suite(name, image, truth, inits, workers=4)
    assert not suite.failures
    assert (suite.table["dsc"] >= 0.95).all()


def test_runs_stay_finite(rsf_robustness):
    assert not rsf_robustness.failures
    for result in rsf_robustness.results:
        assert np.all(np.isfinite(result.energy_trace))
        assert np.all(np.isfinite(result.final_phi.phi))
        assert _windowed_descent(result.energy_trace)


def test_multiphase():
    image, truth = bench.generate(FOUR_REGION)
    inits = bench.standard_phase_inits(image.shape, FOUR_REGION.levels)
    suite = bench.robustness_suite("mrsf", image, truth, inits, workers=3)
    table = suite.table
    regions = [f"dsc_{i}" for i in range(1, 5)]
    improved = table[table["polarity"] == "bright_object"]
    assert (improved[regions] >= 0.90).all().all()

    original = table[(table["polarity"] == "off") & (table["init"] == "off_target")]
    assert (original[regions] < 0.70).any().any()


def test_sigma_sweep():
    image, truth = bench.generate(VESSEL)
    init = bench.standard_inits(image.shape)[0][1]
    sweep = bench.sigma_sweep("rsf", image, truth, init, (3.0, 4.0, 5.0), workers=6)
    table = sweep.table
    improved = table[table["polarity"] == "bright_object"].set_index("sigma")["dsc"]
    original = table[table["polarity"] == "off"].set_index("sigma")["dsc"]
    assert (improved >= 0.90).all()
    assert improved[3.0] > original[3.0]


@pytest.mark.parametrize("name", ["rsf", "lif", "lgdf"])
def test_overhead(name, two_blob):
    image, _, inits = two_blob
    timing = bench.timing_compare(name, image, inits[0][1], iters=100)
    assert timing["ratio"] <= 1.2
