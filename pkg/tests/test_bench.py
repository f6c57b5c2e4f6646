import math

import numpy as np
import pandas as pd
import pytest
from scipy import ndimage

from acmswap import bench, loader
from acmswap.bench import BiasKind, Scene, SyntheticSpec
from acmswap.levelset import InitSpec, Shape
from acmswap.swap import Polarity
from acmswap.types import NumericalDivergenceError, ParameterError

SMALL = SyntheticSpec(Scene.TWO_BLOB, width=32, height=32, seed=3)
FAST = {"max_iters": 3}


class Exploding(loader.TwoPhaseModel):
    strings = {"name": "exploding"}

    def fit(self, state, image, params, kernel):
        zeros = np.zeros(image.shape)
        return loader.Fits((zeros, zeros), (zeros, zeros))

    def step(self, state, image, params, kernel, fits):
        return state.evolve(np.full(state.shape, np.inf))

    def energy(self, state, image, params, kernel, fits):
        return 0.0


class TestGenerate:
    def test_deterministic(self):
        first, truth = bench.generate(SMALL)
        second, _ = bench.generate(SMALL)
        np.testing.assert_array_equal(first, second)
        assert first.shape == (32, 32)
        assert len(truth) == 1 and truth[0].dtype == bool

        other, _ = bench.generate(SyntheticSpec(Scene.TWO_BLOB, 32, 32, seed=4))
        assert not np.array_equal(first, other)

    @pytest.mark.parametrize("scene", list(Scene))
    def test_clamped(self, scene):
        image, truth = bench.generate(
            SyntheticSpec(scene, width=48, height=40, noise=60.0)
        )
        assert image.shape == (40, 48)
        assert image.min() >= 0 and image.max() <= 255
        assert all(mask.shape == (40, 48) and mask.any() for mask in truth)

    def test_four_regions_ordered_by_level(self):
        spec = SyntheticSpec(
            Scene.FOUR_REGION,
            width=64,
            height=64,
            levels=(220.0, 40.0, 160.0, 100.0),
            bias=0.0,
            noise=0.0,
        )
        image, truth = bench.generate(spec)
        assert len(truth) == 4
        np.testing.assert_array_equal(np.stack(truth).sum(axis=0), 1)
        for mask, level in zip(truth, (40.0, 100.0, 160.0, 220.0)):
            np.testing.assert_array_equal(image[mask], level)

    def test_additive_bias_is_linear_ramp(self):
        image, truth = bench.generate(
            SyntheticSpec(Scene.TWO_BLOB, 32, 32, bias=64.0, noise=0.0)
        )
        background = ~truth[0]
        row = image[0][background[0]]
        assert row[0] == pytest.approx(50.0 - 32.0)
        assert row[-1] == pytest.approx(50.0 + 32.0)
        assert np.all(np.diff(row) > 0)

    def test_multiplicative_bias(self):
        image, _ = bench.generate(
            SyntheticSpec(
                Scene.VESSEL,
                32,
                32,
                levels=(200.0, 100.0),
                bias=51.0,
                bias_kind=BiasKind.MULTIPLICATIVE,
                noise=0.0,
            )
        )
        assert image[0, 0] == pytest.approx(100.0 * 0.9)
        assert image[0, -1] == pytest.approx(100.0 * 1.1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"scene": Scene.FOUR_REGION, "levels": (1.0, 2.0)},
            {"scene": Scene.TWO_BLOB, "width": 8},
            {"scene": Scene.TWO_BLOB, "noise": -1.0},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ParameterError):
            SyntheticSpec(**kwargs)

    def test_scene_by_value(self):
        assert SyntheticSpec("vessel_like").scene is Scene.VESSEL


class TestDsc:
    def test_values(self):
        a = np.array([[True, True, False]])
        b = np.array([[True, False, False]])
        assert bench.dsc(a, a) == 1
        assert bench.dsc(a, ~a) == 0
        assert bench.dsc(a, b) == pytest.approx(2 / 3)
        assert bench.dsc(a, b) == bench.dsc(b, a)

    def test_empty(self):
        empty = np.zeros((3, 3), dtype=bool)
        assert bench.dsc(empty, empty) == 1

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            bench.dsc(np.zeros((2, 2)), np.zeros((2, 3)))


@pytest.mark.parametrize("dims", [(16, 16), (40, 64), (128, 128)])
def test_standard_inits_fit_grid(dims):
    inits = bench.standard_inits(dims)
    assert [name for name, _ in inits] == [
        "centered",
        "corner",
        "oversized",
        "two_boxes",
    ]
    for _, init in inits:
        assert all(shape.within(dims) for shape in init.shapes)
        assert init.region(dims).any()


def test_corner_init_stays_near_objects():
    _, truth = bench.generate(SyntheticSpec(Scene.TWO_BLOB, width=128, height=128))
    obj = truth[0]
    region = dict(bench.standard_inits(obj.shape))["corner"].region(obj.shape)
    assert (obj & region).any() and (obj & ~region).any()
    assert ndimage.distance_transform_edt(~obj)[region].max() <= 11


def test_standard_phase_inits():
    inits = dict(bench.standard_phase_inits((64, 64)))
    assert inits["thresholds"].thresholds == (70.0, 130.0, 190.0)
    for name in ("boxes", "off_target"):
        for spec in (inits[name].a, inits[name].b):
            assert all(shape.within((64, 64)) for shape in spec.shapes)


class TestSuites:
    def test_single(self):
        image, truth = bench.generate(SMALL)
        suite = bench.single_suite(
            "rsf", image, truth, bench.standard_inits(image.shape), FAST
        )
        table = suite.table
        assert list(table["run"]) == [0, 1, 2, 3]
        assert set(table.columns) >= {
            "model",
            "init",
            "polarity",
            "dsc",
            "dsc_min",
            "iterations",
            "elapsed",
            "error",
        }
        assert (table["polarity"] == "bright_object").all()
        assert (table["iterations"] == 3).all()
        assert table["dsc"].between(0, 1).all()
        assert not suite.failures
        assert all(result is not None for result in suite.results)

    def test_robustness_rows(self):
        image, truth = bench.generate(SMALL)
        suite = bench.robustness_suite(
            "lif",
            image,
            truth,
            bench.standard_inits(image.shape),
            FAST,
            Polarity.DARK_OBJECT,
        )
        assert len(suite.table) == 8
        assert list(suite.table["polarity"]) == ["off", "dark_object"] * 4
        assert list(suite.table["init"][:2]) == ["centered", "centered"]

    @pytest.mark.parametrize("count", [0, 1])
    def test_robustness_needs_two_inits(self, count):
        image, truth = bench.generate(SMALL)
        inits = bench.standard_inits(image.shape)[:count]
        with pytest.raises(ParameterError, match="at least 2"):
            bench.robustness_suite("rsf", image, truth, inits, FAST)

    def test_without_truth(self):
        image, _ = bench.generate(SMALL)
        suite = bench.single_suite(
            "rsf", image, None, bench.standard_inits(image.shape)[:1], FAST
        )
        assert math.isnan(suite.table["dsc"][0])
        assert suite.table["error"][0] == ""

    def test_parallel_keeps_order(self):
        image, truth = bench.generate(SMALL)
        inits = bench.standard_inits(image.shape)
        tables = [
            bench.robustness_suite(
                "rsf", image, truth, inits, FAST, workers=workers
            ).table.drop(columns=["elapsed"])
            for workers in (1, 3)
        ]
        pd.testing.assert_frame_equal(*tables)

    def test_failures_are_rows(self):
        image, truth = bench.generate(SMALL)
        inits = [("box", InitSpec((Shape.rectangle((4, 10), (4, 10)),)))]
        suite = bench.single_suite(Exploding(), image, truth, inits)
        row = suite.table.iloc[0]
        assert math.isnan(row["dsc"])
        assert row["iterations"] == 0
        assert "NumericalDivergenceError" in row["error"]
        assert suite.results == [None]
        assert isinstance(suite.failures[0], NumericalDivergenceError)

    def test_multiphase_columns(self):
        spec = SyntheticSpec(Scene.FOUR_REGION, width=32, height=32, seed=1)
        image, truth = bench.generate(spec)
        suite = bench.single_suite(
            "mrsf",
            image,
            truth,
            bench.standard_phase_inits(image.shape, spec.levels)[:1],
            {"max_iters": 2},
        )
        row = suite.table.iloc[0]
        scores = [row[f"dsc_{i}"] for i in range(1, 5)]
        assert all(0 <= value <= 1 for value in scores)
        assert row["dsc"] == pytest.approx(np.mean(scores))
        assert row["dsc_min"] == pytest.approx(min(scores))

    def test_sigma_sweep(self):
        image, truth = bench.generate(SMALL)
        suite = bench.sigma_sweep(
            "rsf",
            image,
            truth,
            bench.standard_inits(image.shape)[0][1],
            (2.0, 4.0),
            FAST,
        )
        table = suite.table
        assert "dsc_min" not in table.columns
        assert list(table["sigma"]) == [2.0, 2.0, 4.0, 4.0]
        assert list(table["polarity"]) == ["off", "bright_object"] * 2

    def test_timing(self):
        image, _ = bench.generate(SMALL)
        series = bench.timing_compare(
            "rsf",
            image,
            bench.standard_inits(image.shape)[0][1],
            iters=2,
        )
        assert list(series.index) == [
            "model",
            "iterations",
            "t_original",
            "t_improved",
            "ratio",
        ]
        assert series["model"] == "rsf" and series["iterations"] == 2
        assert series["t_original"] > 0 and series["ratio"] > 0

    def test_timing_warms_up_and_alternates(self, monkeypatch):
        calls = []

        def fake_run(model, image, init, params):
            calls.append((params.polarity, params.max_iters))

        monkeypatch.setattr(bench, "run", fake_run)
        image, _ = bench.generate(SMALL)
        bench.timing_compare(
            "rsf",
            image,
            bench.standard_inits(image.shape)[0][1],
            iters=7,
            repeats=2,
        )
        off, bright = Polarity.OFF, Polarity.BRIGHT_OBJECT
        warmup = bench.WARMUP_ITERS
        assert calls == [
            (off, warmup),
            (bright, warmup),
            (off, 7),
            (bright, 7),
            (bright, 7),
            (off, 7),
        ]

    def test_timing_needs_a_repeat(self):
        image, _ = bench.generate(SMALL)
        with pytest.raises(ParameterError):
            bench.timing_compare(
                "rsf", image, bench.standard_inits(image.shape)[0][1], repeats=0
            )


def test_score_orders_multiphase_masks():
    image = np.array([[200.0, 10.0, 90.0, 150.0]])
    masks = tuple(np.eye(4, dtype=bool)[i][np.newaxis] for i in range(4))
    truth = [masks[1], masks[2], masks[3], masks[0]]

    class Result:
        pass

    result = Result()
    result.masks = masks
    assert bench.score(result, image, truth) == [1.0, 1.0, 1.0, 1.0]
    assert bench.score(result, image, None) == []
