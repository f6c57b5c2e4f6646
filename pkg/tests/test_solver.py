import numpy as np
import pytest

from acmswap import loader, solver
from acmswap.levelset import InitSpec, LevelSet, Shape
from acmswap.multiphase import PhaseInit, unordered_pixels
from acmswap.swap import Polarity
from acmswap.types import ConfigError, NumericalDivergenceError, ParameterError

BOX = InitSpec((Shape.rectangle((6, 17), (6, 17)),))


class NaNModel(loader.TwoPhaseModel):
    """Blows up after a couple of steps"""

    strings = {"name": "nan"}

    def __init__(self, at=2, energy=False):
        super().__init__()
        self.at = at
        self.blow_energy = energy
        self.calls = 0

    def fit(self, state, image, params, kernel):
        zeros = np.zeros(image.shape)
        return loader.Fits((zeros, zeros), (zeros, zeros))

    def step(self, state, image, params, kernel, fits):
        self.calls += 1
        if self.calls > self.at and not self.blow_energy:
            return state.evolve(np.full(state.shape, np.nan))

        return state

    def energy(self, state, image, params, kernel, fits):
        return np.inf if self.blow_energy and self.calls >= self.at else 0.0


@pytest.mark.parametrize("name", ["rsf", "lif", "lgdf"])
def test_run_records_every_iteration(name, step_image):
    model = loader.get_model(name)
    params = model.resolve_params({"max_iters": 6})
    seen = []
    result = solver.run(
        model,
        step_image,
        BOX,
        params,
        on_iteration=lambda i, state, fits, energy: seen.append((i, energy)),
    )
    assert result.iterations_run == 6
    assert [i for i, _ in seen] == list(range(6))
    np.testing.assert_array_equal(result.energy_trace, [e for _, e in seen])
    assert result.reversed_trace.shape == (6,)
    assert np.all((result.reversed_trace >= 0) & (result.reversed_trace <= 1))
    assert result.mask.shape == step_image.shape
    assert np.all(np.isfinite(result.final_phi.phi))
    assert result.model == name
    assert result.polarity is Polarity.BRIGHT_OBJECT


@pytest.mark.parametrize("polarity", [Polarity.BRIGHT_OBJECT, Polarity.DARK_OBJECT])
@pytest.mark.parametrize("name", ["rsf", "lif", "lgdf"])
def test_swapped_fits_ordered_every_iteration(name, polarity, step_image):
    model = loader.get_model(name)
    overrides = {"max_iters": 8}
    if name == "lgdf":
        # independent exchange orders the variances too
        overrides["pair_variances"] = False

    noisy = step_image + np.random.default_rng(0).normal(0, 5, step_image.shape)
    checked = []

    def check(iteration, state, fits, energy):
        side1, side2 = fits.means
        if polarity is Polarity.BRIGHT_OBJECT:
            ordered = side1 <= side2
        else:
            ordered = side1 >= side2
        checked.append(bool(np.all(ordered)))
        if fits.variances is not None:
            v1, v2 = fits.variances
            ordered = v1 <= v2 if polarity is Polarity.BRIGHT_OBJECT else v1 >= v2
            checked.append(bool(np.all(ordered)))

    solver.run(
        model,
        noisy,
        BOX,
        model.resolve_params(overrides, polarity),
        on_iteration=check,
    )
    assert checked and all(checked)


@pytest.mark.parametrize("name", ["rsf", "lif", "lgdf"])
def test_exchange_idle_when_init_encloses_object(name, step_image):
    model = loader.get_model(name)
    results = [
        solver.run(
            model,
            step_image,
            BOX,
            model.resolve_params({"max_iters": 100}, polarity),
        )
        for polarity in (Polarity.OFF, Polarity.BRIGHT_OBJECT)
    ]
    original, improved = results
    np.testing.assert_array_equal(improved.mask, original.mask)
    np.testing.assert_allclose(
        improved.final_phi.phi,
        original.final_phi.phi,
        atol=1e-6,
    )


@pytest.mark.parametrize("name", ["rsf", "lif", "lgdf", "mrsf"])
def test_runs_are_deterministic(name):
    model = loader.get_model(name)
    image = np.random.default_rng(5).uniform(0, 255, size=(20, 20))
    init = (
        PhaseInit(thresholds=(60.0, 120.0, 180.0))
        if model.phases > 2
        else InitSpec((Shape.rectangle((5, 14), (5, 14)),))
    )
    params = model.resolve_params({"max_iters": 20})
    first, second = (solver.run(model, image, init, params) for _ in range(2))
    np.testing.assert_array_equal(first.energy_trace, second.energy_trace)
    np.testing.assert_array_equal(first.reversed_trace, second.reversed_trace)
    for a, b in zip(first.masks, second.masks):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("exchange", ["lattice", "sort"])
def test_mrsf_fits_ordered_every_iteration(exchange):
    model = loader.get_model("mrsf")
    image = np.random.default_rng(2).uniform(0, 255, size=(20, 20))
    checked = []
    solver.run(
        model,
        image,
        PhaseInit(thresholds=(60.0, 120.0, 180.0)),
        model.resolve_params({"max_iters": 5, "exchange": exchange}),
        on_iteration=lambda i, s, fits, e: checked.append(
            not unordered_pixels(fits.means, Polarity.BRIGHT_OBJECT, exchange).any()
        ),
    )
    assert len(checked) == 5 and all(checked)


def test_off_passes_raw_fits(step_image):
    model = loader.get_model("rsf")
    raw_equals_used = []
    solver.run(
        model,
        step_image,
        BOX,
        model.resolve_params({"max_iters": 3}, Polarity.OFF),
        on_iteration=lambda i, s, fits, e: raw_equals_used.append(
            all(a is b for a, b in zip(fits.raw_means, fits.means))
        ),
    )
    assert raw_equals_used == [True] * 3


def test_mrsf_result_has_two_level_sets():
    model = loader.get_model("mrsf")
    image = np.random.default_rng(4).uniform(0, 255, size=(16, 16))
    result = solver.run(
        model,
        image,
        PhaseInit(thresholds=(128.0,)),
        model.resolve_params({"max_iters": 2}),
    )
    assert len(result.phis) == 2
    assert len(result.masks) == 4
    np.testing.assert_array_equal(np.stack(result.masks).sum(axis=0), 1)


def test_early_stop_on_stable_mask():
    model = loader.get_model("rsf")
    image = np.full((16, 16), 120.0)
    result = solver.run(
        model,
        image,
        InitSpec((Shape.rectangle((4, 11), (4, 11)),)),
        model.resolve_params(
            {"nu": 0, "mu": 0, "early_stop": True, "patience": 4, "max_iters": 50}
        ),
    )
    assert result.iterations_run == 4
    assert len(result.energy_trace) == 4


def test_zero_iterations_returns_init(step_image):
    model = loader.get_model("rsf")
    result = solver.run(model, step_image, BOX, model.resolve_params({"max_iters": 0}))
    assert result.iterations_run == 0
    assert result.energy_trace.size == 0
    np.testing.assert_array_equal(result.mask, BOX.region(step_image.shape))


def test_snapshots(step_image):
    model = loader.get_model("rsf")
    result = solver.run(
        model,
        step_image,
        BOX,
        model.resolve_params({"max_iters": 5}),
        snapshots=(2, 5, 40),
    )
    assert sorted(result.snapshots) == [2, 5]
    np.testing.assert_array_equal(result.snapshots[5][0], result.mask)


def test_default_params(step_image):
    params = loader.get_model("lif").resolve_params({"max_iters": 1})
    result = solver.run("lif", step_image, BOX, params)
    assert result.iterations_run == 1
    assert result.model == "lif"
    with pytest.raises(ConfigError):
        solver.run("nope", step_image, BOX)


def test_divergence_reported():
    with pytest.raises(NumericalDivergenceError) as e:
        solver.run(NaNModel(at=2), np.zeros((8, 8)), InitSpec(), None)

    assert e.value.model == "nan"
    assert e.value.iteration == 2
    assert "diverged at iteration 2" in str(e.value)


def test_non_finite_energy_reported():
    with pytest.raises(NumericalDivergenceError) as e:
        solver.run(NaNModel(at=1, energy=True), np.zeros((8, 8)), InitSpec())

    assert e.value.iteration == 1


def test_bad_inputs(step_image):
    with pytest.raises(ParameterError):
        solver.run("rsf", np.full((8, 8), np.nan), InitSpec())

    with pytest.raises(ConfigError):
        solver.run("rsf", step_image, PhaseInit())

    with pytest.raises(ParameterError):
        solver.run(
            "rsf",
            np.zeros((8, 8)),
            InitSpec((Shape.rectangle((0, 9), (0, 2)),)),
        )


def test_levelset_helpers():
    ls = LevelSet(np.array([[1.0, -1.0]]))
    model = loader.get_model("rsf")
    assert model.levelsets(ls)[0] is ls
    np.testing.assert_array_equal(model.masks(ls)[0], [[False, True]])
