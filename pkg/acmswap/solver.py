"""Shared evolution loop of every model"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import math
import time
import typing
from dataclasses import dataclass, field

import numpy as np

from . import loader
from .field import as_field, make_gaussian_kernel
from .levelset import LevelSet
from .swap import Polarity
from .types import Mask, NumericalDivergenceError

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 50

IterationCallback = typing.Callable[[int, typing.Any, loader.Fits, float], None]


@dataclass(frozen=True)
class RunResult:
    model: str
    polarity: Polarity
    phis: typing.Tuple[LevelSet, ...]
    masks: typing.Tuple[Mask, ...]
    energy_trace: np.ndarray
    reversed_trace: np.ndarray
    iterations_run: int
    elapsed: float
    snapshots: typing.Dict[int, typing.Tuple[Mask, ...]] = field(default_factory=dict)

    @property
    def final_phi(self) -> LevelSet:
        return self.phis[0]

    @property
    def mask(self) -> Mask:
        return self.masks[0]


def _check_finite(model: loader.Model, state, iteration: int):
    if not all(np.all(np.isfinite(ls.phi)) for ls in model.levelsets(state)):
        raise NumericalDivergenceError(model.name, iteration)


def run(
    model: typing.Union[str, loader.Model],
    image: np.ndarray,
    init: typing.Any,
    params: typing.Optional[loader.ModelParams] = None,
    *,
    on_iteration: typing.Optional[IterationCallback] = None,
    snapshots: typing.Iterable[int] = (),
) -> RunResult:
    """
    Evolves level sets from the initialization
    :param model: Model name or instance
    :param image: Grayscale image, intensities in [0, 255]
    :param init: `InitSpec` for single level set models, `PhaseInit` for mrsf
    :param params: Parameters, model defaults if not passed
    :param on_iteration: Called after each step with
                         `(iteration, new_state, fits, energy)`
    :param snapshots: Iteration counts after which masks are kept
    :return: Run result
    :raises NumericalDivergenceError: If level set becomes non-finite
    """
    model = loader.get_model(model)
    if params is None:
        params = model.resolve_params()

    image = as_field(image, "image")
    kernel = make_gaussian_kernel(params.sigma)
    snapshots = set(snapshots)

    started = time.perf_counter()
    state = model.init_state(image, init, params)
    masks = model.masks(state)
    energies, reversed_shares, kept = [], [], {}
    stable = 0

    for iteration in range(params.max_iters):
        fits = model.fit(state, image, params, kernel)
        energy = model.energy(state, image, params, kernel, fits)
        if not math.isfinite(energy):
            raise NumericalDivergenceError(model.name, iteration)

        energies.append(energy)
        reversed_shares.append(model.reversed_fraction(state, fits, params))

        state = model.step(state, image, params, kernel, fits)
        _check_finite(model, state, iteration)

        if on_iteration is not None:
            on_iteration(iteration, state, fits, energy)

        new_masks = model.masks(state)
        if iteration + 1 in snapshots:
            kept[iteration + 1] = new_masks

        if all(np.array_equal(old, new) for old, new in zip(masks, new_masks)):
            stable += 1
        else:
            stable = 0

        masks = new_masks

        if not (iteration + 1) % PROGRESS_EVERY:
            logger.debug(
                "%s [%s] iteration %d: energy %.6g, reversed %.3f",
                model.name,
                params.polarity.value,
                iteration + 1,
                energy,
                reversed_shares[-1],
            )

        if params.early_stop and stable >= params.patience:
            logger.debug(
                "%s stopped early after %d iterations", model.name, iteration + 1
            )
            break

    elapsed = time.perf_counter() - started
    logger.info(
        "%s [%s] finished %d iterations in %.2fs",
        model.name,
        params.polarity.value,
        len(energies),
        elapsed,
    )

    return RunResult(
        model=model.name,
        polarity=params.polarity,
        phis=model.levelsets(state),
        masks=masks,
        energy_trace=np.asarray(energies, dtype=np.float64),
        reversed_trace=np.asarray(reversed_shares, dtype=np.float64),
        iterations_run=len(energies),
        elapsed=elapsed,
        snapshots=kept,
    )
