"""Four-phase region-scalable fitting"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import typing

import numpy as np

from .. import loader
from ..levelset import LevelSet
from ..multiphase import EXCHANGES, PhaseInit, PhaseSet, exchange_fits
from ..multiphase import init_phases_from_shapes, init_phases_from_thresholds
from ..multiphase import mrsf_energy, mrsf_fit, mrsf_step, phase_contour
from ..multiphase import unordered_pixels
from ..types import ConfigError, Mask

logger = logging.getLogger(__name__)


class MRSFModel(loader.Model):
    """
    Two level sets partition the image into four phases.
    A single `lambda1` weights every phase
    """

    strings = {"name": "mrsf"}
    phases = 4

    def __init__(self):
        self.config = loader.ModuleConfig(
            loader.positive("c0", 2.0, "Binary step height"),
            loader.positive("sigma", 3.0, "Local region scale"),
            loader.positive("epsilon", 1.0, "Heaviside regularization width"),
            loader.positive("lambda1", 1.0, "Weight of every phase fit"),
            loader.positive("mu", 1.0, "Distance regularization", allow_zero=True),
            loader.positive("nu", 0.001 * 255**2, "Length term", allow_zero=True),
            loader.positive("dt", 0.1, "Time step"),
            loader.ConfigValue(
                "exchange",
                "lattice",
                "How fitting values are exchanged between the four phases",
                validator=loader.validators.Choice(EXCHANGES),
            ),
            *loader.solver_options(),
        )

    def init_state(self, image, init: PhaseInit, params) -> PhaseSet:
        if not isinstance(init, PhaseInit):
            raise ConfigError(
                f"{self.name} expects two level set initialization, got"
                f" {type(init).__name__}"
            )

        if init.thresholds:
            return init_phases_from_thresholds(
                image,
                init.thresholds,
                params.c0,
                params.epsilon,
            )

        return init_phases_from_shapes(image.shape, init, params.c0, params.epsilon)

    def fit(self, state: PhaseSet, image, params, kernel) -> loader.Fits:
        raw = mrsf_fit(image, state, kernel)
        return loader.Fits(raw, exchange_fits(raw, params.polarity, params.exchange))

    def step(self, state, image, params, kernel, fits) -> PhaseSet:
        return mrsf_step(state, image, params, kernel, fits.means)

    def energy(self, state, image, params, kernel, fits) -> float:
        return mrsf_energy(state, image, params, kernel, fits.means)

    def levelsets(self, state: PhaseSet) -> typing.Tuple[LevelSet, ...]:
        return state.phi_a, state.phi_b

    def masks(self, state: PhaseSet) -> typing.Tuple[Mask, ...]:
        return state.masks()

    def reversed_fraction(self, state, fits: loader.Fits, params) -> float:
        edge = phase_contour(state)
        if not np.any(edge):
            return 0.0

        unordered = unordered_pixels(fits.raw_means, params.polarity, params.exchange)
        return float(np.mean(unordered[edge]))
