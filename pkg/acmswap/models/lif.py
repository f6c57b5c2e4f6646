"""Local image fitting energy"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import typing

import numpy as np

from .. import loader
from ..field import GaussianKernel
from ..fitting import fit_means
from ..levelset import LevelSet, regularize_phi
from ..swap import swap_pair
from ..types import ScalarField2D

logger = logging.getLogger(__name__)


def lif_fits(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
) -> loader.Fits:
    raw = fit_means(image, phi.heaviside(), kernel)
    return loader.Fits(tuple(raw), tuple(swap_pair(raw, params.polarity)))


def fitted_image(phi: LevelSet, fits: loader.Fits) -> ScalarField2D:
    """m₁·H(φ) + m₂·(1 − H(φ))"""
    m1, m2 = fits.means
    heaviside = phi.heaviside()
    return m1 * heaviside + m2 * (1 - heaviside)


def lif_data_force(
    phi: LevelSet,
    image: ScalarField2D,
    fits: loader.Fits,
) -> ScalarField2D:
    """δ(φ)·(I − I_fit)·(m₁ − m₂)"""
    m1, m2 = fits.means
    return phi.dirac() * (image - fitted_image(phi, fits)) * (m1 - m2)


def lif_step(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> LevelSet:
    if fits is None:
        fits = lif_fits(phi, image, params, kernel)

    moved = phi.evolve(phi.phi + params.dt * lif_data_force(phi, image, fits))
    return regularize_phi(moved, params.reg_size, params.reg_variance)


def lif_energy(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> float:
    if fits is None:
        fits = lif_fits(phi, image, params, kernel)

    return float(0.5 * np.sum((image - fitted_image(phi, fits)) ** 2))


class LIFModel(loader.TwoPhaseModel):
    """Local image fitting with Gaussian regularization of the level set"""

    strings = {"name": "lif"}

    def __init__(self):
        self.config = loader.ModuleConfig(
            loader.positive("c0", 2.0, "Binary step height"),
            loader.positive("sigma", 3.0, "Local region scale"),
            loader.positive("epsilon", 1.0, "Heaviside regularization width"),
            loader.positive("dt", 0.01, "Time step"),
            loader.ConfigValue(
                "reg_size",
                5,
                "Window of the level set smoothing kernel",
                validator=loader.validators.Choice([1, 3, 5, 7, 9]),
            ),
            loader.positive("reg_variance", 0.5, "Variance of the smoothing kernel"),
            *loader.solver_options(),
        )

    def fit(self, state, image, params, kernel) -> loader.Fits:
        return lif_fits(state, image, params, kernel)

    def step(self, state, image, params, kernel, fits) -> LevelSet:
        return lif_step(state, image, params, kernel, fits)

    def energy(self, state, image, params, kernel, fits) -> float:
        return lif_energy(state, image, params, kernel, fits)
