"""Local Gaussian distribution fitting energy"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import typing

import numpy as np

from .. import loader
from ..field import GaussianKernel
from ..fitting import FitKind, FittingPair, fit_means, fit_variances, lgdf_e_terms
from ..levelset import LevelSet, length_energy, length_force
from ..swap import swap_lgdf
from ..types import ScalarField2D

logger = logging.getLogger(__name__)


def lgdf_fits(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
) -> loader.Fits:
    heaviside = phi.heaviside()
    means = fit_means(image, heaviside, kernel)
    variances = fit_variances(image, heaviside, means, kernel)
    swapped_means, swapped_variances = swap_lgdf(
        means,
        variances,
        params.polarity,
        paired=params.pair_variances,
    )
    return loader.Fits(
        tuple(means),
        tuple(swapped_means),
        tuple(variances),
        tuple(swapped_variances),
    )


def _e_terms(
    image: ScalarField2D,
    kernel: GaussianKernel,
    fits: loader.Fits,
) -> typing.Tuple[ScalarField2D, ScalarField2D]:
    return lgdf_e_terms(
        image,
        FittingPair(*fits.means),
        FittingPair(*fits.variances, FitKind.VARIANCES),
        kernel,
    )


def lgdf_data_force(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: loader.Fits,
) -> ScalarField2D:
    """−δ(φ)·(λ₁ē₁ − λ₂ē₂)"""
    e1, e2 = _e_terms(image, kernel, fits)
    return -phi.dirac() * (params.lambda1 * e1 - params.lambda2 * e2)


def lgdf_data_energy(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: loader.Fits,
) -> float:
    e1, e2 = _e_terms(image, kernel, fits)
    heaviside = phi.heaviside()
    return float(
        np.sum(params.lambda1 * heaviside * e1 + params.lambda2 * (1 - heaviside) * e2)
    )


def lgdf_step(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> LevelSet:
    if fits is None:
        fits = lgdf_fits(phi, image, params, kernel)

    force = lgdf_data_force(phi, image, params, kernel, fits) + length_force(
        phi,
        params.nu,
        params.mu,
    )
    return phi.evolve(phi.phi + params.dt * force)


def lgdf_energy(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> float:
    if fits is None:
        fits = lgdf_fits(phi, image, params, kernel)

    return lgdf_data_energy(phi, image, params, kernel, fits) + length_energy(
        phi,
        params.nu,
        params.mu,
    )


class LGDFModel(loader.TwoPhaseModel):
    """Local Gaussian distribution fitting, negative log-likelihood descent"""

    strings = {"name": "lgdf"}

    def __init__(self):
        self.config = loader.ModuleConfig(
            loader.positive("c0", 2.0, "Binary step height"),
            loader.positive("sigma", 3.0, "Local region scale"),
            loader.positive("epsilon", 1.0, "Heaviside regularization width"),
            loader.positive("lambda1", 1.0, "Weight of the positive side fit"),
            loader.positive("lambda2", 1.0, "Weight of the negative side fit"),
            loader.positive("mu", 0.01, "Distance regularization", allow_zero=True),
            loader.positive("nu", 1.0, "Length term", allow_zero=True),
            loader.positive("dt", 1.0, "Time step"),
            loader.ConfigValue(
                "pair_variances",
                True,
                "Exchange each variance together with its mean",
                validator=loader.validators.Boolean(),
            ),
            *loader.solver_options(),
        )

    def fit(self, state, image, params, kernel) -> loader.Fits:
        return lgdf_fits(state, image, params, kernel)

    def step(self, state, image, params, kernel, fits) -> LevelSet:
        return lgdf_step(state, image, params, kernel, fits)

    def energy(self, state, image, params, kernel, fits) -> float:
        return lgdf_energy(state, image, params, kernel, fits)
