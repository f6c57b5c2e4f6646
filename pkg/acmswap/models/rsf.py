"""Region-scalable fitting energy"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import typing

import numpy as np

from .. import loader
from ..field import GaussianKernel
from ..fitting import FittingPair, e_terms, fit_means
from ..levelset import LevelSet, length_energy, length_force
from ..swap import swap_pair
from ..types import ScalarField2D

logger = logging.getLogger(__name__)


def rsf_fits(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
) -> loader.Fits:
    raw = fit_means(image, phi.heaviside(), kernel)
    return loader.Fits(tuple(raw), tuple(swap_pair(raw, params.polarity)))


def rsf_data_force(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: loader.Fits,
) -> ScalarField2D:
    """−δ(φ)·(λ₁e₁ − λ₂e₂)"""
    e1, e2 = e_terms(image, FittingPair(*fits.means), kernel)
    return -phi.dirac() * (params.lambda1 * e1 - params.lambda2 * e2)


def rsf_data_energy(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: loader.Fits,
) -> float:
    e1, e2 = e_terms(image, FittingPair(*fits.means), kernel)
    heaviside = phi.heaviside()
    return float(
        np.sum(params.lambda1 * heaviside * e1 + params.lambda2 * (1 - heaviside) * e2)
    )


def rsf_step(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> LevelSet:
    if fits is None:
        fits = rsf_fits(phi, image, params, kernel)

    force = rsf_data_force(phi, image, params, kernel, fits) + length_force(
        phi,
        params.nu,
        params.mu,
    )
    return phi.evolve(phi.phi + params.dt * force)


def rsf_energy(
    phi: LevelSet,
    image: ScalarField2D,
    params: loader.ModelParams,
    kernel: GaussianKernel,
    fits: typing.Optional[loader.Fits] = None,
) -> float:
    if fits is None:
        fits = rsf_fits(phi, image, params, kernel)

    return rsf_data_energy(phi, image, params, kernel, fits) + length_energy(
        phi,
        params.nu,
        params.mu,
    )


class RSFModel(loader.TwoPhaseModel):
    """Region-scalable fitting with distance regularization"""

    strings = {"name": "rsf"}

    def __init__(self):
        self.config = loader.ModuleConfig(
            loader.positive("c0", 2.0, "Binary step height"),
            loader.positive("sigma", 3.0, "Local region scale"),
            loader.positive("epsilon", 1.0, "Heaviside regularization width"),
            loader.positive("lambda1", 1.0, "Weight of the positive side fit"),
            loader.positive("lambda2", 1.0, "Weight of the negative side fit"),
            loader.positive("mu", 1.0, "Distance regularization", allow_zero=True),
            loader.positive("nu", 0.001 * 255**2, "Length term", allow_zero=True),
            loader.positive("dt", 0.1, "Time step"),
            *loader.solver_options(),
        )

    def fit(self, state, image, params, kernel) -> loader.Fits:
        return rsf_fits(state, image, params, kernel)

    def step(self, state, image, params, kernel, fits) -> LevelSet:
        return rsf_step(state, image, params, kernel, fits)

    def energy(self, state, image, params, kernel, fits) -> float:
        return rsf_energy(state, image, params, kernel, fits)
