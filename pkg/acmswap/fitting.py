"""Local fitting statistics on both sides of the contour"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import enum
import typing
from dataclasses import dataclass

import numpy as np

from .field import GaussianKernel, convolve
from .types import ScalarField2D

DENOMINATOR_FLOOR = 1e-10
VARIANCE_FLOOR = 1e-4


class FitKind(enum.Enum):
    MEANS = "means"
    VARIANCES = "variances"


@dataclass(frozen=True)
class FittingPair:
    """
    `side1` fits the positive side of φ (where H(φ)≈1),
    `side2` fits the negative side
    """

    side1: ScalarField2D
    side2: ScalarField2D
    kind: FitKind = FitKind.MEANS

    def __iter__(self):
        yield self.side1
        yield self.side2

    def __len__(self) -> int:
        return 2

    def __getitem__(self, index: int) -> ScalarField2D:
        return (self.side1, self.side2)[index]


def weighted_mean(
    image: ScalarField2D,
    weight: ScalarField2D,
    kernel: GaussianKernel,
) -> ScalarField2D:
    """K*(w·I) / K*w with the denominator floored"""
    return convolve(weight * image, kernel) / np.maximum(
        convolve(weight, kernel),
        DENOMINATOR_FLOOR,
    )


def weighted_variance(
    image: ScalarField2D,
    weight: ScalarField2D,
    mean: ScalarField2D,
    kernel: GaussianKernel,
) -> ScalarField2D:
    """Local spread of `image` about `mean`, expanded into three convolutions"""
    mass = convolve(weight, kernel)
    spread = (
        convolve(weight * image**2, kernel)
        - 2 * mean * convolve(weight * image, kernel)
        + mean**2 * mass
    )
    return np.maximum(spread / np.maximum(mass, DENOMINATOR_FLOOR), VARIANCE_FLOOR)


def squared_residual(
    image: ScalarField2D,
    fit: ScalarField2D,
    kernel: GaussianKernel,
) -> ScalarField2D:
    """e(x) = Σ_y K(y−x)·(I(x) − f(y))²"""
    return (
        image**2 * convolve(np.ones_like(image), kernel)
        - 2 * image * convolve(fit, kernel)
        + convolve(fit**2, kernel)
    )


def fit_means(
    image: ScalarField2D,
    heaviside: ScalarField2D,
    kernel: GaussianKernel,
) -> FittingPair:
    return FittingPair(
        weighted_mean(image, heaviside, kernel),
        weighted_mean(image, 1 - heaviside, kernel),
        FitKind.MEANS,
    )


def fit_variances(
    image: ScalarField2D,
    heaviside: ScalarField2D,
    means: FittingPair,
    kernel: GaussianKernel,
) -> FittingPair:
    return FittingPair(
        weighted_variance(image, heaviside, means.side1, kernel),
        weighted_variance(image, 1 - heaviside, means.side2, kernel),
        FitKind.VARIANCES,
    )


def e_terms(
    image: ScalarField2D,
    pair: FittingPair,
    kernel: GaussianKernel,
) -> typing.Tuple[ScalarField2D, ScalarField2D]:
    return (
        squared_residual(image, pair.side1, kernel),
        squared_residual(image, pair.side2, kernel),
    )


def gaussian_residual(
    image: ScalarField2D,
    mean: ScalarField2D,
    variance: ScalarField2D,
    kernel: GaussianKernel,
) -> ScalarField2D:
    """e(x) = Σ_y K(y−x)·[log σ(y) + (u(y) − I(x))² / (2σ²(y))]"""
    return (
        convolve(0.5 * np.log(variance) + mean**2 / (2 * variance), kernel)
        - image * convolve(mean / variance, kernel)
        + image**2 * convolve(1 / (2 * variance), kernel)
    )


def lgdf_e_terms(
    image: ScalarField2D,
    means: FittingPair,
    variances: FittingPair,
    kernel: GaussianKernel,
) -> typing.Tuple[ScalarField2D, ScalarField2D]:
    return (
        gaussian_residual(image, means.side1, variances.side1, kernel),
        gaussian_residual(image, means.side2, variances.side2, kernel),
    )
