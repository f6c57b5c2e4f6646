"""Dense 2-D fields: Gaussian kernels, convolution, differential operators, image I/O"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import math
import os
import typing
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .types import ImageIOError, ParameterError, ScalarField2D

logger = logging.getLogger(__name__)

CURVATURE_ETA = 1e-10


@dataclass(frozen=True)
class GaussianKernel:
    sigma: float
    radius: int
    weights1d: np.ndarray

    def __post_init__(self):
        if self.weights1d.ndim != 1 or self.weights1d.size != 2 * self.radius + 1:
            raise ParameterError(
                f"Kernel of radius {self.radius} needs {2 * self.radius + 1} weights,"
                f" got {self.weights1d.size}"
            )

        if not np.all(self.weights1d > 0):
            raise ParameterError("Kernel weights must be strictly positive")

        self.weights1d.setflags(write=False)

    @property
    def weights2d(self) -> np.ndarray:
        return np.outer(self.weights1d, self.weights1d)


def make_gaussian_kernel(
    sigma: float,
    radius: typing.Optional[int] = None,
) -> GaussianKernel:
    """
    Sampled Gaussian, normalized so that its separable 2-D product sums to 1
    :param sigma: Standard deviation in pixels
    :param radius: Truncation radius, `ceil(2σ)` if not passed
    :return: Kernel
    """
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and sigma > 0):
        raise ParameterError(f"Kernel sigma must be positive, got {sigma}")

    if radius is None:
        radius = math.ceil(2 * sigma)
    elif radius < 0:
        raise ParameterError(f"Kernel radius must be non-negative, got {radius}")

    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (2 * sigma**2))
    return GaussianKernel(float(sigma), int(radius), weights / weights.sum())


def as_field(values: typing.Any, name: str = "field") -> ScalarField2D:
    """Converts anything array-like to a finite float64 2-D field"""
    field = np.asarray(values, dtype=np.float64)
    if field.ndim != 2 or 0 in field.shape:
        raise ParameterError(f"{name} must be a non-empty 2-D grid, got {field.shape}")

    if not np.all(np.isfinite(field)):
        raise ParameterError(f"{name} contains non-finite values")

    return field


def convolve(field: ScalarField2D, kernel: GaussianKernel) -> ScalarField2D:
    """Separable convolution, horizontal pass first, replicate boundary"""
    rows = ndimage.convolve1d(
        np.asarray(field, dtype=np.float64),
        kernel.weights1d,
        axis=1,
        mode="nearest",
    )
    return ndimage.convolve1d(rows, kernel.weights1d, axis=0, mode="nearest")


def gradient(field: ScalarField2D) -> typing.Tuple[ScalarField2D, ScalarField2D]:
    """
    Central differences inside, one-sided at the border
    :return: `(gx, gy)`, derivatives along columns and rows
    """
    if min(field.shape) < 2:
        raise ParameterError(f"Gradient needs at least 2×2 grid, got {field.shape}")

    gy, gx = np.gradient(field)
    return gx, gy


def curvature(phi: ScalarField2D, eta: float = CURVATURE_ETA) -> ScalarField2D:
    """Divergence of the normalized gradient"""
    gx, gy = gradient(phi)
    norm = np.sqrt(gx**2 + gy**2 + eta)
    nxx, _ = gradient(gx / norm)
    _, nyy = gradient(gy / norm)
    return nxx + nyy


def laplacian(field: ScalarField2D) -> ScalarField2D:
    return ndimage.laplace(np.asarray(field, dtype=np.float64), mode="nearest")


def contour_pixels(phi: ScalarField2D) -> np.ndarray:
    """Pixels whose sign (φ < 0) differs from one of their 4-neighbours"""
    inside = phi < 0
    edge = np.zeros_like(inside)
    edge[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    edge[:, 1:] |= inside[:, 1:] != inside[:, :-1]
    edge[:-1, :] |= inside[:-1, :] != inside[1:, :]
    edge[1:, :] |= inside[1:, :] != inside[:-1, :]
    return edge


def load_image(path: typing.Union[str, os.PathLike]) -> ScalarField2D:
    """
    Reads 8-bit grayscale PGM (P5 / P2) or PNG
    :param path: Image path
    :return: Field with intensities in [0, 255]
    :raises ImageIOError: If file is missing, unsupported or empty
    """
    try:
        with Image.open(path) as image:
            if image.format not in {"PPM", "PNG"}:
                raise ImageIOError(path, f"unsupported format {image.format}")

            if image.mode not in {"L", "P", "1"}:
                raise ImageIOError(path, f"not a grayscale image (mode {image.mode})")

            if image.mode == "P":
                image = image.convert("L")

            values = np.asarray(image, dtype=np.float64)
    except ImageIOError:
        raise
    except FileNotFoundError:
        raise ImageIOError(path, "file does not exist")
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as e:
        raise ImageIOError(path, str(e) or type(e).__name__)

    if values.ndim != 2 or 0 in values.shape:
        raise ImageIOError(path, f"empty or non-2-D image {values.shape}")

    if image.mode == "1":
        values = values * 255

    logger.debug("Loaded %s: %sx%s", path, values.shape[1], values.shape[0])
    return values


def save_image(field: ScalarField2D, path: typing.Union[str, os.PathLike]):
    """Writes field as binary PGM (P5), clamped to [0, 255] and rounded"""
    values = np.clip(np.rint(np.asarray(field, dtype=np.float64)), 0, 255)
    try:
        Image.fromarray(values.astype(np.uint8)).save(path, format="PPM")
    except (OSError, ValueError) as e:
        raise ImageIOError(path, str(e) or type(e).__name__)
