"""Level set representation, binary-step initialization and regularization"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import math
import typing
from dataclasses import dataclass

import numpy as np
from skimage import draw

from .field import GaussianKernel, convolve, curvature, gradient, laplacian
from .field import make_gaussian_kernel
from .types import Mask, ParameterError, ScalarField2D

logger = logging.getLogger(__name__)

ArrayLike = typing.Union[float, np.ndarray]


def heaviside_eps(x: ArrayLike, epsilon: float) -> ArrayLike:
    """½(1 + (2/π)·arctan(x/ε))"""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")

    return 0.5 * (1 + (2 / np.pi) * np.arctan(np.divide(x, epsilon)))


def dirac_eps(x: ArrayLike, epsilon: float) -> ArrayLike:
    """ε / (π(ε² + x²)), derivative of `heaviside_eps`"""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")

    return epsilon / (np.pi * (epsilon**2 + np.square(x)))


@dataclass(frozen=True)
class LevelSet:
    phi: ScalarField2D
    epsilon: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")

        # Finiteness is checked by the solver
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 2 or 0 in phi.shape:
            raise ParameterError(f"phi must be a non-empty 2-D grid, got {phi.shape}")

        object.__setattr__(self, "phi", phi)

    @property
    def shape(self) -> typing.Tuple[int, int]:
        return self.phi.shape

    def heaviside(self) -> ScalarField2D:
        return heaviside_eps(self.phi, self.epsilon)

    def dirac(self) -> ScalarField2D:
        return dirac_eps(self.phi, self.epsilon)

    def mask(self) -> Mask:
        return extract_mask(self)

    def evolve(self, phi: ScalarField2D) -> "LevelSet":
        return LevelSet(phi, self.epsilon)


@dataclass(frozen=True)
class Shape:
    """
    Seed region. Rectangles use inclusive `rows` / `cols` ranges,
    circles use `center` as `(row, col)`
    """

    kind: str
    rows: typing.Tuple[int, int] = (0, 0)
    cols: typing.Tuple[int, int] = (0, 0)
    center: typing.Tuple[int, int] = (0, 0)
    radius: float = 0.0

    @classmethod
    def rectangle(cls, rows: typing.Sequence[int], cols: typing.Sequence[int]):
        return cls("rectangle", rows=tuple(rows), cols=tuple(cols))

    @classmethod
    def circle(cls, center: typing.Sequence[int], radius: float):
        return cls("circle", center=tuple(center), radius=float(radius))

    @classmethod
    def from_dict(cls, data: dict) -> "Shape":
        if data["kind"] == "rectangle":
            return cls.rectangle(data["rows"], data["cols"])

        return cls.circle(data["center"], data["radius"])

    def to_dict(self) -> dict:
        if self.kind == "rectangle":
            return {"kind": self.kind, "rows": list(self.rows), "cols": list(self.cols)}

        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}

    def within(self, dims: typing.Tuple[int, int]) -> bool:
        height, width = dims
        if self.kind == "rectangle":
            return (
                0 <= self.rows[0] <= self.rows[1] < height
                and 0 <= self.cols[0] <= self.cols[1] < width
            )

        row, col = self.center
        return (
            self.radius > 0
            and row - self.radius >= 0
            and col - self.radius >= 0
            and row + self.radius <= height - 1
            and col + self.radius <= width - 1
        )

    def rasterize(self, dims: typing.Tuple[int, int]) -> Mask:
        if not self.within(dims):
            raise ParameterError(f"Shape {self.to_dict()} exceeds grid {dims}")

        mask = np.zeros(dims, dtype=bool)
        if self.kind == "rectangle":
            rr, cc = draw.rectangle(
                (self.rows[0], self.cols[0]),
                end=(self.rows[1], self.cols[1]),
                shape=dims,
            )
        elif self.kind == "circle":
            rr, cc = draw.disk(self.center, self.radius, shape=dims)
        else:
            raise ParameterError(f"Unknown shape kind {self.kind}")

        mask[rr, cc] = True
        return mask


@dataclass(frozen=True)
class InitSpec:
    shapes: typing.Tuple[Shape, ...] = ()
    c0: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.c0) and self.c0 > 0):
            raise ParameterError(f"c0 must be positive, got {self.c0}")

        object.__setattr__(self, "shapes", tuple(self.shapes))

    def region(self, dims: typing.Tuple[int, int]) -> Mask:
        mask = np.zeros(dims, dtype=bool)
        for shape in self.shapes:
            mask |= shape.rasterize(dims)

        return mask


def init_binary_step(
    dims: typing.Tuple[int, int],
    spec: InitSpec,
    epsilon: float = 1.0,
) -> LevelSet:
    """
    −c₀ inside any seed shape, +c₀ elsewhere
    :raises ParameterError: If a shape leaves the grid
    """
    return LevelSet(np.where(spec.region(dims), -spec.c0, spec.c0), epsilon)


def extract_mask(ls: LevelSet) -> Mask:
    return ls.phi < 0


def regularization_kernel(size: int = 5, variance: float = 0.5) -> GaussianKernel:
    """Truncated `size`×`size` Gaussian of the given variance, renormalized"""
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"Regularization window must be odd, got {size}")

    return make_gaussian_kernel(math.sqrt(variance), radius=size // 2)


def regularize_phi(ls: LevelSet, size: int = 5, variance: float = 0.5) -> LevelSet:
    return ls.evolve(convolve(ls.phi, regularization_kernel(size, variance)))


def length_force(ls: LevelSet, nu: float, mu: float) -> ScalarField2D:
    """ν·δ(φ)·κ + μ·(∇²φ − κ): length shortening plus distance regularization"""
    kappa = curvature(ls.phi)
    return nu * ls.dirac() * kappa + mu * (laplacian(ls.phi) - kappa)


def length_energy(ls: LevelSet, nu: float, mu: float) -> float:
    """
    ν·Σ|∇H(φ)| + μ·Σ½(|∇φ| − 1)²
    The length is summed on H(φ), which equals δ(φ)|∇φ| for smooth φ and
    gives H(φ⁺) − H(φ⁻) across an interface whatever its width
    """
    hx, hy = gradient(ls.heaviside())
    gx, gy = gradient(ls.phi)
    norm = np.sqrt(gx**2 + gy**2)
    return float(
        nu * np.sum(np.sqrt(hx**2 + hy**2)) + mu * np.sum(0.5 * (norm - 1) ** 2)
    )
