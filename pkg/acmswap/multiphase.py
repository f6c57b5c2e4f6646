"""Four-phase region-scalable fitting with two level sets"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import math
import typing
from dataclasses import dataclass, field

import numpy as np

from .field import GaussianKernel, contour_pixels
from .fitting import squared_residual, weighted_mean
from .levelset import InitSpec, LevelSet, init_binary_step
from .levelset import length_energy, length_force
from .swap import Polarity
from .types import Mask, ParameterError, ScalarField2D

logger = logging.getLogger(__name__)

Phases = typing.Tuple[ScalarField2D, ScalarField2D, ScalarField2D, ScalarField2D]

# Intensity class → phase index (M₁..M₄ as 0..3) for 1, 2 and 3 cut levels
THRESHOLD_PHASES = {1: (0, 3), 2: (0, 2, 3), 3: (0, 1, 2, 3)}

# Phase pairs split by φ_b, then by φ_a
LATTICE_PAIRS = (((0, 1), (2, 3)), ((0, 2), (1, 3)))
EXCHANGES = ["lattice", "sort"]


def memberships(ha: ScalarField2D, hb: ScalarField2D) -> Phases:
    """M₁ = HaHb, M₂ = Ha(1−Hb), M₃ = (1−Ha)Hb, M₄ = (1−Ha)(1−Hb)"""
    return ha * hb, ha * (1 - hb), (1 - ha) * hb, (1 - ha) * (1 - hb)


@dataclass(frozen=True)
class PhaseSet:
    phi_a: LevelSet
    phi_b: LevelSet

    def __post_init__(self):
        if self.phi_a.shape != self.phi_b.shape:
            raise ParameterError(
                f"Level sets differ in shape: {self.phi_a.shape} / {self.phi_b.shape}"
            )

    @property
    def shape(self) -> typing.Tuple[int, int]:
        return self.phi_a.shape

    def memberships(self) -> Phases:
        return memberships(self.phi_a.heaviside(), self.phi_b.heaviside())

    def masks(self) -> typing.Tuple[Mask, Mask, Mask, Mask]:
        """Crisp phases, same order as `memberships`"""
        a, b = self.phi_a.phi >= 0, self.phi_b.phi >= 0
        return a & b, a & ~b, ~a & b, ~a & ~b


@dataclass(frozen=True)
class PhaseInit:
    """
    Initialization of both level sets, either from seed shapes
    or from 1 to 3 ascending intensity cut levels
    """

    a: InitSpec = field(default_factory=InitSpec)
    b: InitSpec = field(default_factory=InitSpec)
    thresholds: typing.Tuple[float, ...] = ()

    def __post_init__(self):
        thresholds = tuple(float(value) for value in self.thresholds)
        if len(thresholds) > 3:
            raise ParameterError(f"At most 3 thresholds allowed, got {len(thresholds)}")

        if any(not math.isfinite(value) for value in thresholds) or list(
            thresholds
        ) != sorted(set(thresholds)):
            raise ParameterError(
                f"Thresholds must be finite and strictly ascending, got {thresholds}"
            )

        object.__setattr__(self, "thresholds", thresholds)


def init_phases_from_shapes(
    dims: typing.Tuple[int, int],
    init: PhaseInit,
    c0: float,
    epsilon: float = 1.0,
) -> PhaseSet:
    return PhaseSet(
        init_binary_step(dims, InitSpec(init.a.shapes, c0), epsilon),
        init_binary_step(dims, InitSpec(init.b.shapes, c0), epsilon),
    )


def init_phases_from_thresholds(
    image: ScalarField2D,
    thresholds: typing.Sequence[float],
    c0: float,
    epsilon: float = 1.0,
) -> PhaseSet:
    """
    Intensity classes (`I ≤ t₁`, `t₁ < I ≤ t₂`, ...) are mapped to phases
    from darkest to brightest, so with two cuts φ_a is negative above t₁
    and φ_b is negative above t₂
    """
    if not 1 <= len(thresholds) <= 3:
        raise ParameterError(f"Need 1 to 3 thresholds, got {len(thresholds)}")

    classes = np.digitize(image, np.asarray(thresholds, dtype=np.float64), right=True)
    phase = np.asarray(THRESHOLD_PHASES[len(thresholds)])[classes]
    a_negative = phase >= 2
    b_negative = (phase == 1) | (phase == 3)
    return PhaseSet(
        LevelSet(np.where(a_negative, -c0, c0), epsilon),
        LevelSet(np.where(b_negative, -c0, c0), epsilon),
    )


def mrsf_fit(
    image: ScalarField2D,
    phases: PhaseSet,
    kernel: GaussianKernel,
) -> Phases:
    return tuple(
        weighted_mean(image, membership, kernel)
        for membership in phases.memberships()
    )


def mrsf_swap(fits: typing.Sequence[ScalarField2D], polarity: Polarity) -> Phases:
    """
    Sorts the four fitting values at each pixel.
    `bright_object` gives the darkest value to M₁, `dark_object` the brightest
    """
    if polarity is Polarity.OFF:
        return tuple(fits)

    ordered = np.sort(np.stack(fits), axis=0, kind="stable")
    if polarity is Polarity.DARK_OBJECT:
        ordered = ordered[::-1]

    return tuple(ordered)


def mrsf_lattice_swap(
    fits: typing.Sequence[ScalarField2D],
    polarity: Polarity,
) -> Phases:
    """
    Exchanges fitting values only across a single level set:
    first the pairs split by φ_b (M₁/M₂, M₃/M₄), then the pairs split by φ_a
    (M₁/M₃, M₂/M₄). The negative side of each level set gets the larger value
    for `bright_object` and the smaller one for `dark_object`.
    M₂ and M₃ are never compared
    """
    if polarity is Polarity.OFF:
        return tuple(fits)

    low, high = np.minimum, np.maximum
    if polarity is Polarity.DARK_OBJECT:
        low, high = high, low

    fits = list(fits)
    for pairs in LATTICE_PAIRS:
        for first, second in pairs:
            fits[first], fits[second] = (
                low(fits[first], fits[second]),
                high(fits[first], fits[second]),
            )

    return tuple(fits)


def exchange_fits(
    fits: typing.Sequence[ScalarField2D],
    polarity: Polarity,
    exchange: str = "lattice",
) -> Phases:
    if exchange == "sort":
        return mrsf_swap(fits, polarity)

    if exchange == "lattice":
        return mrsf_lattice_swap(fits, polarity)

    raise ParameterError(f"Unknown exchange {exchange}, expected one of {EXCHANGES}")


def unordered_pixels(
    fits: typing.Sequence[ScalarField2D],
    polarity: Polarity,
    exchange: str = "sort",
) -> Mask:
    """
    Pixels whose fits break the order the exchange enforces,
    `bright_object` order for `off`
    """
    stacked = np.stack(tuple(fits))
    if exchange == "lattice":
        steps = np.stack(
            [
                stacked[second] - stacked[first]
                for pairs in LATTICE_PAIRS
                for first, second in pairs
            ]
        )
    else:
        steps = np.diff(stacked, axis=0)

    if polarity is Polarity.DARK_OBJECT:
        return np.any(steps > 0, axis=0)

    return np.any(steps < 0, axis=0)


def mrsf_e_terms(
    image: ScalarField2D,
    fits: typing.Sequence[ScalarField2D],
    kernel: GaussianKernel,
) -> Phases:
    return tuple(squared_residual(image, fit, kernel) for fit in fits)


def mrsf_data_force(
    phases: PhaseSet,
    e: Phases,
    lambda_: float = 1.0,
) -> typing.Tuple[ScalarField2D, ScalarField2D]:
    """
    −δ(φ_a)·[(e₁−e₃)Hb + (e₂−e₄)(1−Hb)] and
    −δ(φ_b)·[(e₁−e₂)Ha + (e₃−e₄)(1−Ha)]
    """
    ha, hb = phases.phi_a.heaviside(), phases.phi_b.heaviside()
    e1, e2, e3, e4 = e
    force_a = -phases.phi_a.dirac() * ((e1 - e3) * hb + (e2 - e4) * (1 - hb))
    force_b = -phases.phi_b.dirac() * ((e1 - e2) * ha + (e3 - e4) * (1 - ha))
    return lambda_ * force_a, lambda_ * force_b


def mrsf_data_energy(phases: PhaseSet, e: Phases, lambda_: float = 1.0) -> float:
    return float(
        lambda_
        * sum(
            np.sum(membership * term)
            for membership, term in zip(phases.memberships(), e)
        )
    )


def mrsf_step(
    phases: PhaseSet,
    image: ScalarField2D,
    params,
    kernel: GaussianKernel,
    fits: typing.Optional[Phases] = None,
) -> PhaseSet:
    """
    :param params: Model parameters, `lambda1` weights every phase
    :param fits: Fitting fields fed to the flow, computed and exchanged if not passed
    """
    if fits is None:
        fits = exchange_fits(
            mrsf_fit(image, phases, kernel),
            params.polarity,
            params.exchange,
        )

    force_a, force_b = mrsf_data_force(
        phases,
        mrsf_e_terms(image, fits, kernel),
        params.lambda1,
    )
    return PhaseSet(
        phases.phi_a.evolve(
            phases.phi_a.phi
            + params.dt
            * (force_a + length_force(phases.phi_a, params.nu, params.mu))
        ),
        phases.phi_b.evolve(
            phases.phi_b.phi
            + params.dt
            * (force_b + length_force(phases.phi_b, params.nu, params.mu))
        ),
    )


def mrsf_energy(
    phases: PhaseSet,
    image: ScalarField2D,
    params,
    kernel: GaussianKernel,
    fits: typing.Optional[Phases] = None,
) -> float:
    if fits is None:
        fits = exchange_fits(
            mrsf_fit(image, phases, kernel),
            params.polarity,
            params.exchange,
        )

    return (
        mrsf_data_energy(phases, mrsf_e_terms(image, fits, kernel), params.lambda1)
        + length_energy(phases.phi_a, params.nu, params.mu)
        + length_energy(phases.phi_b, params.nu, params.mu)
    )


def order_by_intensity(
    image: ScalarField2D,
    masks: typing.Sequence[Mask],
) -> typing.List[Mask]:
    """Phase masks from darkest to brightest mean intensity, empty ones last"""
    means = [
        float(np.mean(image[mask])) if np.any(mask) else math.inf for mask in masks
    ]
    return [masks[index] for index in sorted(range(len(masks)), key=means.__getitem__)]


def phase_contour(phases: PhaseSet) -> Mask:
    return contour_pixels(phases.phi_a.phi) | contour_pixels(phases.phi_b.phi)
