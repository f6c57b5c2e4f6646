"""Synthetic scenes, segmentation metrics and experiment suites"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import enum
import functools
import logging
import math
import time
import typing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from skimage import draw

from . import loader, utils
from .levelset import InitSpec, Shape
from .log import describe_exception
from .multiphase import PhaseInit, order_by_intensity
from .solver import RunResult, run
from .swap import Polarity
from .types import Mask, NumericalDivergenceError, ParameterError, ScalarField2D

logger = logging.getLogger(__name__)

Init = typing.Union[InitSpec, PhaseInit]
NamedInit = typing.Tuple[str, Init]

WARMUP_ITERS = 5


class Scene(enum.Enum):
    TWO_BLOB = "two_blob_inhomogeneous"
    VESSEL = "vessel_like"
    FOUR_REGION = "four_region"


class BiasKind(enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


# Two-phase scenes take (object, background), four_region takes one level per region
DEFAULT_LEVELS = {
    Scene.TWO_BLOB: (200.0, 50.0),
    Scene.VESSEL: (200.0, 50.0),
    Scene.FOUR_REGION: (40.0, 100.0, 160.0, 220.0),
}
DEFAULT_BIAS = {Scene.TWO_BLOB: 80.0, Scene.VESSEL: 80.0, Scene.FOUR_REGION: 40.0}


@dataclass(frozen=True)
class SyntheticSpec:
    scene: Scene = Scene.TWO_BLOB
    width: int = 128
    height: int = 128
    levels: typing.Optional[typing.Tuple[float, ...]] = None
    bias: typing.Optional[float] = None
    bias_kind: BiasKind = BiasKind.ADDITIVE
    noise: float = 5.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scene", Scene(self.scene))
        object.__setattr__(self, "bias_kind", BiasKind(self.bias_kind))
        if self.levels is None:
            object.__setattr__(self, "levels", DEFAULT_LEVELS[self.scene])

        if self.bias is None:
            object.__setattr__(self, "bias", DEFAULT_BIAS[self.scene])

        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

        expected = len(DEFAULT_LEVELS[self.scene])
        if len(self.levels) != expected:
            raise ParameterError(
                f"Scene {self.scene.value} needs {expected} levels, got"
                f" {len(self.levels)}"
            )

        if self.width < 16 or self.height < 16:
            raise ParameterError(
                f"Synthetic scenes need at least 16×16 pixels, got"
                f" {self.width}×{self.height}"
            )

        if self.noise < 0:
            raise ParameterError(f"Noise must be non-negative, got {self.noise}")

    @property
    def dims(self) -> typing.Tuple[int, int]:
        return self.height, self.width


def _disk(dims, center, radius) -> Mask:
    mask = np.zeros(dims, dtype=bool)
    mask[draw.disk(center, radius, shape=dims)] = True
    return mask


def _two_blob(dims) -> typing.List[Mask]:
    height, width = dims
    radius = 0.15 * min(dims)
    return [
        _disk(dims, (0.5 * height, 0.3 * width), radius)
        | _disk(dims, (0.5 * height, 0.7 * width), radius)
    ]


def _vessel(dims) -> typing.List[Mask]:
    height, width = dims
    rows, cols = np.mgrid[0:height, 0:width]
    wave = 0.5 * height + 0.22 * height * np.sin(2 * np.pi * cols / width)
    branch = 0.3 * width + 0.08 * width * np.sin(2 * np.pi * rows / height)
    return [
        (np.abs(rows - wave) <= 0.035 * height)
        | (np.abs(cols - branch) <= 0.03 * width)
    ]


def _four_region(dims) -> typing.List[Mask]:
    height, width = dims
    ellipse = np.zeros(dims, dtype=bool)
    ellipse[
        draw.ellipse(0.35 * height, 0.3 * width, 0.2 * height, 0.18 * width, dims)
    ] = True
    rectangle = np.zeros(dims, dtype=bool)
    rectangle[
        round(0.2 * height) : round(0.55 * height),
        round(0.58 * width) : round(0.88 * width),
    ] = True
    disk = _disk(dims, (0.75 * height, 0.55 * width), 0.15 * min(dims))
    background = ~(ellipse | rectangle | disk)
    return [background, ellipse, rectangle, disk]


_SCENES = {
    Scene.TWO_BLOB: _two_blob,
    Scene.VESSEL: _vessel,
    Scene.FOUR_REGION: _four_region,
}


def generate(spec: SyntheticSpec) -> typing.Tuple[ScalarField2D, typing.List[Mask]]:
    """
    Composes a scene with linear bias and Gaussian noise
    :return: Image clamped to [0, 255] and ground truth masks
             (object support for two-phase scenes, regions by ascending level
             for four_region)
    """
    regions = _SCENES[spec.scene](spec.dims)
    if spec.scene is Scene.FOUR_REGION:
        image = np.zeros(spec.dims)
        for region, level in zip(regions, spec.levels):
            image[region] = level

        order = np.argsort(spec.levels, kind="stable")
        truth = [regions[index] for index in order]
    else:
        obj, background = spec.levels
        image = np.where(regions[0], obj, background).astype(np.float64)
        truth = regions

    ramp = np.linspace(-0.5, 0.5, spec.width)[np.newaxis, :]
    if spec.bias_kind is BiasKind.ADDITIVE:
        image = image + spec.bias * ramp
    else:
        image = image * (1 + spec.bias / 255 * ramp)

    if spec.noise > 0:
        image = image + np.random.default_rng(spec.seed).normal(
            0.0,
            spec.noise,
            spec.dims,
        )

    return np.clip(image, 0, 255), truth


def dsc(a: Mask, b: Mask) -> float:
    """2|A∩B| / (|A| + |B|), 1 for two empty masks"""
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ParameterError(f"Mask shapes differ: {a.shape} / {b.shape}")

    total = int(a.sum()) + int(b.sum())
    if not total:
        return 1.0

    return 2 * int(np.logical_and(a, b).sum()) / total


def standard_inits(dims: typing.Tuple[int, int]) -> typing.List[NamedInit]:
    """
    Centered box, corner box, oversized box and two small boxes.
    On the two-blob scene the corner box has its corners inside both blobs,
    so the background it covers stays within a kernel reach of an object
    """
    height, width = dims

    def box(top, bottom, left, right) -> Shape:
        return Shape.rectangle(
            (round(top * height), round(bottom * height)),
            (round(left * width), round(right * width)),
        )

    return [
        ("centered", InitSpec((box(0.34, 0.66, 0.25, 0.75),))),
        ("corner", InitSpec((box(0.4, 0.6, 0.32, 0.62),))),
        ("oversized", InitSpec((box(0.25, 0.75, 0.08, 0.92),))),
        (
            "two_boxes",
            InitSpec((box(0.45, 0.55, 0.08, 0.2), box(0.45, 0.55, 0.48, 0.6))),
        ),
    ]


def standard_phase_inits(
    dims: typing.Tuple[int, int],
    levels: typing.Sequence[float] = DEFAULT_LEVELS[Scene.FOUR_REGION],
) -> typing.List[NamedInit]:
    """Cut levels between region intensities, a box pair and an off-target pair"""
    height, width = dims

    def box(top, bottom, left, right) -> InitSpec:
        return InitSpec(
            (
                Shape.rectangle(
                    (round(top * height), round(bottom * height)),
                    (round(left * width), round(right * width)),
                ),
            )
        )

    levels = sorted(levels)
    return [
        (
            "thresholds",
            PhaseInit(
                thresholds=tuple(
                    (low + high) / 2 for low, high in zip(levels, levels[1:])
                )
            ),
        ),
        (
            "boxes",
            PhaseInit(box(0.1, 0.9, 0.5, 0.92), box(0.1, 0.5, 0.08, 0.92)),
        ),
        (
            "off_target",
            PhaseInit(box(0.45, 0.8, 0.2, 0.7), box(0.3, 0.65, 0.4, 0.75)),
        ),
    ]


@dataclass
class SuiteResult:
    table: pd.DataFrame
    results: typing.List[typing.Optional[RunResult]] = field(default_factory=list)
    failures: typing.List[BaseException] = field(default_factory=list)


def score(
    result: RunResult,
    image: ScalarField2D,
    truth: typing.Optional[typing.Sequence[Mask]],
) -> typing.List[float]:
    """
    DSC of every ground truth region.
    Multiphase masks are matched to regions by ascending mean intensity
    """
    if truth is None:
        return []

    masks = result.masks
    if len(masks) > 1:
        masks = order_by_intensity(image, masks)

    return [dsc(mask, region) for mask, region in zip(masks, truth)]


def _attempt(
    model: loader.Model,
    image: ScalarField2D,
    init: Init,
    params: loader.ModelParams,
    snapshots: typing.Iterable[int],
) -> typing.Union[RunResult, BaseException]:
    try:
        return run(model, image, init, params, snapshots=snapshots)
    except NumericalDivergenceError as e:
        logger.warning("%s", e)
        return e
    except Exception as e:
        logger.exception("Run of %s failed", model.name)
        return e


def _run_rows(
    jobs: typing.List[typing.Tuple[dict, Init, loader.ModelParams]],
    model: loader.Model,
    image: ScalarField2D,
    truth: typing.Optional[typing.Sequence[Mask]],
    workers: int,
    snapshots: typing.Iterable[int],
) -> SuiteResult:
    snapshots = tuple(snapshots)
    outcomes = utils.gather_sync(
        [
            functools.partial(_attempt, model, image, init, params, snapshots)
            for _, init, params in jobs
        ],
        workers,
    )

    rows, results, failures = [], [], []
    for index, ((columns, _, _), outcome) in enumerate(zip(jobs, outcomes)):
        row = {"run": index, "model": model.name, **columns}
        if isinstance(outcome, BaseException):
            row.update(
                dsc=math.nan,
                dsc_min=math.nan,
                iterations=0,
                elapsed=math.nan,
                error=describe_exception(outcome),
            )
            results.append(None)
            failures.append(outcome)
        else:
            scores = score(outcome, image, truth)
            row.update(
                dsc=float(np.mean(scores)) if scores else math.nan,
                dsc_min=min(scores) if scores else math.nan,
                iterations=outcome.iterations_run,
                elapsed=outcome.elapsed,
                error="",
            )
            if model.phases > 2:
                row.update(
                    {
                        f"dsc_{i}": (scores[i - 1] if scores else math.nan)
                        for i in range(1, model.phases + 1)
                    }
                )

            results.append(outcome)

        rows.append(row)

    return SuiteResult(pd.DataFrame(rows), results, failures)


def single_suite(
    model: typing.Union[str, loader.Model],
    image: ScalarField2D,
    truth: typing.Optional[typing.Sequence[Mask]],
    inits: typing.Sequence[NamedInit],
    overrides: typing.Optional[dict] = None,
    polarity: Polarity = Polarity.BRIGHT_OBJECT,
    workers: int = 1,
    snapshots: typing.Iterable[int] = (),
) -> SuiteResult:
    """One run per init with the configured polarity"""
    model = loader.get_model(model)
    params = model.resolve_params(overrides, polarity)
    return _run_rows(
        [
            ({"init": name, "polarity": params.polarity.value}, init, params)
            for name, init in inits
        ],
        model,
        image,
        truth,
        workers,
        snapshots,
    )


def robustness_suite(
    model: typing.Union[str, loader.Model],
    image: ScalarField2D,
    truth: typing.Optional[typing.Sequence[Mask]],
    inits: typing.Sequence[NamedInit],
    overrides: typing.Optional[dict] = None,
    polarity: Polarity = Polarity.BRIGHT_OBJECT,
    workers: int = 1,
    snapshots: typing.Iterable[int] = (),
) -> SuiteResult:
    """
    Original (`off`) and improved run for every initialization
    :return: Rows ordered as init × (off, polarity)
    :raises ParameterError: If fewer than 2 initializations are given
    """
    if len(inits) < 2:
        raise ParameterError(
            f"Robustness needs at least 2 initializations, got {len(inits)}"
        )

    model = loader.get_model(model)
    variants = [
        model.resolve_params(overrides, Polarity.OFF),
        model.resolve_params(overrides, polarity),
    ]
    return _run_rows(
        [
            ({"init": name, "polarity": params.polarity.value}, init, params)
            for name, init in inits
            for params in variants
        ],
        model,
        image,
        truth,
        workers,
        snapshots,
    )


def sigma_sweep(
    model: typing.Union[str, loader.Model],
    image: ScalarField2D,
    truth: typing.Optional[typing.Sequence[Mask]],
    init: Init,
    sigmas: typing.Sequence[float],
    overrides: typing.Optional[dict] = None,
    polarity: Polarity = Polarity.BRIGHT_OBJECT,
    workers: int = 1,
) -> SuiteResult:
    """Original and improved run for every kernel scale"""
    model = loader.get_model(model)
    jobs = []
    for sigma in sigmas:
        for variant in (Polarity.OFF, polarity):
            params = model.resolve_params(
                {**(overrides or {}), "sigma": sigma},
                variant,
            )
            jobs.append(
                ({"sigma": params.sigma, "polarity": variant.value}, init, params)
            )

    suite = _run_rows(jobs, model, image, truth, workers, ())
    suite.table = suite.table.drop(columns=["dsc_min"])
    return suite


def timing_compare(
    model: typing.Union[str, loader.Model],
    image: ScalarField2D,
    init: Init,
    overrides: typing.Optional[dict] = None,
    polarity: Polarity = Polarity.BRIGHT_OBJECT,
    iters: int = 100,
    repeats: int = 3,
) -> pd.Series:
    """
    Wall-clock of the original and the improved variant at the same budget,
    early stop disabled, run sequentially.
    Both variants are warmed up first, then timed `repeats` times in
    alternating order, keeping the fastest run of each
    :return: `model`, `iterations`, `t_original`, `t_improved`, `ratio`
    """
    if repeats < 1:
        raise ParameterError(f"Timing needs at least 1 repeat, got {repeats}")

    model = loader.get_model(model)
    overrides = {**(overrides or {}), "max_iters": iters, "early_stop": False}
    variants = [
        model.resolve_params(overrides, Polarity.OFF),
        model.resolve_params(overrides, polarity),
    ]
    for params in variants:
        run(model, image, init, params.replace(max_iters=WARMUP_ITERS))

    timings = [math.inf, math.inf]
    for repeat in range(repeats):
        order = (0, 1) if repeat % 2 == 0 else (1, 0)
        for index in order:
            started = time.perf_counter()
            run(model, image, init, variants[index])
            timings[index] = min(timings[index], time.perf_counter() - started)

    t_original, t_improved = timings
    return pd.Series(
        {
            "model": model.name,
            "iterations": iters,
            "t_original": t_original,
            "t_improved": t_improved,
            "ratio": t_improved / max(t_original, 1e-12),
        }
    )
