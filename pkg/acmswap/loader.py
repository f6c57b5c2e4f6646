"""Registers segmentation models"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import dataclasses
import importlib
import inspect
import logging
import math
import os
import typing
from dataclasses import dataclass

import numpy as np

from . import validators
from .field import GaussianKernel, contour_pixels
from .fitting import FittingPair
from .levelset import InitSpec, LevelSet, init_binary_step
from .swap import Polarity, reversed_fraction
from .types import ConfigError, ConfigValue, Mask, ModuleConfig, ParameterError

__all__ = [
    "ConfigValue",
    "Fits",
    "Model",
    "ModelParams",
    "Models",
    "ModuleConfig",
    "TwoPhaseModel",
    "get_model",
    "positive",
    "solver_options",
    "validators",
]

logger = logging.getLogger(__name__)

MODELS_NAME = "models"


@dataclass(frozen=True)
class ModelParams:
    lambda1: float = 1.0
    lambda2: float = 1.0
    nu: float = 0.0
    mu: float = 0.0
    epsilon: float = 1.0
    sigma: float = 3.0
    dt: float = 0.1
    c0: float = 2.0
    max_iters: int = 500
    polarity: Polarity = Polarity.BRIGHT_OBJECT
    early_stop: bool = False
    patience: int = 10
    reg_size: int = 5
    reg_variance: float = 0.5
    pair_variances: bool = True
    exchange: str = "lattice"

    def __post_init__(self):
        object.__setattr__(self, "polarity", Polarity.parse(self.polarity))

        for name in ("lambda1", "lambda2", "epsilon", "sigma", "dt", "c0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value}")

        for name in ("nu", "mu", "reg_variance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be non-negative, got {value}")

        if self.max_iters < 0:
            raise ParameterError(
                f"max_iters must be non-negative, got {self.max_iters}"
            )

        if self.patience < 1:
            raise ParameterError(f"patience must be positive, got {self.patience}")

        if self.reg_size < 1 or self.reg_size % 2 == 0:
            raise ParameterError(f"reg_size must be odd, got {self.reg_size}")

        if self.exchange not in ("lattice", "sort"):
            raise ParameterError(
                f"exchange must be lattice or sort, got {self.exchange}"
            )

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["polarity"] = self.polarity.value
        return data


@dataclass(frozen=True)
class Fits:
    """
    Fitting fields of one iteration.
    `raw_*` are computed from the current level sets, the other ones are
    fed to the flow (exchanged unless polarity is off)
    """

    raw_means: typing.Tuple[np.ndarray, ...]
    means: typing.Tuple[np.ndarray, ...]
    raw_variances: typing.Optional[typing.Tuple[np.ndarray, ...]] = None
    variances: typing.Optional[typing.Tuple[np.ndarray, ...]] = None


def solver_options(max_iters: int = 500) -> typing.List[ConfigValue]:
    """Options every model shares with the solver loop"""
    return [
        ConfigValue(
            "max_iters",
            max_iters,
            "Iteration budget",
            validator=validators.Integer(minimum=0),
        ),
        ConfigValue(
            "early_stop",
            False,
            "Stop when the mask is unchanged for `patience` iterations",
            validator=validators.Boolean(),
        ),
        ConfigValue(
            "patience",
            10,
            "Unchanged iterations before early stop",
            validator=validators.Integer(minimum=1),
        ),
    ]


def positive(
    option: str,
    default: float,
    doc: str,
    *,
    allow_zero: bool = False,
) -> ConfigValue:
    return ConfigValue(
        option,
        default,
        doc,
        validator=validators.Float(minimum=0, strict=not allow_zero),
    )


class Model:
    """
    Base of every segmentation model.
    Subclasses declare `strings["name"]` and a `config` with their defaults
    """

    strings = {"name": "Unknown"}
    phases = 2

    def __init__(self):
        self.config = ModuleConfig()

    @property
    def name(self) -> str:
        return self.strings["name"]

    def resolve_params(
        self,
        overrides: typing.Optional[typing.Mapping[str, typing.Any]] = None,
        polarity: typing.Union[str, Polarity] = Polarity.BRIGHT_OBJECT,
    ) -> ModelParams:
        """
        Applies overrides on top of model defaults
        :param overrides: Option → value, every option must be declared by the model
        :param polarity: Swap polarity
        :return: Validated parameters
        :raises ConfigError: On unknown option or invalid value
        """
        config = self.config.copy()
        config.update_validated(dict(overrides or {}))
        try:
            return ModelParams(**dict(config), polarity=Polarity.parse(polarity))
        except (ParameterError, ValueError) as e:
            raise ConfigError(f"Invalid parameters for {self.name}: {e}") from e

    def init_state(self, image: np.ndarray, init: typing.Any, params: ModelParams):
        raise NotImplementedError

    def fit(self, state, image, params: ModelParams, kernel: GaussianKernel) -> Fits:
        raise NotImplementedError

    def step(self, state, image, params: ModelParams, kernel: GaussianKernel, fits):
        raise NotImplementedError

    def energy(self, state, image, params: ModelParams, kernel, fits) -> float:
        raise NotImplementedError

    def levelsets(self, state) -> typing.Tuple[LevelSet, ...]:
        return (state,)

    def masks(self, state) -> typing.Tuple[Mask, ...]:
        return tuple(ls.mask() for ls in self.levelsets(state))

    def reversed_fraction(self, state, fits: Fits, params: ModelParams) -> float:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<Model {self.name}>"


class TwoPhaseModel(Model):
    """Plumbing shared by the single level set models"""

    def init_state(
        self,
        image: np.ndarray,
        init: InitSpec,
        params: ModelParams,
    ) -> LevelSet:
        if not isinstance(init, InitSpec):
            raise ConfigError(
                f"{self.name} expects shape initialization, got {type(init).__name__}"
            )

        return init_binary_step(
            image.shape,
            InitSpec(init.shapes, params.c0),
            params.epsilon,
        )

    def reversed_fraction(
        self,
        state: LevelSet,
        fits: Fits,
        params: ModelParams,
    ) -> float:
        return reversed_fraction(
            FittingPair(*fits.raw_means),
            params.polarity,
            contour_pixels(state.phi),
        )


class Models:
    """Registry of models found in the models directory"""

    def __init__(self):
        self.models: typing.List[Model] = []

    def register_all(self) -> typing.List[Model]:
        """Load all models in the models directory"""
        directory = os.path.join(
            os.path.dirname(os.path.abspath(__file__)),
            MODELS_NAME,
        )
        loaded = []
        for mod in sorted(
            filter(
                lambda x: x.endswith(".py") and not x.startswith("_"),
                os.listdir(directory),
            )
        ):
            module_name = f"{__package__}.{MODELS_NAME}.{mod[:-3]}"
            logger.debug("Loading %s", module_name)
            loaded += self.register_module(importlib.import_module(module_name))

        return loaded

    def register_module(self, module) -> typing.List[Model]:
        instances = [
            value()
            for value in vars(module).values()
            if inspect.isclass(value)
            and issubclass(value, Model)
            and value is not Model
            and value.__module__ == module.__name__
        ]

        for instance in instances:
            self.models = [
                model for model in self.models if model.name != instance.name
            ] + [instance]

        return instances

    def lookup(self, name: str) -> typing.Optional[Model]:
        return next((model for model in self.models if model.name == name), None)

    @property
    def names(self) -> typing.List[str]:
        return [model.name for model in self.models]


_models: typing.Optional[Models] = None


def registry() -> Models:
    global _models

    if _models is None:
        _models = Models()
        _models.register_all()

    return _models


def get_model(name: typing.Union[str, Model]) -> Model:
    """
    :param name: Model name or instance
    :raises ConfigError: If model is unknown
    """
    if isinstance(name, Model):
        return name

    if (model := registry().lookup(str(name))) is None:
        raise ConfigError(
            f"Unknown model {name}. Available: {', '.join(registry().names)}"
        )

    return model
