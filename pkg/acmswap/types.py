# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import ast
import copy
import typing
from dataclasses import dataclass, field

import numpy as np

from . import validators

ScalarField2D = np.ndarray
Mask = np.ndarray


class ParameterError(Exception):
    """Is being raised when a numeric parameter, a shape or a dimension is invalid"""

    def __init__(self, error_message: str):  # skipcq: PYL-W0231
        self._error = error_message

    def __str__(self) -> str:
        return self._error


class ImageIOError(Exception):
    """Is being raised when image can't be read or written"""

    def __init__(self, path: str, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__()

    def __str__(self) -> str:
        return f"Can't process image {self.path}: {self.reason}"


class ConfigError(Exception):
    """Tells user, why the run config can't be used"""

    def __init__(self, error_message: str):  # skipcq: PYL-W0231
        self._error = error_message

    def __str__(self) -> str:
        return self._error


class NumericalDivergenceError(Exception):
    """Is being raised when level set evolution produces non-finite values"""

    def __init__(self, model: str, iteration: int):
        self.model = model
        self.iteration = iteration
        super().__init__()

    def __str__(self) -> str:
        return (
            f"Model {self.model} diverged at iteration {self.iteration}: level set"
            " became non-finite"
        )


class _Placeholder:
    """Placeholder to determine if the default value is going to be set"""


@dataclass(repr=True)
class ConfigValue:
    option: str
    default: typing.Any = None
    doc: str = "No description"
    value: typing.Any = field(default_factory=_Placeholder)
    validator: typing.Optional[validators.Validator] = None

    def __post_init__(self):
        if isinstance(self.value, _Placeholder):
            self.value = self.default

    def __setattr__(self, key: str, value: typing.Any):
        if key == "value":
            if isinstance(value, str):
                try:
                    value = ast.literal_eval(value)
                except Exception:
                    pass

            # Tuples are stored as lists just not to mess up with yaml dumps
            if isinstance(value, (set, tuple)):
                value = list(value)

            if isinstance(value, list):
                value = [
                    item.strip() if isinstance(item, str) else item for item in value
                ]

            if self.validator is not None and value is not None:
                value = self.validator.validate(value)

        object.__setattr__(self, key, value)


class ModuleConfig(dict):
    """Stores config for models and for the batch run"""

    def __init__(self, *entries: ConfigValue):
        self._config = {config.option: config for config in entries}
        super().__init__(
            {option: config.value for option, config in self._config.items()}
        )

    def __setitem__(self, key: str, value: typing.Any):
        self._config[key].value = value
        super().__setitem__(key, self._config[key].value)

    def __getitem__(self, key: str) -> typing.Any:
        try:
            return self._config[key].value
        except KeyError:
            return None

    def copy(self) -> "ModuleConfig":
        """Independent copy, so overrides never leak into class-level defaults"""
        return ModuleConfig(*(copy.copy(config) for config in self._config.values()))

    def update_validated(self, overrides: typing.Mapping[str, typing.Any]):
        """
        Applies overrides, rejecting unknown options
        :param overrides: Mapping of option → raw value
        :raises ConfigError: If option is unknown or value is invalid
        """
        if unknown := [key for key in overrides if key not in self._config]:
            raise ConfigError(
                f"Unknown config keys: {', '.join(map(str, unknown))}. Allowed:"
                f" {', '.join(self._config)}"
            )

        for key, value in overrides.items():
            try:
                self[key] = value
            except validators.ValidationError as e:
                raise ConfigError(f"Invalid value for {key}: {e}") from e
