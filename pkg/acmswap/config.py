"""Run configuration file: loading, validation and effective dump"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import io
import logging
import os
import typing
from dataclasses import dataclass

import numpy as np
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from . import loader, validators
from .bench import Scene, SyntheticSpec, generate, standard_inits
from .bench import standard_phase_inits
from .field import load_image
from .levelset import InitSpec, Shape
from .multiphase import PhaseInit
from .swap import Polarity
from .types import ConfigError, ConfigValue, Mask, ModuleConfig, ParameterError
from .types import ScalarField2D

logger = logging.getLogger(__name__)

yaml = YAML(typ="safe")

EXPERIMENTS = ["single", "robustness", "sigma_sweep", "timing"]

SCENE_SCHEMA = validators.Mapping(
    {
        "name": validators.Choice([scene.value for scene in Scene]),
        "width": validators.Integer(minimum=16),
        "height": validators.Integer(minimum=16),
        "levels": validators.Series(validators.Float(0, 255), min_len=2, max_len=4),
        "bias": validators.Float(),
        "bias_kind": validators.Choice(["additive", "multiplicative"]),
        "noise": validators.Float(minimum=0),
        "seed": validators.Integer(minimum=0),
    },
    required=("name",),
)

INIT_SCHEMA = validators.Mapping(
    {
        "name": validators.String(min_len=1),
        "shapes": validators.ShapeList(),
        "a": validators.ShapeList(),
        "b": validators.ShapeList(),
        "thresholds": validators.Series(validators.Float(), min_len=1, max_len=3),
    },
    required=("name",),
)


def run_options() -> ModuleConfig:
    return ModuleConfig(
        ConfigValue(
            "model",
            "rsf",
            "Segmentation model",
            validator=validators.Choice(loader.registry().names),
        ),
        ConfigValue(
            "experiment",
            "single",
            "What to run",
            validator=validators.Choice(EXPERIMENTS),
        ),
        ConfigValue(
            "polarity",
            Polarity.BRIGHT_OBJECT.value,
            "Fit exchange polarity, `off` runs the original model",
            validator=validators.Choice([polarity.value for polarity in Polarity]),
        ),
        ConfigValue(
            "image",
            None,
            "Input image (PGM or PNG), exclusive with `scene`",
            validator=validators.Union(validators.NoneType(), validators.String(1)),
        ),
        ConfigValue(
            "truth",
            None,
            "Ground truth masks for `image`, one file per region",
            validator=validators.Union(
                validators.NoneType(),
                validators.Series(validators.String(1), min_len=1, max_len=4),
            ),
        ),
        ConfigValue(
            "scene",
            None,
            "Synthetic scene, exclusive with `image`",
            validator=validators.Union(validators.NoneType(), SCENE_SCHEMA),
        ),
        ConfigValue(
            "params",
            {},
            "Model parameter overrides",
            validator=validators.Union(
                validators.NoneType(),
                validators.Mapping(
                    {key: validators.Validator(lambda x: x) for key in _param_keys()}
                ),
            ),
        ),
        ConfigValue(
            "inits",
            "standard",
            "Initializations: `standard` or a list of named inits",
            validator=validators.Union(
                validators.Choice(["standard"]),
                validators.Series(INIT_SCHEMA, min_len=1),
            ),
        ),
        ConfigValue(
            "sigmas",
            [3.0, 4.0, 5.0, 10.0],
            "Kernel scales of `sigma_sweep`",
            validator=validators.Series(
                validators.Float(minimum=0, strict=True),
                min_len=1,
            ),
        ),
        ConfigValue(
            "timing_iters",
            100,
            "Iteration budget of `timing`",
            validator=validators.Integer(minimum=0),
        ),
        ConfigValue(
            "workers",
            1,
            "Runs executed concurrently",
            validator=validators.Integer(minimum=1),
        ),
        ConfigValue(
            "snapshots",
            [],
            "Iterations after which masks are saved",
            validator=validators.Series(validators.Integer(minimum=1)),
        ),
    )


def _param_keys() -> typing.List[str]:
    keys = []
    for model in loader.registry().models:
        keys += [key for key in model.config if key not in keys]

    return keys


@dataclass
class RunConfig:
    model: loader.Model
    experiment: str
    polarity: Polarity
    params: loader.ModelParams
    overrides: dict
    image: typing.Optional[str] = None
    truth: typing.Optional[typing.List[str]] = None
    scene: typing.Optional[SyntheticSpec] = None
    inits: typing.Union[str, typing.List[dict]] = "standard"
    sigmas: typing.Sequence[float] = (3.0, 4.0, 5.0, 10.0)
    timing_iters: int = 100
    workers: int = 1
    snapshots: typing.Sequence[int] = ()

    def load_input(
        self,
    ) -> typing.Tuple[ScalarField2D, typing.Optional[typing.List[Mask]]]:
        """
        :return: Image and ground truth masks (`None` if unknown)
        :raises ImageIOError: If any file can't be read
        """
        if self.scene is not None:
            return generate(self.scene)

        image = load_image(self.image)
        if not self.truth:
            return image, None

        truth = []
        for path in self.truth:
            mask = load_image(path) > 0
            if mask.shape != image.shape:
                raise ConfigError(
                    f"Ground truth {path} is {mask.shape}, image is {image.shape}"
                )

            truth.append(mask)

        return image, truth

    def build_inits(
        self,
        image: ScalarField2D,
    ) -> typing.List[typing.Tuple[str, typing.Union[InitSpec, PhaseInit]]]:
        """
        :raises ConfigError: If an init doesn't fit the model or leaves the grid
        """
        multiphase = self.model.phases > 2
        if self.inits == "standard":
            if not multiphase:
                return standard_inits(image.shape)

            levels = self.scene.levels if self.scene is not None else None
            if levels is None or len(levels) != 4:
                levels = np.percentile(image, [12.5, 37.5, 62.5, 87.5])

            return standard_phase_inits(image.shape, levels)

        inits = []
        for entry in self.inits:
            name = entry["name"]
            if multiphase:
                if "shapes" in entry:
                    raise ConfigError(
                        f"Init {name}: {self.model.name} takes `a`, `b` or `thresholds`"
                    )

                try:
                    init = PhaseInit(
                        InitSpec(map(Shape.from_dict, entry.get("a", []))),
                        InitSpec(map(Shape.from_dict, entry.get("b", []))),
                        tuple(entry.get("thresholds", ())),
                    )
                except ParameterError as e:
                    raise ConfigError(f"Init {name}: {e}") from e

                specs = [init.a, init.b]
            else:
                if set(entry) - {"name", "shapes"}:
                    raise ConfigError(
                        f"Init {name}: {self.model.name} takes only `shapes`"
                    )

                init = InitSpec(map(Shape.from_dict, entry.get("shapes", [])))
                specs = [init]

            for spec in specs:
                for shape in spec.shapes:
                    if not shape.within(image.shape):
                        raise ConfigError(
                            f"Init {name}: shape {shape.to_dict()} exceeds grid"
                            f" {image.shape}"
                        )

            inits.append((name, init))

        return inits


def parse_run_config(data: typing.Any, source: str = "<config>") -> RunConfig:
    """
    Validates parsed config document
    :raises ConfigError: Describing the first problem found
    """
    if data is None:
        data = {}

    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")

    options = run_options()
    options.update_validated(data)

    if (options["image"] is None) == (options["scene"] is None):
        raise ConfigError(f"{source}: exactly one of `image` and `scene` is required")

    if options["truth"] and options["image"] is None:
        raise ConfigError(f"{source}: `truth` is only used with `image`")

    model = loader.get_model(options["model"])
    if model.phases > 2 and options["experiment"] == "sigma_sweep":
        raise ConfigError(f"{source}: {model.name} can't be used for sigma_sweep")

    if (
        options["experiment"] == "robustness"
        and isinstance(options["inits"], list)
        and len(options["inits"]) < 2
    ):
        raise ConfigError(f"{source}: robustness needs at least 2 inits")

    scene = None
    if options["scene"] is not None:
        scene_data = dict(options["scene"])
        try:
            scene = SyntheticSpec(
                Scene(scene_data.pop("name")),
                levels=tuple(scene_data.pop("levels"))
                if "levels" in scene_data
                else None,
                **scene_data,
            )
        except ParameterError as e:
            raise ConfigError(f"{source}: scene: {e}") from e

    overrides = dict(options["params"] or {})
    polarity = Polarity(options["polarity"])
    return RunConfig(
        model=model,
        experiment=options["experiment"],
        polarity=polarity,
        params=model.resolve_params(overrides, polarity),
        overrides=overrides,
        image=options["image"],
        truth=options["truth"],
        scene=scene,
        inits=options["inits"],
        sigmas=tuple(options["sigmas"]),
        timing_iters=options["timing_iters"],
        workers=options["workers"],
        snapshots=tuple(options["snapshots"]),
    )


def load_run_config(path: typing.Union[str, os.PathLike]) -> RunConfig:
    """
    Reads YAML run config
    :raises ConfigError: If file is missing, malformed or invalid
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.load(f)
    except OSError as e:
        raise ConfigError(f"Can't read config {path}: {e.strerror or e}") from e
    except YAMLError as e:
        raise ConfigError(f"Malformed config {path}: {e}") from e

    return parse_run_config(data, str(path))


def _plain(value: typing.Any) -> typing.Any:
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}

    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]

    if isinstance(value, np.generic):
        return value.item()

    return value


def effective_config(config: RunConfig) -> dict:
    params = config.params.to_dict()
    data = {
        "model": config.model.name,
        "experiment": config.experiment,
        "polarity": config.polarity.value,
        "params": {key: params[key] for key in config.model.config},
    }
    if config.scene is not None:
        data["scene"] = {
            "name": config.scene.scene.value,
            "width": config.scene.width,
            "height": config.scene.height,
            "levels": config.scene.levels,
            "bias": config.scene.bias,
            "bias_kind": config.scene.bias_kind.value,
            "noise": config.scene.noise,
            "seed": config.scene.seed,
        }
    else:
        data["image"] = config.image
        data["truth"] = config.truth

    data.update(
        inits=config.inits,
        sigmas=config.sigmas,
        timing_iters=config.timing_iters,
        workers=config.workers,
        snapshots=config.snapshots,
    )
    return _plain(data)


def dump_effective_config(config: RunConfig) -> str:
    """Every run key and model parameter after defaulting, as YAML"""
    dumper = YAML(typ="safe")
    dumper.default_flow_style = False
    stream = io.StringIO()
    dumper.dump(effective_config(config), stream)
    return stream.getvalue()
