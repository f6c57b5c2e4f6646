"""Main script, where all the fun starts"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import argparse
import logging
import os
import typing
from pathlib import Path

import numpy as np
import pandas as pd

from . import bench, log
from .config import RunConfig, dump_effective_config, load_run_config
from .field import contour_pixels, save_image
from .solver import RunResult
from .types import ConfigError, ImageIOError, NumericalDivergenceError
from .types import ParameterError, ScalarField2D
from .validators import ValidationError
from .version import version_string

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DIVERGED = 2

# Label step between consecutive phases of a multiphase mask image
LABEL_STEP = 85


def parse_arguments(
    argv: typing.Optional[typing.Sequence[str]] = None,
) -> argparse.Namespace:
    """
    Parses the arguments
    :returns: Namespace with arguments
    """
    parser = argparse.ArgumentParser(
        prog="acmswap",
        description="Level set segmentation with fitting exchange",
    )
    parser.add_argument(
        "--config",
        "-c",
        dest="config",
        required=True,
        help="YAML run config",
    )
    parser.add_argument(
        "--out",
        "-o",
        dest="out",
        default="./out",
        help="Directory results are written to",
    )
    parser.add_argument(
        "--print-config",
        dest="print_config",
        action="store_true",
        help="Print the effective config after defaulting and exit",
    )
    parser.add_argument(
        "--verbose",
        "-v",
        dest="verbose",
        action="store_true",
        help="Show debug messages, including evolution progress",
    )
    parser.add_argument("--version", action="version", version=version_string)
    return parser.parse_args(argv)


class Runner:
    """Batch runner: loads the config, runs the experiment, writes results"""

    def __init__(self, arguments: argparse.Namespace):
        self.arguments = arguments
        self.out = Path(arguments.out)
        self.config: typing.Optional[RunConfig] = None
        self.image: typing.Optional[ScalarField2D] = None
        self.truth = None
        self.inits = []

    def _prepare(self):
        self.config = load_run_config(self.arguments.config)
        if self.arguments.print_config:
            return

        self.image, self.truth = self.config.load_input()
        self.inits = self.config.build_inits(self.image)

    def _experiment(self) -> typing.Tuple[pd.DataFrame, bench.SuiteResult]:
        config = self.config
        if config.experiment == "timing":
            series = bench.timing_compare(
                config.model,
                self.image,
                self.inits[0][1],
                config.overrides,
                config.polarity,
                config.timing_iters,
            )
            table = series.to_frame().T
            return table, bench.SuiteResult(table)

        if config.experiment == "sigma_sweep":
            suite = bench.sigma_sweep(
                config.model,
                self.image,
                self.truth,
                self.inits[0][1],
                config.sigmas,
                config.overrides,
                config.polarity,
                config.workers,
            )
        else:
            suite = (
                bench.robustness_suite
                if config.experiment == "robustness"
                else bench.single_suite
            )(
                config.model,
                self.image,
                self.truth,
                self.inits,
                config.overrides,
                config.polarity,
                config.workers,
                config.snapshots,
            )

        return suite.table, suite

    def _mask_image(self, masks: typing.Sequence[np.ndarray]) -> ScalarField2D:
        if len(masks) == 1:
            return np.where(masks[0], 255, 0)

        labels = np.zeros(masks[0].shape)
        for index, mask in enumerate(masks):
            labels[mask] = index * LABEL_STEP

        return labels

    def _write_run(self, index: int, result: RunResult):
        save_image(self._mask_image(result.masks), self.out / f"mask_{index:03d}.pgm")

        overlay = np.array(self.image, dtype=np.float64)
        for ls in result.phis:
            overlay[contour_pixels(ls.phi)] = 255

        save_image(overlay, self.out / f"overlay_{index:03d}.pgm")

        pd.DataFrame(
            {
                "iteration": np.arange(len(result.energy_trace)),
                "energy": result.energy_trace,
                "reversed": result.reversed_trace,
            }
        ).to_csv(self.out / f"energy_{index:03d}.csv", index=False)

        for iteration, masks in sorted(result.snapshots.items()):
            save_image(
                self._mask_image(masks),
                self.out / f"snapshot_{index:03d}_{iteration:04d}.pgm",
            )

    def _write(self, table: pd.DataFrame, suite: bench.SuiteResult):
        for index, result in enumerate(suite.results):
            if result is not None:
                self._write_run(index, result)

        table.to_csv(self.out / "results.csv", index=False)
        logger.info("Results written to %s", self.out)

    def main(self) -> int:
        log.init(logging.DEBUG if self.arguments.verbose else logging.INFO)

        try:
            self._prepare()
        except (ConfigError, ValidationError, ImageIOError, ParameterError) as e:
            logger.error("%s", e)
            return EXIT_INVALID

        if self.arguments.print_config:
            print(dump_effective_config(self.config), end="")
            return EXIT_OK

        try:
            os.makedirs(self.out, exist_ok=True)
            log.attach_file(str(self.out / "run.log"))
            (self.out / "config.yaml").write_text(
                dump_effective_config(self.config),
                encoding="utf-8",
            )
        except OSError as e:
            logger.error("Can't prepare output directory %s: %s", self.out, e)
            return EXIT_INVALID

        logger.info(
            "Running %s of %s [%s] with %d init(s)",
            self.config.experiment,
            self.config.model.name,
            self.config.polarity.value,
            len(self.inits),
        )

        try:
            table, suite = self._experiment()
        except NumericalDivergenceError as e:
            logger.error("%s", e)
            return EXIT_DIVERGED
        except (ConfigError, ParameterError) as e:
            logger.error("%s", e)
            return EXIT_INVALID

        try:
            self._write(table, suite)
        except (ImageIOError, OSError) as e:
            logger.error("Can't write results: %s", e)
            return EXIT_INVALID

        if any(isinstance(e, NumericalDivergenceError) for e in suite.failures):
            return EXIT_DIVERGED

        if suite.failures:
            return EXIT_INVALID

        return EXIT_OK


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    return Runner(parse_arguments(argv)).main()
