"""Main logging part"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import logging
import os
import traceback
import typing
from logging.handlers import RotatingFileHandler


def describe_exception(exception: BaseException) -> str:
    """
    One-line description of an exception with its failing source location
    :param exception: Exception caught by the caller
    :return: `Type: message (file:line in function)`
    """
    description = "".join(
        traceback.format_exception_only(type(exception), exception)
    ).strip()

    if frames := traceback.extract_tb(exception.__traceback__):
        frame = frames[-1]
        description += (
            f" ({os.path.basename(frame.filename)}:{frame.lineno} in {frame.name})"
        )

    return description


class BufferedLogsHandler(logging.Handler):
    """
    Keeps 2 buffers.
    One for dispatched records.
    One for records which are not dispatched yet.
    When the length of the 2 together is `capacity`
    truncate to make them `capacity` together,
    first trimming handled then unused.
    Handled records are replayed into targets attached later,
    so a run log file contains the whole run.
    """

    def __init__(self, targets: list, capacity: int):
        super().__init__(0)
        self.buffer = []
        self.handledbuffer = []
        self.targets = list(targets)
        self.capacity = capacity
        self.lvl = logging.NOTSET

    def setLevel(self, level: int):
        self.lvl = level

    def add_target(self, target: logging.Handler, replay: bool = True):
        self.acquire()
        try:
            if replay:
                for record in self.handledbuffer:
                    if record.levelno >= target.level:
                        target.handle(record)

            self.targets.append(target)
        finally:
            self.release()

    def emit(self, record: logging.LogRecord):
        if len(self.buffer) + len(self.handledbuffer) >= self.capacity:
            if self.handledbuffer:
                del self.handledbuffer[0]
            else:
                del self.buffer[0]

        self.buffer.append(record)

        if record.levelno >= self.lvl >= 0:
            self.acquire()
            try:
                for precord in self.buffer:
                    for target in self.targets:
                        if precord.levelno >= target.level:
                            target.handle(precord)

                self.handledbuffer = (
                    self.handledbuffer[-(self.capacity - len(self.buffer)) :]
                    + self.buffer
                )
                self.buffer = []
            finally:
                self.release()


_main_formatter = logging.Formatter(
    fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    style="%",
)


def _root_handler() -> typing.Optional[BufferedLogsHandler]:
    return next(
        (
            handler
            for handler in logging.getLogger().handlers
            if isinstance(handler, BufferedLogsHandler)
        ),
        None,
    )


def attach_file(path: str, level: int = logging.DEBUG) -> RotatingFileHandler:
    """
    Adds rotating log file to the root handler and replays buffered records into it
    :param path: Log file path
    :param level: Minimal level written to file
    :return: Attached handler
    """
    rotating_handler = RotatingFileHandler(
        filename=path,
        mode="a",
        maxBytes=10 * 1024 * 1024,
        backupCount=1,
        encoding="utf-8",
        delay=0,
    )
    rotating_handler.setFormatter(_main_formatter)
    rotating_handler.setLevel(level)

    if (handler := _root_handler()) is None:
        handler = init()

    handler.add_target(rotating_handler)
    return rotating_handler


def init(level: int = logging.INFO) -> BufferedLogsHandler:
    handler = logging.StreamHandler()
    handler.setLevel(level)
    handler.setFormatter(_main_formatter)
    root = BufferedLogsHandler((handler,), 7000)
    logging.getLogger().handlers = []
    logging.getLogger().addHandler(root)
    logging.getLogger().setLevel(logging.NOTSET)
    logging.getLogger("PIL").setLevel(logging.WARNING)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("asyncio").setLevel(logging.WARNING)
    logging.captureWarnings(True)
    return root
