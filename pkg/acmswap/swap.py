"""Exchange of fitting values across the contour"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import enum
import typing

import numpy as np

from .fitting import FittingPair
from .types import Mask


class Polarity(enum.Enum):
    """
    Which side the object is on.
    `bright_object` gives the positive side the pointwise minimum,
    `dark_object` the maximum, `off` leaves fits untouched
    """

    BRIGHT_OBJECT = "bright_object"
    DARK_OBJECT = "dark_object"
    OFF = "off"

    @classmethod
    def parse(cls, value: typing.Union[str, "Polarity"]) -> "Polarity":
        return value if isinstance(value, cls) else cls(str(value))


def _exchange(
    pair: FittingPair,
    polarity: Polarity,
) -> typing.Optional[np.ndarray]:
    """Pixels where `side1` and `side2` must trade places, `None` when off"""
    if polarity is Polarity.BRIGHT_OBJECT:
        return pair.side1 > pair.side2

    if polarity is Polarity.DARK_OBJECT:
        return pair.side1 < pair.side2

    return None


def _apply(pair: FittingPair, where: typing.Optional[np.ndarray]) -> FittingPair:
    if where is None:
        return pair

    return FittingPair(
        np.where(where, pair.side2, pair.side1),
        np.where(where, pair.side1, pair.side2),
        pair.kind,
    )


def swap_pair(pair: FittingPair, polarity: Polarity) -> FittingPair:
    return _apply(pair, _exchange(pair, polarity))


def swap_lgdf(
    means: FittingPair,
    variances: FittingPair,
    polarity: Polarity,
    paired: bool = False,
) -> typing.Tuple[FittingPair, FittingPair]:
    """
    Swaps LGDF means and variances
    :param paired: Move each variance together with its mean instead of
                   sorting variances on their own
    """
    where = _exchange(means, polarity)
    if paired:
        return _apply(means, where), _apply(variances, where)

    return _apply(means, where), _apply(variances, _exchange(variances, polarity))


def is_ordered(pair: FittingPair, polarity: Polarity) -> bool:
    where = _exchange(pair, polarity)
    return where is None or not bool(np.any(where))


def reversed_fraction(
    pair: FittingPair,
    polarity: Polarity,
    where: Mask,
) -> float:
    """
    Share of `where` pixels whose fits are ordered against the polarity,
    `bright_object` is the reference for `off`
    """
    if not np.any(where):
        return 0.0

    if polarity is Polarity.OFF:
        polarity = Polarity.BRIGHT_OBJECT

    return float(np.mean(_exchange(pair, polarity)[where]))
