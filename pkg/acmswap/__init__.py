"""Level set active contours with direction-consistent local fitting"""
# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

from .version import __version__

__license__ = "AGPLv3"
__status__ = "Production"
__all__ = ["__version__"]
