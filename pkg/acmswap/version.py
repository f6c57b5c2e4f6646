"""Represents current package version"""
# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

__version__ = (1, 0, 0)
version_string = ".".join(map(str, __version__))
