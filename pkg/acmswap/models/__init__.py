"""Just a placeholder to do relative imports"""
# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

# Models are discovered by `loader.Models.register_all`, do not import them here.
