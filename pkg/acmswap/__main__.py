"""Entry point. Checks Python version and starts the batch runner"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import sys

if sys.version_info < (3, 8, 0):
    print("🚫 Error: you must use at least Python version 3.8.0")
    sys.exit(1)

from . import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main.main())
