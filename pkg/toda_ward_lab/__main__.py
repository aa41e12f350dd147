"""Allow ``python -m toda_ward_lab``."""

import sys

from .cli import main

sys.exit(main())
