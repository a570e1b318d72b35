"""Allow ``python -m bicsim``."""

import sys

from .cli import main

sys.exit(main())
