"""`python -m tvising` entry point."""

import sys

from .main import main

sys.exit(main())
