"""Run the command line interface with `python -m drr`."""

import sys

from drr.cli import main

sys.exit(main())
