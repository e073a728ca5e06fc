"""Entry point for running diffractive_classifier as a module.

Usage:
    python -m diffractive_classifier train --scale desk --out runs/std
    python -m diffractive_classifier parse "D([10,10],[1,5,40k])"
    python -m diffractive_classifier --help
"""

import sys
from .cli import main

if __name__ == "__main__":
    sys.exit(main())
