"""Diffractive Classifier - simulation and training of diffractive optical classifiers.

Usage:
    # As a module
    python -m diffractive_classifier --help

    # As installed command
    diffractive-classifier train --scale desk --notation "D([10,10],[1,5,40k])"
    diffractive-classifier eval runs/diff/seed0/best.ckpt
"""

__version__ = "0.1.0"
