"""Stochastic second-grade fluid experiments."""

from ._sgf import code_version, default_config, run_experiment, stokes_eigenvalues

__all__ = ["code_version", "default_config", "run_experiment", "stokes_eigenvalues"]
__version__ = code_version().split()[-1]
