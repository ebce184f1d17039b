"""Folded-surface simulator: mapping class group words, anyon modular data,
stack tracing on folded tori and genon bilayers, stabilizer microscopics,
and bosonic interferometry checks."""

__version__ = "0.1.0"

from . import anyons, interferometry, mcg, origami, stabilizer

__all__ = ["anyons", "interferometry", "mcg", "origami", "stabilizer",
           "__version__"]
