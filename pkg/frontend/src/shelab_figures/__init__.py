"""Figure rendering for shelab experiment output directories.

The package consumes only the CSV tables and ``summary.json`` files that the
``shelab`` command writes; it performs no statistics of its own beyond axis
transforms.
"""

__version__ = "1.0.0"

from .loader import FigureInputError, MissingInputError, SchemaError, Table  # noqa: F401
from .figures import FIGURES, render  # noqa: F401
