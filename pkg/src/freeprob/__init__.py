"""Numerical toolkit for free infinite divisibility and free selfdecomposability."""

from __future__ import annotations

from .errors import FreeProbError
from .measures import CATALOG, MeasureSpec, catalog_lookup
from .reports import CheckReport

__version__ = "0.1.0"

__all__ = ["CATALOG", "CheckReport", "FreeProbError", "MeasureSpec", "catalog_lookup", "__version__"]
