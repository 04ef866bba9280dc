"""Grid-forming converter placement via generalized short-circuit ratio analysis."""

__version__ = "0.1.0"
