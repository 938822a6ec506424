"""Near-field wireless power transfer from physically large apertures."""

__version__ = "0.1.0"
