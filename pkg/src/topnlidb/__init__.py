"""Answer English temporal questions against a valid-time database via TOP formulae."""

__version__ = "0.1.0"
