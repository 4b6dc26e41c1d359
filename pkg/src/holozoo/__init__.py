"""holozoo: a numerical laboratory for Lorentzian holonomy on coordinate charts."""

__version__ = "0.1.0"
