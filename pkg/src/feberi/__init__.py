"""Free-electron bound-electron resonant interaction (FEBERI) simulations."""

__version__ = "0.1.0"
