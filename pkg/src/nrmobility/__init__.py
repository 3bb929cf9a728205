"""Connected-mode mobility in a beamformed NR macro deployment."""

__version__ = "0.1.0"
