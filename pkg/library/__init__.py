"""Core computations for cairn-check: free group, intervals, Hilbert models, spectra"""

__version__ = "0.3.0"
