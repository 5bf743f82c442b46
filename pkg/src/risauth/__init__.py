"""Physical-layer mutual authentication for RIS-assisted backscatter links."""

__version__ = "0.1.0"
