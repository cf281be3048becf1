"""Poncelet polygon families over complex projective coordinates: areas, centers and their loci."""

__version__ = "0.1.0"
