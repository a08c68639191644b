"""Spherical iterative filtering: operators, spectra and decompositions on the latitude-longitude grid."""

__version__ = "0.1.0"
