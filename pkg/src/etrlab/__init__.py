"""etrlab: a desk-scale laboratory for the geometry and cost of sparse discovery."""

__version__ = "0.1.0"
