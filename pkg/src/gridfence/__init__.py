"""Grid-cell geofence design from GPS trajectory density.

Builds 0-1 quadratic cell-selection models over an L x L density grid,
solves them exactly or by simulated annealing, and compares the resulting
fences against a circular-geofence baseline.
"""

__version__ = "0.1.0"
