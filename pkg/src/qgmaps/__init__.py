"""Random planar maps, O(n) gaskets and the Hausdorff dimension of 2D quantum gravity."""

__version__ = "0.1.0"
