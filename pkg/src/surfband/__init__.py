"""Surface-code memory experiments with areal, row/column, and boundary
syndrome readout, plus the matching decoder and verification harness."""

__version__ = "0.1.0"
