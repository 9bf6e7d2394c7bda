"""Mapping of QASM circuits onto ion-trap fabrics: scheduling, routing and placement."""

__version__ = "0.1.0"
