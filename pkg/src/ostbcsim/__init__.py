"""Link-level Monte Carlo simulator for OSTBC broadcast over
dimension-reduced massive MIMO downlinks."""

__version__ = "0.1.0"
