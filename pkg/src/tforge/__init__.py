"""tforge: T-count optimization of CNOT+T circuits via GF(2) tensor decomposition."""

__version__ = "0.1.0"
