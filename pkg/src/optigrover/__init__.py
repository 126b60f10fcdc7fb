"""Linear-optical Grover search: simulation, compilation and analysis."""
__version__ = "0.1.0"
