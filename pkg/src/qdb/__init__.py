"""qdb: OpenQASM 2.0 simulation and quantum-program debugging toolkit."""

__version__ = "0.1.0"
