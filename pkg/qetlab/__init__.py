"""Simulation of quantum energy teleportation on strong local passive states."""

__version__ = "1.0.0"
