"""Exact few-qubit simulator of communication between parties with private
reference frames and direction-dependent channel rotations."""

__version__ = "0.1.0"
