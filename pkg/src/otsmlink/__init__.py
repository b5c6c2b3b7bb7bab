"""otsmlink: link-level simulation and error bounds for Walsh-Hadamard
single-carrier transmission over doubly-spread channels with RF hardware
impairments."""

__version__ = "0.1.0"
