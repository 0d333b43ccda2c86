"""Operation and sizing of DGs, PV, batteries and hydrogen storage on a radial feeder."""

__version__ = "0.1.0"
