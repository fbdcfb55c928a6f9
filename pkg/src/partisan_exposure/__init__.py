"""County-level partisan exposure across offline, online and residential networks."""

__version__ = "0.1.0"
