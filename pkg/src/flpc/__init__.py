"""Decision procedures for the fluted fragment with periodic counting."""
__version__ = "0.1.0"
