"""handpipe: hand-to-robot demonstration pipeline and desk-scale learning toolkit."""

__version__ = "0.1.0"
