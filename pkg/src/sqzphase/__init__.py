"""Phase estimation with a squeezed thermal probe and homodyne detection."""

__version__ = "0.1.0"
